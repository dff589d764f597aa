#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "humbench/codebook.hpp"
#include "humbench/corpus.hpp"

namespace humbench {

// A dual-annotated target. `coarse` is the stored dataset value, which is
// authoritative for scoring.
struct GoldRecord {
    AnnotationTarget target;
    LabelSet labels_a;
    LabelSet labels_b;
    LabelSet agreed;  // labels_a ∩ labels_b
    CoarseClass coarse;
    int codebook_version = 1;
};

// Which label set the coarse class is recomputed from when cross-checking.
enum class CoarseRule { Union, Intersection };

enum class IntegrityMode { Strict, Warn };

struct GoldOptions {
    CoarseRule coarse_rule = CoarseRule::Union;
    IntegrityMode integrity = IntegrityMode::Strict;
};

struct GoldSet {
    std::vector<GoldRecord> records;
    std::vector<std::string> warnings;  // integrity mismatches in Warn mode
};

LabelSet intersect(const LabelSet& a, const LabelSet& b);
LabelSet unite(const LabelSet& a, const LabelSet& b);

CoarseClass recompute_coarse(const GoldRecord& r, const Codebook& cb, CoarseRule rule);

// Splits a "Name A, Name B" cell into abbrevs. Full names and abbrevs are
// both accepted; empty, "none" and "nan" cells are the empty set.
LabelSet parse_label_cell(std::string_view cell, const Codebook& cb);

// Released-dataset CSV (title, content, target comment, Labels_1, Labels_2,
// coarse; optional id, first comment, target position) or the JSONL form
// written by write_gold. Dispatches on the file extension.
GoldSet load_gold(const std::filesystem::path& path, const Codebook& cb, const GoldOptions& opt = {});
GoldSet load_gold_csv(std::istream& in, const Codebook& cb, const GoldOptions& opt = {});
GoldSet load_gold_jsonl(std::istream& in, const Codebook& cb, const GoldOptions& opt = {});

nlohmann::json gold_to_json(const GoldRecord& r);
void write_gold(std::span<const GoldRecord> records, const std::filesystem::path& path);

// RFC 4180 reader: quoted fields may contain delimiters, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in, char delim = ',');

}  // namespace humbench
