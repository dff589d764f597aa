#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "humbench/boosters.hpp"
#include "humbench/gold.hpp"
#include "humbench/pipeline.hpp"

namespace humbench {

enum class GoldRule { Intersection, Union, PerAnnotatorMean };

std::string_view to_string(GoldRule r);
GoldRule parse_gold_rule(std::string_view s);

// Experiment config files are JSON with the keys of config_to_json; relative
// paths resolve against the file's directory.
struct ExperimentConfig {
    std::filesystem::path dataset;
    std::filesystem::path codebook;  // empty: the built-in codebook
    std::string model_id;
    PromptConfig prompt;
    Booster booster = Booster::None;
    int refine_rounds = 2;
    std::size_t shots = 3;                     // per polarity, few-shot boosters
    std::filesystem::path optimized_prompts;   // auto-optimize: JSON {label: system prompt}
    GatewayMode mode = GatewayMode::Replay;
    std::filesystem::path cache;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> shuffle_labels_seed;
    FailurePolicy failure;
    std::size_t max_in_flight = 4;
    std::filesystem::path output_dir;

    void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Gateway calls per target before retries: 1 for coarse and multiple
// selection, one per label for binary questions; self-refinement multiplies
// by 3 * rounds.
std::size_t calls_per_target(const ExperimentConfig& c, const Codebook& cb);

struct ItemResult {
    std::string label;  // empty for coarse and multiple-selection items
    Verdict verdict;
    std::vector<std::string> cache_keys;
    bool unparseable = false;
    bool failed = false;
    std::string error;
    std::optional<nlohmann::json> transcript;  // self-refinement audit
};

struct TargetResult {
    std::string target_id;
    std::vector<ItemResult> items;
    LabelSet predicted_labels;        // label-wise tasks
    CoarseClass predicted_coarse;     // direct verdict, or aggregated from labels
};

struct RunResult {
    nlohmann::json provenance;  // config hash, digests, codebook version, prompt, model
    std::vector<TargetResult> targets;
    std::vector<std::string> exemplar_ids;
    std::vector<std::string> warnings;
    std::size_t gateway_calls = 0;
    std::size_t failures = 0;
    std::size_t unparseable = 0;
};

// Hash of everything that determines the run's outputs (not paths or mode).
std::string config_hash(const ExperimentConfig& c, const std::string& dataset_digest, const Codebook& cb);

// Runs every gold target through the configured prompt and booster. Targets
// are processed concurrently; results keep dataset order.
RunResult run_experiment(const ExperimentConfig& config, Gateway& gateway, std::span<const GoldRecord> gold,
                         const Codebook& cb);
// Loads dataset, codebook and gateway from the config.
RunResult run_experiment(const ExperimentConfig& config);

nlohmann::json run_to_json(const RunResult& r);
RunResult run_from_json(const nlohmann::json& j);
void write_run(const RunResult& r, const std::filesystem::path& path);
RunResult load_run(const std::filesystem::path& path);

struct ScoreRow {
    std::map<std::string, double> per_label;
    std::optional<double> ih_mean;
    std::optional<double> ia_mean;
    std::optional<double> all_mean;
    std::optional<double> coarse;
};

struct MetricReport {
    std::string prompt;  // e.g. "C&D-BQ"
    std::string model;
    std::string booster;
    GoldRule rule = GoldRule::Intersection;
    std::vector<std::string> ih_labels;
    std::vector<std::string> ia_labels;
    ScoreRow scores;
    ScoreRow baseline;
    ScoreRow upper_bound;
    double baseline_coarse_std_error = 0.0;
    std::size_t baseline_trials = 0;
    std::size_t scored_targets = 0;
    std::size_t unparseable = 0;
    std::size_t failures = 0;
    std::size_t gateway_calls = 0;
    nlohmann::json provenance;
};

struct ScoreOptions {
    GoldRule rule = GoldRule::Intersection;
    std::size_t baseline_trials = 10000;
    std::uint64_t baseline_seed = 0;
};

// Per-label binary Macro-F1 against the gold rule, coarse Macro-F1 against
// the stored coarse column, plus distribution baseline and mutual upper
// bound over the same targets.
MetricReport score_run(const RunResult& run, std::span<const GoldRecord> gold, const Codebook& cb,
                       const ScoreOptions& opt = {});

// Baseline and upper-bound rows only (no model run needed).
MetricReport reference_rows(std::span<const GoldRecord> gold, const Codebook& cb, const ScoreOptions& opt = {});

enum class ReportFormat { Json, Csv, Markdown };

ReportFormat parse_report_format(std::string_view s);

nlohmann::json report_to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& j);

// Model rows in order, then the baseline and upper-bound rows of the first
// report. CSV cells carry 4 decimals, markdown cells 2.
std::string emit_report(std::span<const MetricReport> reports, ReportFormat format);
void write_report(std::span<const MetricReport> reports, ReportFormat format, const std::filesystem::path& path);
std::vector<MetricReport> load_reports(const std::filesystem::path& json_path);

}  // namespace humbench
