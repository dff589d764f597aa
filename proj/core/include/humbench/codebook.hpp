#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace humbench {

enum class Polarity { IH, IA };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

// Labels are referred to by abbreviation everywhere outside of prompts.
using LabelSet = std::set<std::string>;

struct CodebookLabel {
    std::string name;
    std::string abbrev;
    Polarity polarity = Polarity::IH;
    std::string definition;

    bool operator==(const CodebookLabel&) const = default;
};

enum class RevisionKind { Eliminate, Merge, Redefine, Add };

std::string_view to_string(RevisionKind k);
RevisionKind parse_revision_kind(std::string_view s);

struct Revision {
    RevisionKind kind = RevisionKind::Redefine;
    std::vector<std::string> affected;      // abbrevs touched by the revision
    std::string merge_into;                 // Merge only: retained label
    std::optional<CodebookLabel> added;     // Add only
    std::string new_definition;             // Redefine only
    std::string rationale;

    bool operator==(const Revision&) const = default;
};

// Immutable, validated label taxonomy. Revisions produce new values.
class Codebook {
public:
    // Throws ValidationError when abbrevs/names repeat, a definition is
    // empty, or either polarity is unrepresented.
    Codebook(int version, std::vector<CodebookLabel> labels, std::vector<Revision> changelog = {});

    int version() const noexcept { return version_; }
    const std::vector<CodebookLabel>& labels() const noexcept { return labels_; }
    const std::vector<Revision>& changelog() const noexcept { return changelog_; }

    std::size_t size() const noexcept { return labels_.size(); }
    bool contains(std::string_view abbrev) const { return find(abbrev) != nullptr; }
    const CodebookLabel* find(std::string_view abbrev) const;
    const CodebookLabel& at(std::string_view abbrev) const;  // throws ValidationError

    // Case-insensitive, quote-folded lookup by full label name.
    const CodebookLabel* find_by_name(std::string_view name) const;

    std::vector<CodebookLabel> labels_of(Polarity p) const;
    std::vector<std::string> abbrevs() const;
    std::size_t index_of(std::string_view abbrev) const;

    bool operator==(const Codebook&) const = default;

private:
    int version_;
    std::vector<CodebookLabel> labels_;
    std::vector<Revision> changelog_;
};

// Codebook files are YAML: version, labels[{name, abbrev, polarity,
// definition}], optional changelog. Unknown keys are rejected.
Codebook parse_codebook(std::string_view yaml_text);
Codebook load_codebook(const std::filesystem::path& path);
std::string codebook_to_yaml(const Codebook& cb);
void save_codebook(const Codebook& cb, const std::filesystem::path& path);

// The 13-label final codebook (7 IH, 6 IA) shipped with the library.
const Codebook& default_codebook();

enum class Coarse { IH, IA, Neutral };

std::string_view to_string(Coarse c);
// Accepts "IH", "IA", "Neutral", "NE" (case-insensitive).
Coarse parse_coarse_name(std::string_view s);

struct CoarseClass {
    Coarse value = Coarse::Neutral;
    bool tie_flag = false;

    bool operator==(const CoarseClass&) const = default;
};

// More IH than IA labels -> IH, more IA -> IA, none -> Neutral,
// equal nonzero counts -> Neutral with tie_flag.
CoarseClass aggregate_coarse(const LabelSet& labels, const Codebook& cb);

// Old abbrev -> retained abbrev, or nullopt when the label was eliminated.
using RemapTable = std::map<std::string, std::optional<std::string>>;

struct RevisionResult {
    Codebook codebook;
    RemapTable remap;
};

RevisionResult apply_revision(const Codebook& cb, const Revision& revision);
// Applies the revisions in order as a single version step (an empty list
// still bumps the version).
RevisionResult apply_revisions(const Codebook& cb, std::span<const Revision> revisions);

// Tab-separated "old<TAB>new" lines; eliminated labels have an empty second field.
std::string remap_to_tsv(const RemapTable& remap);
void write_remap(const RemapTable& remap, const std::filesystem::path& path);

}  // namespace humbench
