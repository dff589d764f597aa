#include "humbench/codebook.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "humbench/error.hpp"
#include "humbench/resources.hpp"
#include "humbench/text.hpp"

namespace humbench {

std::string_view to_string(Polarity p) { return p == Polarity::IH ? "IH" : "IA"; }

Polarity parse_polarity(std::string_view s) {
    std::string v = text::to_lower(text::trim(s));
    if (v == "ih") return Polarity::IH;
    if (v == "ia") return Polarity::IA;
    throw ValidationError("unknown polarity '" + std::string(s) + "' (expected IH or IA)");
}

std::string_view to_string(RevisionKind k) {
    switch (k) {
        case RevisionKind::Eliminate: return "eliminate";
        case RevisionKind::Merge: return "merge";
        case RevisionKind::Redefine: return "redefine";
        case RevisionKind::Add: return "add";
    }
    return "?";
}

RevisionKind parse_revision_kind(std::string_view s) {
    std::string v = text::to_lower(text::trim(s));
    if (v == "eliminate") return RevisionKind::Eliminate;
    if (v == "merge") return RevisionKind::Merge;
    if (v == "redefine") return RevisionKind::Redefine;
    if (v == "add") return RevisionKind::Add;
    throw ValidationError("unknown revision kind '" + std::string(s) + "'");
}

std::string_view to_string(Coarse c) {
    switch (c) {
        case Coarse::IH: return "IH";
        case Coarse::IA: return "IA";
        case Coarse::Neutral: return "Neutral";
    }
    return "?";
}

Coarse parse_coarse_name(std::string_view s) {
    std::string v = text::to_lower(text::trim(s));
    if (v == "ih") return Coarse::IH;
    if (v == "ia") return Coarse::IA;
    if (v == "neutral" || v == "ne") return Coarse::Neutral;
    throw ValidationError("unknown coarse class '" + std::string(s) + "'");
}

Codebook::Codebook(int version, std::vector<CodebookLabel> labels, std::vector<Revision> changelog)
    : version_(version), labels_(std::move(labels)), changelog_(std::move(changelog)) {
    if (version_ < 1) throw ValidationError("codebook version must be >= 1");
    std::set<std::string> abbrevs, names;
    bool has_ih = false, has_ia = false;
    for (const auto& l : labels_) {
        if (text::trim(l.abbrev).empty()) throw ValidationError("label '" + l.name + "' has an empty abbrev");
        if (text::trim(l.name).empty()) throw ValidationError("label " + l.abbrev + " has an empty name");
        if (text::trim(l.definition).empty())
            throw ValidationError("label " + l.abbrev + " has an empty definition");
        if (!abbrevs.insert(l.abbrev).second) throw ValidationError("duplicate abbrev '" + l.abbrev + "'");
        if (!names.insert(text::to_lower(text::fold_quotes(l.name))).second)
            throw ValidationError("duplicate label name '" + l.name + "'");
        (l.polarity == Polarity::IH ? has_ih : has_ia) = true;
    }
    if (!has_ih) throw ValidationError("codebook has no IH labels");
    if (!has_ia) throw ValidationError("codebook has no IA labels");
}

const CodebookLabel* Codebook::find(std::string_view abbrev) const {
    auto it = std::find_if(labels_.begin(), labels_.end(),
                           [&](const CodebookLabel& l) { return l.abbrev == abbrev; });
    return it == labels_.end() ? nullptr : &*it;
}

const CodebookLabel& Codebook::at(std::string_view abbrev) const {
    if (const auto* l = find(abbrev)) return *l;
    throw ValidationError("unknown label '" + std::string(abbrev) + "' in codebook v" +
                          std::to_string(version_));
}

const CodebookLabel* Codebook::find_by_name(std::string_view name) const {
    std::string key = text::to_lower(text::fold_quotes(text::trim(name)));
    for (const auto& l : labels_) {
        if (text::to_lower(text::fold_quotes(l.name)) == key) return &l;
    }
    return nullptr;
}

std::vector<CodebookLabel> Codebook::labels_of(Polarity p) const {
    std::vector<CodebookLabel> out;
    std::copy_if(labels_.begin(), labels_.end(), std::back_inserter(out),
                 [p](const CodebookLabel& l) { return l.polarity == p; });
    return out;
}

std::vector<std::string> Codebook::abbrevs() const {
    std::vector<std::string> out;
    for (const auto& l : labels_) out.push_back(l.abbrev);
    return out;
}

std::size_t Codebook::index_of(std::string_view abbrev) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].abbrev == abbrev) return i;
    }
    throw ValidationError("unknown label '" + std::string(abbrev) + "'");
}

// ---------------------------------------------------------------------------
// YAML I/O

namespace {

void reject_unknown(const YAML::Node& node, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
    for (const auto& kv : node) {
        auto key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError("unknown field '" + key + "' in " + std::string(where));
    }
}

std::string required(const YAML::Node& node, const char* key, std::string_view where) {
    if (!node[key]) throw ValidationError("missing field '" + std::string(key) + "' in " + std::string(where));
    return node[key].as<std::string>();
}

CodebookLabel parse_label(const YAML::Node& node) {
    if (!node.IsMap()) throw ValidationError("codebook label entry must be a mapping");
    reject_unknown(node, {"name", "abbrev", "polarity", "definition"}, "label");
    return CodebookLabel{required(node, "name", "label"), required(node, "abbrev", "label"),
                         parse_polarity(required(node, "polarity", "label")),
                         required(node, "definition", "label")};
}

Revision parse_revision(const YAML::Node& node) {
    if (!node.IsMap()) throw ValidationError("changelog entry must be a mapping");
    reject_unknown(node, {"kind", "affected", "into", "added", "definition", "rationale"}, "revision");
    Revision r;
    r.kind = parse_revision_kind(required(node, "kind", "revision"));
    if (node["affected"]) r.affected = node["affected"].as<std::vector<std::string>>();
    if (node["into"]) r.merge_into = node["into"].as<std::string>();
    if (node["added"]) r.added = parse_label(node["added"]);
    if (node["definition"]) r.new_definition = node["definition"].as<std::string>();
    if (node["rationale"]) r.rationale = node["rationale"].as<std::string>();
    return r;
}

void emit_label(YAML::Emitter& out, const CodebookLabel& l) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << l.name;
    out << YAML::Key << "abbrev" << YAML::Value << l.abbrev;
    out << YAML::Key << "polarity" << YAML::Value << std::string(to_string(l.polarity));
    out << YAML::Key << "definition" << YAML::Value << l.definition;
    out << YAML::EndMap;
}

}  // namespace

Codebook parse_codebook(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("codebook: ") + e.what());
    }
    if (!root.IsMap()) throw ValidationError("codebook: top level must be a mapping");
    reject_unknown(root, {"version", "labels", "changelog"}, "codebook");
    try {
        int version = root["version"] ? root["version"].as<int>() : 1;
        std::vector<CodebookLabel> labels;
        if (!root["labels"] || !root["labels"].IsSequence())
            throw ValidationError("codebook: 'labels' must be a sequence");
        for (const auto& n : root["labels"]) labels.push_back(parse_label(n));
        std::vector<Revision> changelog;
        if (root["changelog"]) {
            for (const auto& n : root["changelog"]) changelog.push_back(parse_revision(n));
        }
        return Codebook(version, std::move(labels), std::move(changelog));
    } catch (const YAML::Exception& e) {
        throw ValidationError(std::string("codebook: ") + e.what());
    }
}

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read codebook file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_codebook(ss.str());
}

std::string codebook_to_yaml(const Codebook& cb) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "version" << YAML::Value << cb.version();
    out << YAML::Key << "labels" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : cb.labels()) emit_label(out, l);
    out << YAML::EndSeq;
    if (!cb.changelog().empty()) {
        out << YAML::Key << "changelog" << YAML::Value << YAML::BeginSeq;
        for (const auto& r : cb.changelog()) {
            out << YAML::BeginMap;
            out << YAML::Key << "kind" << YAML::Value << std::string(to_string(r.kind));
            out << YAML::Key << "affected" << YAML::Value << YAML::Flow << r.affected;
            if (!r.merge_into.empty()) out << YAML::Key << "into" << YAML::Value << r.merge_into;
            if (r.added) {
                out << YAML::Key << "added" << YAML::Value;
                emit_label(out, *r.added);
            }
            if (!r.new_definition.empty())
                out << YAML::Key << "definition" << YAML::Value << r.new_definition;
            if (!r.rationale.empty()) out << YAML::Key << "rationale" << YAML::Value << r.rationale;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write codebook file " + path.string());
    out << codebook_to_yaml(cb);
}

const Codebook& default_codebook() {
    static const Codebook cb = parse_codebook(resources::get("codebook/default.yaml"));
    return cb;
}

// ---------------------------------------------------------------------------

CoarseClass aggregate_coarse(const LabelSet& labels, const Codebook& cb) {
    int ih = 0, ia = 0;
    for (const auto& abbrev : labels) {
        (cb.at(abbrev).polarity == Polarity::IH ? ih : ia) += 1;
    }
    if (ih > ia) return {Coarse::IH, false};
    if (ia > ih) return {Coarse::IA, false};
    return {Coarse::Neutral, ih > 0};
}

namespace {

void apply_one(std::vector<CodebookLabel>& labels, RemapTable& remap, const Revision& r) {
    auto find = [&](std::string_view abbrev) {
        return std::find_if(labels.begin(), labels.end(),
                            [&](const CodebookLabel& l) { return l.abbrev == abbrev; });
    };
    for (const auto& a : r.affected) {
        if (find(a) == labels.end())
            throw ValidationError("revision references unknown label '" + a + "'");
    }
    switch (r.kind) {
        case RevisionKind::Eliminate:
        case RevisionKind::Merge: {
            if (r.affected.empty()) throw ValidationError("eliminate/merge must remove at least one label");
            std::optional<std::string> target;
            if (r.kind == RevisionKind::Merge) {
                if (find(r.merge_into) == labels.end())
                    throw ValidationError("merge into nonexistent label '" + r.merge_into + "'");
                if (std::find(r.affected.begin(), r.affected.end(), r.merge_into) != r.affected.end())
                    throw ValidationError("merge target '" + r.merge_into + "' cannot also be removed");
                target = r.merge_into;
            }
            for (const auto& a : r.affected) {
                labels.erase(find(a));
                // Re-point anything that previously mapped onto the removed label.
                for (auto& [old, now] : remap) {
                    if (now && *now == a) now = target;
                }
            }
            break;
        }
        case RevisionKind::Redefine: {
            if (r.affected.size() != 1) throw ValidationError("redefine must affect exactly one label");
            if (text::trim(r.new_definition).empty())
                throw ValidationError("redefine requires a non-empty definition");
            find(r.affected.front())->definition = r.new_definition;
            break;
        }
        case RevisionKind::Add: {
            if (!r.added) throw ValidationError("add revision carries no label");
            if (find(r.added->abbrev) != labels.end())
                throw ValidationError("add revision duplicates abbrev '" + r.added->abbrev + "'");
            labels.push_back(*r.added);
            break;
        }
    }
}

}  // namespace

RevisionResult apply_revisions(const Codebook& cb, std::span<const Revision> revisions) {
    std::vector<CodebookLabel> labels = cb.labels();
    RemapTable remap;
    for (const auto& l : labels) remap[l.abbrev] = l.abbrev;
    for (const auto& r : revisions) apply_one(labels, remap, r);
    std::vector<Revision> changelog = cb.changelog();
    changelog.insert(changelog.end(), revisions.begin(), revisions.end());
    return RevisionResult{Codebook(cb.version() + 1, std::move(labels), std::move(changelog)),
                          std::move(remap)};
}

RevisionResult apply_revision(const Codebook& cb, const Revision& revision) {
    return apply_revisions(cb, std::span<const Revision>(&revision, 1));
}

std::string remap_to_tsv(const RemapTable& remap) {
    std::string out = "old_abbrev\tnew_abbrev\n";
    for (const auto& [old, now] : remap) {
        out += old + "\t" + now.value_or("") + "\n";
    }
    return out;
}

void write_remap(const RemapTable& remap, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write remap file " + path.string());
    out << remap_to_tsv(remap);
}

}  // namespace humbench
