#include "humbench/gold.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "humbench/error.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

LabelSet intersect(const LabelSet& a, const LabelSet& b) {
    LabelSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

LabelSet unite(const LabelSet& a, const LabelSet& b) {
    LabelSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

CoarseClass recompute_coarse(const GoldRecord& r, const Codebook& cb, CoarseRule rule) {
    return aggregate_coarse(rule == CoarseRule::Union ? unite(r.labels_a, r.labels_b)
                                                      : intersect(r.labels_a, r.labels_b),
                            cb);
}

LabelSet parse_label_cell(std::string_view cell, const Codebook& cb) {
    LabelSet out;
    const std::string trimmed = text::trim(cell);
    const std::string lowered = text::to_lower(trimmed);
    if (trimmed.empty() || lowered == "none" || lowered == "nan" || lowered == "[]") return out;
    // Separators are commas or semicolons; label names contain neither.
    std::string normalized = trimmed;
    std::replace(normalized.begin(), normalized.end(), ';', ',');
    for (const auto& part : text::split(normalized, ',')) {
        std::string name = text::trim(part);
        // Tolerate list syntax such as ['A', 'B'].
        name.erase(std::remove_if(name.begin(), name.end(), [](char c) { return c == '[' || c == ']'; }),
                   name.end());
        name = text::trim(name);
        if (name.size() >= 2 && (name.front() == '\'' || name.front() == '"') && name.back() == name.front())
            name = text::trim(name.substr(1, name.size() - 2));
        if (name.empty()) continue;
        if (const auto* l = cb.find_by_name(name)) {
            out.insert(l->abbrev);
        } else if (const auto* l2 = cb.find(name)) {
            out.insert(l2->abbrev);
        } else {
            throw ValidationError("unknown label '" + name + "'");
        }
    }
    return out;
}

namespace {

void finish_record(GoldRecord& r, const Codebook& cb, const GoldOptions& opt, const std::string& where,
                   GoldSet& out) {
    r.agreed = intersect(r.labels_a, r.labels_b);
    r.codebook_version = cb.version();
    const CoarseClass recomputed = recompute_coarse(r, cb, opt.coarse_rule);
    if (recomputed.value != r.coarse.value) {
        std::string msg = where + ": stored coarse " + std::string(to_string(r.coarse.value)) +
                          " but labels imply " + std::string(to_string(recomputed.value));
        if (opt.integrity == IntegrityMode::Strict) throw IntegrityError(msg);
        out.warnings.push_back(msg);
    }
    r.coarse.tie_flag = recomputed.tie_flag && recomputed.value == r.coarse.value;
    out.records.push_back(std::move(r));
}

std::string column_key(std::string_view header) {
    std::string k = text::to_lower(text::trim(header));
    std::replace(k.begin(), k.end(), ' ', '_');
    return k;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::istream& in, char delim) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false, field_started = false;
    char c;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row.front().empty())) rows.push_back(std::move(row));
        row.clear();
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else if (c == '\r') {
            continue;
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw ValidationError("csv: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

GoldSet load_gold_csv(std::istream& in, const Codebook& cb, const GoldOptions& opt) {
    auto rows = parse_csv(in);
    if (rows.empty()) throw ValidationError("gold csv: no header row");
    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        std::string h = rows[0][i];
        if (h.rfind("\xEF\xBB\xBF", 0) == 0) h = h.substr(3);  // UTF-8 BOM
        cols[column_key(h)] = i;
    }
    auto find_col = [&](std::initializer_list<const char*> names, bool needed) -> std::optional<std::size_t> {
        for (const char* n : names) {
            auto it = cols.find(n);
            if (it != cols.end()) return it->second;
        }
        if (needed) throw ValidationError(std::string("gold csv: missing column '") + *names.begin() + "'");
        return std::nullopt;
    };
    const auto c_title = find_col({"title", "post_title"}, true);
    const auto c_content = find_col({"content", "post_content", "submission_text", "submission"}, true);
    const auto c_target = find_col({"target_comment", "target_text", "comment", "focal_comment"}, true);
    const auto c_l1 = find_col({"labels_1", "lables_1", "labels1", "annotator_a"}, true);
    const auto c_l2 = find_col({"labels_2", "lables_2", "labels2", "annotator_b"}, true);
    const auto c_coarse = find_col({"coarse", "ih/ia/neutral", "ih/ia/neutral_label", "ih/ia/ne"}, true);
    const auto c_id = find_col({"id", "target_id"}, false);
    const auto c_first = find_col({"first_comment"}, false);
    const auto c_pos = find_col({"target_position", "position"}, false);

    GoldSet out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = "row " + std::to_string(r + 1);
        auto cell = [&](std::optional<std::size_t> c) -> std::string {
            if (!c || *c >= row.size()) return {};
            return row[*c];
        };
        try {
            GoldRecord g;
            g.target.target_id = c_id ? text::trim(cell(c_id)) : std::to_string(r);
            if (g.target.target_id.empty()) g.target.target_id = std::to_string(r);
            g.target.title = cell(c_title);
            g.target.submission_text = cell(c_content);
            g.target.target_text = cell(c_target);
            const std::string pos = text::to_lower(text::trim(cell(c_pos)));
            const std::string first = cell(c_first);
            if (pos == "second" || pos == "2" || (pos.empty() && !text::trim(first).empty())) {
                g.target.position = TargetPosition::Second;
                g.target.first_comment = first;
            }
            g.labels_a = parse_label_cell(cell(c_l1), cb);
            g.labels_b = parse_label_cell(cell(c_l2), cb);
            g.coarse = CoarseClass{parse_coarse_name(cell(c_coarse)), false};
            finish_record(g, cb, opt, where, out);
        } catch (const IntegrityError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ValidationError("gold csv " + where + ": " + e.what());
        }
    }
    return out;
}

GoldSet load_gold_jsonl(std::istream& in, const Codebook& cb, const GoldOptions& opt) {
    GoldSet out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        try {
            json j = json::parse(line);
            GoldRecord g;
            g.target = target_from_json(j.at("target"));
            for (const auto& a : j.at("labels_a")) g.labels_a.insert(cb.at(a.get<std::string>()).abbrev);
            for (const auto& b : j.at("labels_b")) g.labels_b.insert(cb.at(b.get<std::string>()).abbrev);
            g.coarse = CoarseClass{parse_coarse_name(j.at("coarse").get<std::string>()), false};
            finish_record(g, cb, opt, where, out);
        } catch (const json::exception& e) {
            throw ValidationError("gold jsonl " + where + ": " + e.what());
        } catch (const IntegrityError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ValidationError("gold jsonl " + where + ": " + e.what());
        }
    }
    return out;
}

GoldSet load_gold(const std::filesystem::path& path, const Codebook& cb, const GoldOptions& opt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read gold file " + path.string());
    const std::string ext = text::to_lower(path.extension().string());
    if (ext == ".jsonl" || ext == ".json") return load_gold_jsonl(in, cb, opt);
    return load_gold_csv(in, cb, opt);
}

json gold_to_json(const GoldRecord& r) {
    return json{{"target", target_to_json(r.target)},
                {"labels_a", std::vector<std::string>(r.labels_a.begin(), r.labels_a.end())},
                {"labels_b", std::vector<std::string>(r.labels_b.begin(), r.labels_b.end())},
                {"coarse", std::string(to_string(r.coarse.value))},
                {"codebook_version", r.codebook_version}};
}

void write_gold(std::span<const GoldRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    for (const auto& r : records) out << gold_to_json(r).dump() << '\n';
}

}  // namespace humbench
