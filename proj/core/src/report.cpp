#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "humbench/error.hpp"
#include "humbench/metrics.hpp"
#include "humbench/runner.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

namespace {

const std::vector<std::string> kCoarseClasses = {"IH", "IA", "Neutral"};

std::vector<std::string> abbrevs_of(const Codebook& cb, Polarity p) {
    std::vector<std::string> out;
    for (const auto& l : cb.labels_of(p)) out.push_back(l.abbrev);
    return out;
}

std::optional<double> mean_of(const std::map<std::string, double>& per_label, const std::vector<std::string>& labels) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& l : labels) {
        if (auto it = per_label.find(l); it != per_label.end()) {
            sum += it->second;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

void fill_means(ScoreRow& row, const MetricReport& r) {
    row.ih_mean = mean_of(row.per_label, r.ih_labels);
    row.ia_mean = mean_of(row.per_label, r.ia_labels);
    std::vector<std::string> all = r.ih_labels;
    all.insert(all.end(), r.ia_labels.begin(), r.ia_labels.end());
    row.all_mean = mean_of(row.per_label, all);
}

std::string coarse_name(const CoarseClass& c) { return std::string(to_string(c.value)); }

std::vector<bool> membership(std::span<const GoldRecord* const> recs, const std::string& label,
                             LabelSet GoldRecord::*field) {
    std::vector<bool> out;
    for (const auto* r : recs) out.push_back(((*r).*field).count(label) > 0);
    return out;
}

std::vector<bool> union_membership(std::span<const GoldRecord* const> recs, const std::string& label) {
    std::vector<bool> out;
    for (const auto* r : recs) out.push_back(r->labels_a.count(label) || r->labels_b.count(label));
    return out;
}

double binary_baseline(const std::vector<bool>& gold, std::size_t trials, std::uint64_t seed) {
    std::size_t pos = static_cast<std::size_t>(std::count(gold.begin(), gold.end(), true));
    std::vector<std::size_t> counts = {gold.size() - pos, pos};
    return metrics::distribution_baseline(counts, trials, seed).mean;
}

void reference(MetricReport& r, std::span<const GoldRecord* const> recs, const Codebook& cb, const ScoreOptions& opt) {
    // Coarse rows: stored coarse classes as gold; annotators' own coarse
    // classes for the upper bound.
    std::vector<std::size_t> counts(kCoarseClasses.size(), 0);
    std::vector<std::string> coarse_a, coarse_b;
    for (const auto* g : recs) {
        ++counts[static_cast<std::size_t>(std::find(kCoarseClasses.begin(), kCoarseClasses.end(),
                                                    coarse_name(g->coarse)) -
                                          kCoarseClasses.begin())];
        coarse_a.push_back(coarse_name(aggregate_coarse(g->labels_a, cb)));
        coarse_b.push_back(coarse_name(aggregate_coarse(g->labels_b, cb)));
    }
    auto est = metrics::distribution_baseline(counts, opt.baseline_trials, opt.baseline_seed);
    r.baseline.coarse = est.mean;
    r.baseline_coarse_std_error = est.std_error;
    r.baseline_trials = opt.baseline_trials;
    r.upper_bound.coarse = metrics::mutual_upper_bound(coarse_a, coarse_b, kCoarseClasses);

    std::uint64_t stream = 1;
    for (const auto& l : cb.labels()) {
        const auto a = membership(recs, l.abbrev, &GoldRecord::labels_a);
        const auto b = membership(recs, l.abbrev, &GoldRecord::labels_b);
        const std::uint64_t seed = opt.baseline_seed + stream++;
        double base = 0.0;
        switch (opt.rule) {
            case GoldRule::Intersection:
                base = binary_baseline(membership(recs, l.abbrev, &GoldRecord::agreed), opt.baseline_trials, seed);
                break;
            case GoldRule::Union:
                base = binary_baseline(union_membership(recs, l.abbrev), opt.baseline_trials, seed);
                break;
            case GoldRule::PerAnnotatorMean:
                base = 0.5 * (binary_baseline(a, opt.baseline_trials, seed) +
                              binary_baseline(b, opt.baseline_trials, seed + 0x9e37));
                break;
        }
        r.baseline.per_label[l.abbrev] = base;
        r.upper_bound.per_label[l.abbrev] = metrics::binary_mutual_upper_bound(a, b);
    }
    fill_means(r.baseline, r);
    fill_means(r.upper_bound, r);
}

}  // namespace

MetricReport reference_rows(std::span<const GoldRecord> gold, const Codebook& cb, const ScoreOptions& opt) {
    if (gold.empty()) throw ValidationError("reference_rows: no gold records");
    MetricReport r;
    r.rule = opt.rule;
    r.ih_labels = abbrevs_of(cb, Polarity::IH);
    r.ia_labels = abbrevs_of(cb, Polarity::IA);
    std::vector<const GoldRecord*> recs;
    for (const auto& g : gold) recs.push_back(&g);
    reference(r, recs, cb, opt);
    r.scored_targets = recs.size();
    return r;
}

MetricReport score_run(const RunResult& run, std::span<const GoldRecord> gold, const Codebook& cb,
                       const ScoreOptions& opt) {
    std::map<std::string, const GoldRecord*> by_id;
    for (const auto& g : gold) by_id[g.target.target_id] = &g;
    std::vector<const GoldRecord*> recs;
    std::vector<const TargetResult*> preds;
    for (const auto& t : run.targets) {
        auto it = by_id.find(t.target_id);
        if (it == by_id.end()) throw ValidationError("run target " + t.target_id + " is not in the gold set");
        recs.push_back(it->second);
        preds.push_back(&t);
    }
    if (recs.empty()) throw ValidationError("score_run: the run and the gold set do not overlap");

    MetricReport r;
    r.prompt = run.provenance.value("prompt", std::string());
    r.model = run.provenance.value("model", std::string());
    r.booster = run.provenance.value("booster", std::string("none"));
    r.rule = opt.rule;
    r.ih_labels = abbrevs_of(cb, Polarity::IH);
    r.ia_labels = abbrevs_of(cb, Polarity::IA);
    r.scored_targets = recs.size();
    r.unparseable = run.unparseable;
    r.failures = run.failures;
    r.gateway_calls = run.gateway_calls;
    r.provenance = run.provenance;
    r.provenance["gold_rule"] = std::string(to_string(opt.rule));

    std::vector<std::string> gold_coarse, pred_coarse;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        gold_coarse.push_back(coarse_name(recs[i]->coarse));
        pred_coarse.push_back(coarse_name(preds[i]->predicted_coarse));
    }
    r.scores.coarse = metrics::macro_f1(gold_coarse, pred_coarse, kCoarseClasses);

    const bool label_wise = !r.prompt.empty() && r.prompt.find("Coarse") == std::string::npos;
    if (label_wise) {
        for (const auto& l : cb.labels()) {
            std::vector<bool> pred;
            for (const auto* p : preds) pred.push_back(p->predicted_labels.count(l.abbrev) > 0);
            double score = 0.0;
            switch (opt.rule) {
                case GoldRule::Intersection:
                    score = metrics::binary_macro_f1(membership(recs, l.abbrev, &GoldRecord::agreed), pred);
                    break;
                case GoldRule::Union:
                    score = metrics::binary_macro_f1(union_membership(recs, l.abbrev), pred);
                    break;
                case GoldRule::PerAnnotatorMean:
                    score = 0.5 * (metrics::binary_macro_f1(membership(recs, l.abbrev, &GoldRecord::labels_a), pred) +
                                   metrics::binary_macro_f1(membership(recs, l.abbrev, &GoldRecord::labels_b), pred));
                    break;
            }
            r.scores.per_label[l.abbrev] = score;
        }
        fill_means(r.scores, r);
    }
    reference(r, recs, cb, opt);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

json row_to_json(const ScoreRow& r) {
    return {{"per_label", r.per_label},
            {"ih_mean", opt_json(r.ih_mean)},
            {"ia_mean", opt_json(r.ia_mean)},
            {"all_mean", opt_json(r.all_mean)},
            {"coarse", opt_json(r.coarse)}};
}

ScoreRow row_from_json(const json& j) {
    ScoreRow r;
    r.per_label = j.value("per_label", std::map<std::string, double>{});
    r.ih_mean = opt_from(j, "ih_mean");
    r.ia_mean = opt_from(j, "ia_mean");
    r.all_mean = opt_from(j, "all_mean");
    r.coarse = opt_from(j, "coarse");
    return r;
}

std::string fmt(const std::optional<double>& v, int decimals) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
    return buf;
}

std::optional<double> cell(const ScoreRow& row, const std::string& label) {
    if (auto it = row.per_label.find(label); it != row.per_label.end()) return it->second;
    return std::nullopt;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct NamedRow {
    std::string prompt;
    std::string model;
    std::string booster;
    const ScoreRow* row;
    const MetricReport* source;  // null for reference rows
};

std::vector<NamedRow> table_rows(std::span<const MetricReport> reports) {
    std::vector<NamedRow> rows;
    for (const auto& r : reports) {
        if (!r.prompt.empty()) rows.push_back({r.prompt, r.model, r.booster, &r.scores, &r});
    }
    rows.push_back({"Baseline", "Distribution", "", &reports.front().baseline, nullptr});
    rows.push_back({"Upper bound", "Mutual", "", &reports.front().upper_bound, nullptr});
    return rows;
}

std::string emit_csv(std::span<const MetricReport> reports) {
    const auto& first = reports.front();
    std::ostringstream os;
    os << "Prompt,Model,Booster,IH/IA/NE";
    for (const auto& l : first.ih_labels) os << ',' << l;
    os << ",IH Mean";
    for (const auto& l : first.ia_labels) os << ',' << l;
    os << ",IA Mean,All,Targets,Unparseable,Failures,Config hash,Cache digest,Codebook version\n";
    for (const auto& nr : table_rows(reports)) {
        const auto& row = *nr.row;
        os << csv_escape(nr.prompt) << ',' << csv_escape(nr.model) << ',' << csv_escape(nr.booster) << ','
           << fmt(row.coarse, 4);
        for (const auto& l : first.ih_labels) os << ',' << fmt(cell(row, l), 4);
        os << ',' << fmt(row.ih_mean, 4);
        for (const auto& l : first.ia_labels) os << ',' << fmt(cell(row, l), 4);
        os << ',' << fmt(row.ia_mean, 4) << ',' << fmt(row.all_mean, 4);
        if (nr.source) {
            const auto& p = nr.source->provenance;
            os << ',' << nr.source->scored_targets << ',' << nr.source->unparseable << ',' << nr.source->failures << ','
               << p.value("config_hash", std::string()) << ',' << p.value("cache_digest", std::string()) << ','
               << p.value("codebook_version", 0);
        } else {
            os << ',' << first.scored_targets << ",,,,,";
        }
        os << '\n';
    }
    return os.str();
}

std::string emit_markdown(std::span<const MetricReport> reports) {
    const auto& first = reports.front();
    const auto rows = table_rows(reports);
    std::ostringstream os;
    os << "## Task-level scores\n\n| Prompt | Model | IH/IA/NE | All |\n|---|---|---|---|\n";
    for (const auto& nr : rows) {
        os << "| " << nr.prompt << " | " << nr.model << " | " << fmt(nr.row->coarse, 2) << " | "
           << fmt(nr.row->all_mean, 2) << " |\n";
    }
    auto label_table = [&](const char* title, const std::vector<std::string>& labels, const char* mean_name,
                           std::optional<double> ScoreRow::*mean) {
        os << "\n## " << title << "\n\n| Prompt | Model |";
        for (const auto& l : labels) os << ' ' << l << " |";
        os << ' ' << mean_name << " |\n|---|---|";
        for (std::size_t i = 0; i <= labels.size(); ++i) os << "---|";
        os << '\n';
        for (const auto& nr : rows) {
            if (nr.source && nr.row->per_label.empty()) continue;
            os << "| " << nr.prompt << " | " << nr.model << " |";
            for (const auto& l : labels) os << ' ' << fmt(cell(*nr.row, l), 2) << " |";
            os << ' ' << fmt((*nr.row).*mean, 2) << " |\n";
        }
    };
    label_table("IH labels", first.ih_labels, "IH Mean", &ScoreRow::ih_mean);
    label_table("IA labels", first.ia_labels, "IA Mean", &ScoreRow::ia_mean);

    os << "\n## Provenance\n\n";
    for (const auto& r : reports) {
        if (r.prompt.empty()) continue;
        const auto& p = r.provenance;
        os << "- " << r.prompt << " / " << r.model << " (booster " << r.booster << ", gold rule "
           << to_string(r.rule) << "): config `" << p.value("config_hash", std::string()) << "`, cache `"
           << p.value("cache_digest", std::string()) << "`, codebook v" << p.value("codebook_version", 0) << ", "
           << r.scored_targets << " targets, " << r.gateway_calls << " gateway calls, " << r.unparseable
           << " unparseable, " << r.failures << " failed\n";
    }
    os << "- Baseline: " << first.baseline_trials << " Monte-Carlo trials, coarse standard error "
       << fmt(first.baseline_coarse_std_error, 4) << "\n";
    return os.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
    const std::string v = text::to_lower(s);
    if (v == "json") return ReportFormat::Json;
    if (v == "csv") return ReportFormat::Csv;
    if (v == "markdown" || v == "md") return ReportFormat::Markdown;
    throw ValidationError("unknown report format '" + std::string(s) + "'");
}

json report_to_json(const MetricReport& r) {
    return {{"prompt", r.prompt},
            {"model", r.model},
            {"booster", r.booster},
            {"gold_rule", std::string(to_string(r.rule))},
            {"ih_labels", r.ih_labels},
            {"ia_labels", r.ia_labels},
            {"scores", row_to_json(r.scores)},
            {"baseline", row_to_json(r.baseline)},
            {"upper_bound", row_to_json(r.upper_bound)},
            {"baseline_coarse_std_error", r.baseline_coarse_std_error},
            {"baseline_trials", r.baseline_trials},
            {"scored_targets", r.scored_targets},
            {"unparseable", r.unparseable},
            {"failures", r.failures},
            {"gateway_calls", r.gateway_calls},
            {"provenance", r.provenance}};
}

MetricReport report_from_json(const json& j) {
    MetricReport r;
    r.prompt = j.value("prompt", std::string());
    r.model = j.value("model", std::string());
    r.booster = j.value("booster", std::string());
    r.rule = parse_gold_rule(j.value("gold_rule", std::string("intersection")));
    r.ih_labels = j.at("ih_labels").get<std::vector<std::string>>();
    r.ia_labels = j.at("ia_labels").get<std::vector<std::string>>();
    r.scores = row_from_json(j.at("scores"));
    r.baseline = row_from_json(j.at("baseline"));
    r.upper_bound = row_from_json(j.at("upper_bound"));
    r.baseline_coarse_std_error = j.value("baseline_coarse_std_error", 0.0);
    r.baseline_trials = j.value("baseline_trials", std::size_t{0});
    r.scored_targets = j.value("scored_targets", std::size_t{0});
    r.unparseable = j.value("unparseable", std::size_t{0});
    r.failures = j.value("failures", std::size_t{0});
    r.gateway_calls = j.value("gateway_calls", std::size_t{0});
    r.provenance = j.value("provenance", json::object());
    return r;
}

std::string emit_report(std::span<const MetricReport> reports, ReportFormat format) {
    if (reports.empty()) throw ValidationError("emit_report: nothing to report");
    switch (format) {
        case ReportFormat::Json: {
            json arr = json::array();
            for (const auto& r : reports) arr.push_back(report_to_json(r));
            return arr.dump(2) + "\n";
        }
        case ReportFormat::Csv: return emit_csv(reports);
        case ReportFormat::Markdown: return emit_markdown(reports);
    }
    return {};
}

void write_report(std::span<const MetricReport> reports, ReportFormat format, const std::filesystem::path& path) {
    const std::string body = emit_report(reports, format);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write report " + path.string());
    out << body;
    if (!out) throw ValidationError("failed writing report " + path.string());
}

std::vector<MetricReport> load_reports(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw ValidationError("cannot read report " + json_path.string());
    json j = json::parse(in);
    std::vector<MetricReport> out;
    if (j.is_array()) {
        for (const auto& r : j) out.push_back(report_from_json(r));
    } else {
        out.push_back(report_from_json(j));
    }
    return out;
}

}  // namespace humbench
