#include "humbench/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "humbench/error.hpp"
#include "humbench/gold.hpp"
#include "humbench/rng.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

namespace {

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ValidationError(std::string("missing or non-string field '") + key + "'");
    return j.at(key).get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    return j.at(key).get<std::string>();
}

}  // namespace

Thread thread_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("thread record must be an object");
    Thread t;
    t.subreddit = required_string(j, "subreddit");
    t.post_id = required_string(j, "post_id");
    t.author_id = optional_string(j, "author_id");
    t.title = required_string(j, "title");
    t.submission_text = required_string(j, "submission_text");
    if (j.contains("created_at")) t.created_at = j.at("created_at").get<std::int64_t>();
    if (t.post_id.empty()) throw ValidationError("empty post_id");
    if (j.contains("comments")) {
        const auto& cs = j.at("comments");
        if (!cs.is_array()) throw ValidationError("'comments' must be an array");
        int expected = 1;
        for (const auto& c : cs) {
            Comment cm;
            cm.comment_id = optional_string(c, "comment_id");
            cm.author_id = optional_string(c, "author_id");
            cm.body = required_string(c, "body");
            cm.position = c.contains("position") ? c.at("position").get<int>() : expected;
            if (cm.position != expected)
                throw ValidationError("comment positions must be 1-based and contiguous");
            ++expected;
            t.comments.push_back(std::move(cm));
        }
    }
    return t;
}

json thread_to_json(const Thread& t) {
    json comments = json::array();
    for (const auto& c : t.comments) {
        comments.push_back({{"comment_id", c.comment_id},
                            {"author_id", c.author_id},
                            {"body", c.body},
                            {"position", c.position}});
    }
    return json{{"subreddit", t.subreddit},
                {"post_id", t.post_id},
                {"author_id", t.author_id},
                {"title", t.title},
                {"submission_text", t.submission_text},
                {"created_at", t.created_at},
                {"comments", std::move(comments)}};
}

ThreadStore ingest_jsonl(std::istream& in) {
    ThreadStore store;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            Thread t = thread_from_json(json::parse(line));
            if (!seen.insert(t.post_id).second) throw ValidationError("duplicate post_id '" + t.post_id + "'");
            store.threads.push_back(std::move(t));
        } catch (const std::exception& e) {
            ++store.skipped;
            store.warnings.push_back("line " + std::to_string(lineno) + ": skipped (" + e.what() + ")");
        }
    }
    return store;
}

ThreadStore ingest_dump(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read thread dump " + path.string());
    return ingest_jsonl(in);
}

void write_threads(const ThreadStore& store, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    for (const auto& t : store.threads) out << thread_to_json(t).dump() << '\n';
}

// ---------------------------------------------------------------------------

void ActivityTable::add(const std::string& author, const std::string& subreddit, std::int64_t count) {
    if (count < 0) throw ValidationError("negative contribution count for " + author);
    counts_[author][subreddit] += count;
}

std::int64_t ActivityTable::count(const std::string& author, const std::string& subreddit) const {
    auto a = counts_.find(author);
    if (a == counts_.end()) return 0;
    auto s = a->second.find(subreddit);
    return s == a->second.end() ? 0 : s->second;
}

bool ActivityTable::exceeds(const std::string& author, std::int64_t cap) const {
    auto a = counts_.find(author);
    if (a == counts_.end()) return false;
    return std::any_of(a->second.begin(), a->second.end(), [cap](const auto& kv) { return kv.second > cap; });
}

ActivityTable load_activity(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read activity file " + path.string());
    ActivityTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
        auto fields = text::split(line, delim);
        if (fields.size() != 3) throw ValidationError("activity line " + std::to_string(lineno) + ": expected 3 fields");
        std::int64_t count = 0;
        try {
            std::size_t used = 0;
            count = std::stoll(text::trim(fields[2]), &used);
            if (used != text::trim(fields[2]).size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw ValidationError("activity line " + std::to_string(lineno) + ": bad count");
        }
        table.add(text::trim(fields[0]), text::trim(fields[1]), count);
    }
    return table;
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::vector<const Thread*>> by_subreddit(const std::vector<Thread>& threads) {
    std::map<std::string, std::vector<const Thread*>> groups;
    for (const auto& t : threads) groups[t.subreddit].push_back(&t);
    return groups;
}

}  // namespace

ThreadStore sample_threads(const ThreadStore& store, const ActivityTable& activity, const SampleOptions& opt) {
    if (opt.max_posts_per_subreddit < 1) throw ValidationError("max_posts_per_subreddit must be >= 1");
    if (opt.activity_cap < 0) throw ValidationError("activity_cap must be >= 0");
    ThreadStore out;
    Rng rng(opt.seed);
    for (const auto& [sub, threads] : by_subreddit(store.threads)) {
        std::vector<const Thread*> eligible;
        for (const Thread* t : threads) {
            if (!activity.exceeds(t->author_id, opt.activity_cap)) eligible.push_back(t);
        }
        auto picks = rng.sample_indices(eligible.size(), static_cast<std::size_t>(opt.max_posts_per_subreddit));
        for (std::size_t i : picks) out.threads.push_back(*eligible[i]);
    }
    return out;
}

bool is_placeholder_body(const std::string& body) {
    const std::string t = text::trim(body);
    return t.empty() || t == "[deleted]" || t == "[removed]";
}

std::string AnnotationTarget::context_text() const {
    std::string out = title;
    out += "\n\n";
    out += submission_text;
    if (position == TargetPosition::Second) {
        out += "\n\n";
        out += first_comment;
    }
    return out;
}

TargetBuild build_targets(const ThreadStore& store, const TargetOptions& opt) {
    if (opt.max_per_subreddit < 1) throw ValidationError("max_per_subreddit must be >= 1");
    TargetBuild out;
    Rng rng(opt.seed);
    for (const auto& [sub, threads] : by_subreddit(store.threads)) {
        std::vector<const Thread*> usable;
        for (const Thread* t : threads) {
            if (t->comments.empty()) {
                out.warnings.push_back("thread " + t->post_id + " has no comments; excluded");
            } else if (is_placeholder_body(t->comments.front().body)) {
                out.warnings.push_back("thread " + t->post_id + " has a deleted or empty first comment; excluded");
            } else {
                usable.push_back(t);
            }
        }
        auto picks = rng.sample_indices(usable.size(), static_cast<std::size_t>(opt.max_per_subreddit));
        for (std::size_t i : picks) {
            const Thread& t = *usable[i];
            // Draw the coin for every thread so one thread's comment count
            // never shifts the draws of the threads after it.
            const bool coin_second = rng.coin();
            const bool second_ok = t.comments.size() >= 2 && !is_placeholder_body(t.comments[1].body);
            AnnotationTarget a;
            a.subreddit = t.subreddit;
            a.thread_ref = t.post_id;
            a.title = t.title;
            a.submission_text = t.submission_text;
            if (coin_second && second_ok) {
                a.position = TargetPosition::Second;
                a.first_comment = t.comments[0].body;
                a.target_text = t.comments[1].body;
            } else {
                a.position = TargetPosition::First;
                a.target_text = t.comments[0].body;
            }
            a.target_id = t.post_id + (a.position == TargetPosition::First ? "#1" : "#2");
            out.targets.push_back(std::move(a));
        }
    }
    return out;
}

json target_to_json(const AnnotationTarget& t) {
    json j{{"target_id", t.target_id},
           {"subreddit", t.subreddit},
           {"post_id", t.thread_ref},
           {"target_position", t.position == TargetPosition::First ? "first" : "second"},
           {"title", t.title},
           {"submission_text", t.submission_text},
           {"target_text", t.target_text}};
    if (t.position == TargetPosition::Second) j["first_comment"] = t.first_comment;
    return j;
}

AnnotationTarget target_from_json(const json& j) {
    AnnotationTarget t;
    t.target_id = required_string(j, "target_id");
    t.subreddit = optional_string(j, "subreddit");
    t.thread_ref = optional_string(j, "post_id");
    const std::string pos = text::to_lower(optional_string(j, "target_position"));
    if (pos.empty() || pos == "first" || pos == "1") {
        t.position = TargetPosition::First;
    } else if (pos == "second" || pos == "2") {
        t.position = TargetPosition::Second;
    } else {
        throw ValidationError("target " + t.target_id + ": bad target_position '" + pos + "'");
    }
    t.title = optional_string(j, "title");
    t.submission_text = optional_string(j, "submission_text");
    t.target_text = required_string(j, "target_text");
    if (t.position == TargetPosition::Second) t.first_comment = required_string(j, "first_comment");
    return t;
}

std::vector<AnnotationTarget> load_targets(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read targets file " + path.string());
    std::vector<AnnotationTarget> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(target_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ValidationError("targets line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_targets(std::span<const AnnotationTarget> targets, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    for (const auto& t : targets) out << target_to_json(t).dump() << '\n';
}

// ---------------------------------------------------------------------------

Moments moments(std::span<const double> values) {
    if (values.empty()) throw ValidationError("moments of an empty sample");
    // Sort first so the floating-point sum does not depend on input order.
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return Moments{mean, std::sqrt(ss / static_cast<double>(v.size())), v.back()};
}

DescriptiveStats describe(std::span<const GoldRecord> dataset) {
    if (dataset.empty()) throw ValidationError("describe: empty dataset");
    std::vector<double> labels, cw, cs, tw, ts;
    for (const auto& r : dataset) {
        LabelSet uni = r.labels_a;
        uni.insert(r.labels_b.begin(), r.labels_b.end());
        labels.push_back(static_cast<double>(uni.size()));
        const std::string ctx = r.target.context_text();
        cw.push_back(static_cast<double>(text::count_words(ctx)));
        cs.push_back(static_cast<double>(text::count_sentences(ctx)));
        tw.push_back(static_cast<double>(text::count_words(r.target.target_text)));
        ts.push_back(static_cast<double>(text::count_sentences(r.target.target_text)));
    }
    return DescriptiveStats{moments(labels), moments(cw), moments(cs), moments(tw), moments(ts), dataset.size()};
}

json stats_to_json(const DescriptiveStats& s) {
    auto m = [](const Moments& x) { return json{{"mean", x.mean}, {"std", x.std}, {"max", x.max}}; };
    return json{{"records", s.records},
                {"unique_labels", m(s.unique_labels)},
                {"context_words", m(s.context_words)},
                {"context_sentences", m(s.context_sentences)},
                {"target_words", m(s.target_words)},
                {"target_sentences", m(s.target_sentences)}};
}

}  // namespace humbench
