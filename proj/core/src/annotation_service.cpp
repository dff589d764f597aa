#include "humbench/annotation_service.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <set>

#include "humbench/error.hpp"
#include "humbench/metrics.hpp"
#include "humbench/rng.hpp"
#include "humbench/text.hpp"

namespace humbench::annotation {

using nlohmann::json;

std::string_view to_string(WaveStatus s) {
    switch (s) {
        case WaveStatus::Open: return "open";
        case WaveStatus::Reconciling: return "reconciling";
        case WaveStatus::Closed: return "closed";
    }
    return "open";
}

WaveStatus parse_wave_status(std::string_view s) {
    const std::string v = text::to_lower(s);
    if (v == "open") return WaveStatus::Open;
    if (v == "reconciling") return WaveStatus::Reconciling;
    if (v == "closed") return WaveStatus::Closed;
    throw ValidationError("unknown wave status '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// JSON forms

json wave_to_json(const Wave& w) {
    return {{"wave_id", w.wave_id},
            {"target_ids", w.target_ids},
            {"annotators", {w.annotators[0], w.annotators[1]}},
            {"status", std::string(to_string(w.status))},
            {"codebook_version", w.codebook_version},
            {"blind", w.blind},
            {"seed", w.seed},
            {"order", w.order},
            {"notes", w.notes}};
}

namespace {

Wave wave_from_json(const json& j) {
    Wave w;
    w.wave_id = j.at("wave_id").get<std::string>();
    w.target_ids = j.at("target_ids").get<std::vector<std::string>>();
    const auto ann = j.at("annotators").get<std::vector<std::string>>();
    if (ann.size() != 2) throw IntegrityError("wave " + w.wave_id + " does not have two annotators");
    w.annotators = {ann[0], ann[1]};
    w.status = parse_wave_status(j.at("status").get<std::string>());
    w.codebook_version = j.at("codebook_version").get<int>();
    w.blind = j.at("blind").get<bool>();
    w.seed = j.at("seed").get<std::uint64_t>();
    w.order = j.at("order").get<std::map<std::string, std::vector<std::string>>>();
    w.notes = j.value("notes", std::vector<std::string>{});
    return w;
}

json submission_to_json(const Submission& s) {
    return {{"wave_id", s.wave_id},
            {"annotator", s.annotator_id},
            {"target_id", s.target_id},
            {"labels", s.labels},
            {"at", s.submitted_at},
            {"seq", s.sequence}};
}

Submission submission_from_json(const json& j) {
    Submission s;
    s.wave_id = j.at("wave_id").get<std::string>();
    s.annotator_id = j.at("annotator").get<std::string>();
    s.target_id = j.at("target_id").get<std::string>();
    s.labels = j.at("labels").get<LabelSet>();
    s.submitted_at = j.at("at").get<std::int64_t>();
    s.sequence = j.at("seq").get<std::uint64_t>();
    return s;
}

json label_to_json(const CodebookLabel& l) {
    return {{"name", l.name},
            {"abbrev", l.abbrev},
            {"polarity", std::string(to_string(l.polarity))},
            {"definition", l.definition}};
}

CodebookLabel label_from_json(const json& j) {
    CodebookLabel l;
    l.name = j.at("name").get<std::string>();
    l.abbrev = j.at("abbrev").get<std::string>();
    l.polarity = parse_polarity(j.at("polarity").get<std::string>());
    l.definition = j.at("definition").get<std::string>();
    return l;
}

std::string submission_key(const std::string& wave, const std::string& annotator, const std::string& target) {
    return wave + '\x1f' + annotator + '\x1f' + target;
}

std::int64_t system_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

json stats_to_json(const WaveStats& s, bool redacted) {
    json j{{"wave_id", s.wave_id},
           {"codebook_version", s.codebook_version},
           {"dually_completed", s.dually_completed},
           {"completion", s.completion},
           {"redacted", redacted}};
    if (redacted) return j;
    json labels = json::object();
    for (const auto& [abbrev, k] : s.kappa) {
        const auto& pos = s.positives.at(abbrev);
        labels[abbrev] = {{"kappa", k},
                          {"band", std::string(metrics::interpret_kappa(k))},
                          {"agreed", s.agreed.at(abbrev)},
                          {"positives", {pos[0], pos[1]}}};
    }
    j["labels"] = labels;
    j["average_kappa"] = s.average_kappa;
    json dis = json::array();
    for (const auto& d : s.disagreements) dis.push_back(disagreement_to_json(d));
    j["disagreements"] = dis;
    return j;
}

json disagreement_to_json(const Disagreement& d) {
    return {{"target_id", d.target_id}, {"labels_a", d.labels_a}, {"labels_b", d.labels_b}, {"distance", d.distance}};
}

json revision_to_json(const Revision& r) {
    json j{{"kind", std::string(to_string(r.kind))}, {"affected", r.affected}, {"rationale", r.rationale}};
    if (!r.merge_into.empty()) j["merge_into"] = r.merge_into;
    if (r.added) j["added"] = label_to_json(*r.added);
    if (!r.new_definition.empty()) j["new_definition"] = r.new_definition;
    return j;
}

Revision revision_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("revision must be an object");
    static const std::set<std::string> known = {"kind", "affected", "merge_into", "added", "new_definition",
                                                "rationale"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ValidationError("unknown revision field '" + k + "'");
    }
    Revision r;
    r.kind = parse_revision_kind(j.at("kind").get<std::string>());
    r.affected = j.value("affected", std::vector<std::string>{});
    r.merge_into = j.value("merge_into", std::string());
    if (j.contains("added")) r.added = label_from_json(j.at("added"));
    r.new_definition = j.value("new_definition", std::string());
    r.rationale = j.value("rationale", std::string());
    return r;
}

json codebook_to_json(const Codebook& cb) {
    json labels = json::array();
    for (const auto& l : cb.labels()) labels.push_back(label_to_json(l));
    json changelog = json::array();
    for (const auto& r : cb.changelog()) changelog.push_back(revision_to_json(r));
    return {{"version", cb.version()}, {"labels", labels}, {"changelog", changelog}};
}

// ---------------------------------------------------------------------------

struct AnnotationService::State {
    std::map<int, Codebook> codebooks;
    std::vector<std::string> wave_order;
    std::map<std::string, Wave> waves;
    std::map<std::string, std::string> target_wave;
    std::map<std::string, Submission> live;
    std::vector<Submission> submissions;  // full history, log order
    std::uint64_t seq = 0;

    const Wave& wave(const std::string& id) const {
        auto it = waves.find(id);
        if (it == waves.end()) throw NotFound("no wave '" + id + "'");
        return it->second;
    }
    const Submission* find(const std::string& w, const std::string& a, const std::string& t) const {
        auto it = live.find(submission_key(w, a, t));
        return it == live.end() ? nullptr : &it->second;
    }
    std::size_t pending(const Wave& w, const std::string& annotator) const {
        std::size_t n = 0;
        for (const auto& t : w.target_ids) n += find(w.wave_id, annotator, t) ? 0 : 1;
        return n;
    }
    int latest() const { return codebooks.rbegin()->first; }
};

namespace {

std::size_t annotator_index(const Wave& w, const std::string& annotator) {
    for (std::size_t i = 0; i < 2; ++i) {
        if (w.annotators[i] == annotator) return i;
    }
    throw ValidationError("annotator '" + annotator + "' is not assigned to wave " + w.wave_id);
}

}  // namespace

AnnotationService::AnnotationService(Codebook initial, std::vector<AnnotationTarget> targets, ServiceOptions options)
    : target_list_(std::move(targets)), options_(std::move(options)), state_(std::make_unique<State>()) {
    for (std::size_t i = 0; i < target_list_.size(); ++i) {
        if (!target_index_.emplace(target_list_[i].target_id, i).second) {
            throw ValidationError("duplicate target id " + target_list_[i].target_id);
        }
    }
    if (!options_.clock) options_.clock = system_seconds;
    if (options_.min_wave_size == 0 || options_.min_wave_size > options_.max_wave_size) {
        throw ValidationError("wave size limits must satisfy 1 <= min <= max");
    }
    const int v = initial.version();
    state_->codebooks.emplace(v, std::move(initial));
    if (!options_.log_path.empty()) load();
}

AnnotationService::~AnnotationService() = default;

void AnnotationService::load() {
    const auto& path = options_.log_path;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

    std::uint64_t snap_seq = 0;
    auto snap_path = path;
    snap_path += ".snapshot";
    if (std::filesystem::exists(snap_path) && std::filesystem::exists(path)) {
        std::ifstream in(snap_path);
        json snap = json::parse(in);
        snap_seq = snap.at("seq").get<std::uint64_t>();
        const json& st = snap.at("state");
        State s;
        for (const auto& [v, yaml] : st.at("codebooks").items()) {
            s.codebooks.emplace(std::stoi(v), parse_codebook(yaml.get<std::string>()));
        }
        for (const auto& wj : st.at("waves")) {
            Wave w = wave_from_json(wj);
            for (const auto& t : w.target_ids) s.target_wave[t] = w.wave_id;
            s.wave_order.push_back(w.wave_id);
            s.waves.emplace(w.wave_id, std::move(w));
        }
        // History is in log order, so the last entry per key is the live one.
        for (const auto& sj : st.at("submissions")) {
            Submission sub = submission_from_json(sj);
            s.live[submission_key(sub.wave_id, sub.annotator_id, sub.target_id)] = sub;
            s.submissions.push_back(std::move(sub));
        }
        s.seq = snap_seq;
        *state_ = std::move(s);
    }

    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) {
            if (!text::trim(line).empty()) lines.push_back(line);
        }
        for (std::size_t i = 0; i < lines.size(); ++i) {
            json ev;
            try {
                ev = json::parse(lines[i]);
            } catch (const json::exception&) {
                // A torn final write is dropped; anything earlier is corruption.
                if (i + 1 == lines.size()) break;
                throw IntegrityError("event log " + path.string() + " is corrupt at line " + std::to_string(i + 1));
            }
            const auto seq = ev.at("seq").get<std::uint64_t>();
            if (seq != events_.size() + 1) {
                throw IntegrityError("event log " + path.string() + " is out of sequence at line " +
                                     std::to_string(i + 1));
            }
            events_.push_back(ev);
            if (seq > snap_seq) apply(*state_, ev);
        }
        if (snap_seq > events_.size()) throw IntegrityError("snapshot is ahead of the event log");
    }
    log_.open(path, std::ios::app | std::ios::binary);
    if (!log_) throw ValidationError("cannot open event log " + path.string());
}

std::uint64_t AnnotationService::commit(json event) {
    const std::uint64_t seq = state_->seq + 1;
    event["seq"] = seq;
    event["at"] = options_.clock();
    if (log_.is_open()) {
        log_ << event.dump() << '\n';
        log_.flush();
        if (!log_) throw Error("failed to append to the event log");
    }
    events_.push_back(event);
    apply(*state_, event);
    if (options_.snapshot_every > 0 && !options_.log_path.empty() && seq % options_.snapshot_every == 0) {
        write_snapshot_locked();
    }
    return seq;
}

void AnnotationService::apply(State& s, const json& ev) const {
    const std::string type = ev.at("type").get<std::string>();
    const std::uint64_t seq = ev.at("seq").get<std::uint64_t>();
    if (type == "wave_created") {
        Wave w = wave_from_json(ev.at("wave"));
        for (const auto& t : w.target_ids) s.target_wave[t] = w.wave_id;
        s.wave_order.push_back(w.wave_id);
        s.waves.emplace(w.wave_id, std::move(w));
    } else if (type == "submission") {
        Submission sub;
        sub.wave_id = ev.at("wave_id").get<std::string>();
        sub.annotator_id = ev.at("annotator").get<std::string>();
        sub.target_id = ev.at("target_id").get<std::string>();
        sub.labels = ev.at("labels").get<LabelSet>();
        sub.submitted_at = ev.at("at").get<std::int64_t>();
        sub.sequence = seq;
        s.live[submission_key(sub.wave_id, sub.annotator_id, sub.target_id)] = sub;
        s.submissions.push_back(std::move(sub));
    } else if (type == "transition") {
        s.waves.at(ev.at("wave_id").get<std::string>()).status = parse_wave_status(ev.at("to").get<std::string>());
    } else if (type == "note") {
        s.waves.at(ev.at("wave_id").get<std::string>()).notes.push_back(ev.at("note").get<std::string>());
    } else if (type == "revision") {
        std::vector<Revision> revs;
        for (const auto& r : ev.at("revisions")) revs.push_back(revision_from_json(r));
        auto result = apply_revisions(s.codebooks.at(s.latest()), revs);
        const int v = result.codebook.version();
        s.codebooks.emplace(v, std::move(result.codebook));
    } else {
        throw IntegrityError("unknown event type '" + type + "'");
    }
    s.seq = seq;
}

Wave AnnotationService::create_wave(const CreateWaveRequest& req) {
    std::unique_lock lock(mutex_);
    auto& s = *state_;
    std::set<std::string> annotators(req.annotators.begin(), req.annotators.end());
    if (req.annotators.size() != 2 || annotators.size() != 2 || annotators.count("")) {
        throw ValidationError("a wave needs exactly two distinct annotators");
    }
    const std::size_t n = req.target_ids.size();
    if (n < options_.min_wave_size || n > options_.max_wave_size) {
        throw ValidationError("wave size " + std::to_string(n) + " is outside [" +
                              std::to_string(options_.min_wave_size) + ", " + std::to_string(options_.max_wave_size) +
                              "]");
    }
    std::set<std::string> seen;
    for (const auto& t : req.target_ids) {
        if (!target_index_.count(t)) throw NotFound("unknown target '" + t + "'");
        if (!seen.insert(t).second) throw ValidationError("target '" + t + "' listed twice");
        if (auto it = s.target_wave.find(t); it != s.target_wave.end()) {
            throw StateError("target '" + t + "' is already in wave " + it->second);
        }
    }
    const int version = req.codebook_version.value_or(s.latest());
    if (!s.codebooks.count(version)) throw NotFound("no codebook version " + std::to_string(version));

    Wave w;
    const std::uint64_t number = s.wave_order.size() + 1;
    w.wave_id = "w" + std::to_string(number);
    w.target_ids = req.target_ids;
    w.annotators = {req.annotators[0], req.annotators[1]};
    w.codebook_version = version;
    w.blind = req.blind;
    w.seed = req.seed.value_or(splitmix64(options_.seed ^ number));
    for (std::size_t i = 0; i < 2; ++i) {
        auto order = w.target_ids;
        Rng::derive(w.seed, i).shuffle(std::span<std::string>(order));
        w.order[w.annotators[i]] = std::move(order);
    }
    commit({{"type", "wave_created"}, {"wave", wave_to_json(w)}});
    return w;
}

SubmitAck AnnotationService::submit(const std::string& wave_id, const std::string& annotator,
                                    const std::string& target_id, const std::vector<std::string>& labels) {
    std::unique_lock lock(mutex_);
    const auto& s = *state_;
    const Wave& w = s.wave(wave_id);
    if (w.status != WaveStatus::Open) {
        throw StateError("wave " + wave_id + " is " + std::string(to_string(w.status)) + "; submissions are closed");
    }
    annotator_index(w, annotator);
    if (std::find(w.target_ids.begin(), w.target_ids.end(), target_id) == w.target_ids.end()) {
        throw ValidationError("target '" + target_id + "' is not in wave " + wave_id);
    }
    const Codebook& cb = s.codebooks.at(w.codebook_version);
    LabelSet set;
    for (const auto& raw : labels) {
        const std::string l = text::trim(raw);
        const CodebookLabel* found = cb.find(l);
        if (!found) found = cb.find_by_name(l);
        if (!found) {
            throw ValidationError("label '" + l + "' is not in codebook version " +
                                  std::to_string(w.codebook_version));
        }
        set.insert(found->abbrev);
    }
    SubmitAck ack;
    ack.superseded = s.find(wave_id, annotator, target_id) != nullptr;
    ack.sequence = commit(
        {{"type", "submission"}, {"wave_id", wave_id}, {"annotator", annotator}, {"target_id", target_id},
         {"labels", set}});
    ack.pending = state_->pending(state_->wave(wave_id), annotator);
    return ack;
}

NextItem AnnotationService::next(const std::string& wave_id, const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    const auto& s = *state_;
    const Wave& w = s.wave(wave_id);
    annotator_index(w, annotator);
    NextItem out;
    out.pending = s.pending(w, annotator);
    if (w.status != WaveStatus::Open) return out;
    for (const auto& t : w.order.at(annotator)) {
        if (!s.find(wave_id, annotator, t)) {
            out.target = target_list_[target_index_.at(t)];
            break;
        }
    }
    return out;
}

WaveStats AnnotationService::stats(const std::string& wave_id) const {
    std::shared_lock lock(mutex_);
    const auto& s = *state_;
    const Wave& w = s.wave(wave_id);
    const Codebook& cb = s.codebooks.at(w.codebook_version);

    WaveStats st;
    st.wave_id = wave_id;
    st.codebook_version = w.codebook_version;
    for (const auto& a : w.annotators) {
        st.completion[a] = static_cast<double>(w.target_ids.size() - s.pending(w, a)) /
                           static_cast<double>(w.target_ids.size());
    }
    std::vector<std::pair<const Submission*, const Submission*>> both;
    for (const auto& t : w.target_ids) {
        const auto* a = s.find(wave_id, w.annotators[0], t);
        const auto* b = s.find(wave_id, w.annotators[1], t);
        if (a && b) both.emplace_back(a, b);
    }
    if (both.empty()) throw StateError("insufficient overlap: no target in wave " + wave_id + " is dually completed");
    st.dually_completed = both.size();

    for (const auto& l : cb.labels()) {
        std::vector<bool> va, vb;
        std::size_t agreed = 0;
        for (const auto& [a, b] : both) {
            va.push_back(a->labels.count(l.abbrev) > 0);
            vb.push_back(b->labels.count(l.abbrev) > 0);
            agreed += (va.back() && vb.back()) ? 1 : 0;
        }
        st.kappa[l.abbrev] = metrics::cohen_kappa(va, vb);
        st.agreed[l.abbrev] = agreed;
        st.positives[l.abbrev] = {static_cast<std::size_t>(std::count(va.begin(), va.end(), true)),
                                  static_cast<std::size_t>(std::count(vb.begin(), vb.end(), true))};
    }
    st.average_kappa = metrics::average_kappa(st.kappa);

    for (const auto& [a, b] : both) {
        if (a->labels == b->labels) continue;
        Disagreement d{a->target_id, a->labels, b->labels, 0};
        for (const auto& l : a->labels) d.distance += b->labels.count(l) ? 0 : 1;
        for (const auto& l : b->labels) d.distance += a->labels.count(l) ? 0 : 1;
        st.disagreements.push_back(std::move(d));
    }
    std::stable_sort(st.disagreements.begin(), st.disagreements.end(), [](const auto& x, const auto& y) {
        if (x.distance != y.distance) return x.distance > y.distance;
        return x.target_id < y.target_id;
    });
    return st;
}

std::vector<Disagreement> AnnotationService::disagreements(const std::string& wave_id) const {
    {
        std::shared_lock lock(mutex_);
        const Wave& w = state_->wave(wave_id);
        if (w.blind && w.status == WaveStatus::Open) {
            throw StateError("wave " + wave_id + " is blind and still open; disagreements are hidden");
        }
    }
    try {
        return stats(wave_id).disagreements;
    } catch (const StateError&) {
        return {};
    }
}

Wave AnnotationService::transition(const std::string& wave_id, WaveStatus to) {
    std::unique_lock lock(mutex_);
    const Wave& w = state_->wave(wave_id);
    const WaveStatus from = w.status;
    const bool ok = (from == WaveStatus::Open && to == WaveStatus::Reconciling) ||
                    (from == WaveStatus::Reconciling && (to == WaveStatus::Closed || to == WaveStatus::Open));
    if (!ok) {
        throw StateError("wave " + wave_id + " cannot move from " + std::string(to_string(from)) + " to " +
                         std::string(to_string(to)));
    }
    commit({{"type", "transition"}, {"wave_id", wave_id}, {"to", std::string(to_string(to))}});
    return state_->wave(wave_id);
}

void AnnotationService::add_note(const std::string& wave_id, const std::string& note) {
    std::unique_lock lock(mutex_);
    const Wave& w = state_->wave(wave_id);
    if (w.status == WaveStatus::Open) throw StateError("reconciliation notes need a wave that is no longer open");
    if (text::trim(note).empty()) throw ValidationError("empty note");
    commit({{"type", "note"}, {"wave_id", wave_id}, {"note", note}});
}

RevisionResult AnnotationService::revise_codebook(const std::string& wave_id, const std::vector<Revision>& revisions) {
    std::unique_lock lock(mutex_);
    const Wave& w = state_->wave(wave_id);
    if (w.status == WaveStatus::Open) {
        throw StateError("wave " + wave_id + " is open; close annotation before revising the codebook");
    }
    auto result = apply_revisions(state_->codebooks.at(state_->latest()), revisions);
    json revs = json::array();
    for (const auto& r : revisions) revs.push_back(revision_to_json(r));
    commit({{"type", "revision"}, {"wave_id", wave_id}, {"revisions", revs}});
    return result;
}

Wave AnnotationService::wave(const std::string& wave_id) const {
    std::shared_lock lock(mutex_);
    return state_->wave(wave_id);
}

std::vector<Wave> AnnotationService::waves() const {
    std::shared_lock lock(mutex_);
    std::vector<Wave> out;
    for (const auto& id : state_->wave_order) out.push_back(state_->waves.at(id));
    return out;
}

Codebook AnnotationService::codebook(int version) const {
    std::shared_lock lock(mutex_);
    auto it = state_->codebooks.find(version);
    if (it == state_->codebooks.end()) throw NotFound("no codebook version " + std::to_string(version));
    return it->second;
}

int AnnotationService::latest_codebook_version() const {
    std::shared_lock lock(mutex_);
    return state_->latest();
}

std::optional<AnnotationTarget> AnnotationService::target(const std::string& target_id) const {
    auto it = target_index_.find(target_id);
    if (it == target_index_.end()) return std::nullopt;
    return target_list_[it->second];
}

std::vector<Submission> AnnotationService::history(const std::string& wave_id, const std::string& annotator,
                                                   const std::string& target_id) const {
    std::shared_lock lock(mutex_);
    std::vector<Submission> out;
    for (const auto& s : state_->submissions) {
        if (s.wave_id == wave_id && s.annotator_id == annotator && s.target_id == target_id) out.push_back(s);
    }
    return out;
}

std::vector<json> AnnotationService::audit_log() const {
    std::shared_lock lock(mutex_);
    return events_;
}

json AnnotationService::state_json_locked() const {
    const auto& s = *state_;
    json codebooks = json::object();
    for (const auto& [v, cb] : s.codebooks) codebooks[std::to_string(v)] = codebook_to_yaml(cb);
    json waves = json::array();
    for (const auto& id : s.wave_order) waves.push_back(wave_to_json(s.waves.at(id)));
    json subs = json::array();
    for (const auto& sub : s.submissions) subs.push_back(submission_to_json(sub));
    return {{"codebooks", codebooks}, {"waves", waves}, {"submissions", subs}, {"seq", s.seq}};
}

json AnnotationService::state_json() const {
    std::shared_lock lock(mutex_);
    return state_json_locked();
}

void AnnotationService::snapshot() {
    std::unique_lock lock(mutex_);
    if (options_.log_path.empty()) throw StateError("snapshots need an event log path");
    write_snapshot_locked();
}

void AnnotationService::write_snapshot_locked() const {
    auto snap_path = options_.log_path;
    snap_path += ".snapshot";
    auto tmp = snap_path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << json{{"seq", state_->seq}, {"state", state_json_locked()}}.dump();
        if (!out) throw Error("failed to write snapshot " + tmp.string());
    }
    std::filesystem::rename(tmp, snap_path);
}

WaveStats replay_as_wave(std::span<const GoldRecord> gold, const Codebook& cb) {
    std::vector<AnnotationTarget> targets;
    CreateWaveRequest req;
    req.annotators = {"A", "B"};
    for (const auto& g : gold) {
        targets.push_back(g.target);
        req.target_ids.push_back(g.target.target_id);
    }
    ServiceOptions opt;
    opt.max_wave_size = std::max<std::size_t>(gold.size(), 1);
    opt.clock = [] { return std::int64_t{0}; };
    AnnotationService service(cb, std::move(targets), opt);
    const Wave w = service.create_wave(req);
    for (const auto& g : gold) {
        service.submit(w.wave_id, "A", g.target.target_id, {g.labels_a.begin(), g.labels_a.end()});
        service.submit(w.wave_id, "B", g.target.target_id, {g.labels_b.begin(), g.labels_b.end()});
    }
    return service.stats(w.wave_id);
}

}  // namespace humbench::annotation
