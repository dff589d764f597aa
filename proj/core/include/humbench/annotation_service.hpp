#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "humbench/codebook.hpp"
#include "humbench/corpus.hpp"
#include "humbench/gold.hpp"

namespace humbench::annotation {

enum class WaveStatus { Open, Reconciling, Closed };

std::string_view to_string(WaveStatus s);
WaveStatus parse_wave_status(std::string_view s);

struct Wave {
    std::string wave_id;
    std::vector<std::string> target_ids;
    std::array<std::string, 2> annotators;
    WaveStatus status = WaveStatus::Open;
    int codebook_version = 1;
    bool blind = true;
    std::uint64_t seed = 0;
    // Per-annotator presentation order (a permutation of target_ids).
    std::map<std::string, std::vector<std::string>> order;
    std::vector<std::string> notes;  // free-text reconciliation notes
};

struct Submission {
    std::string wave_id;
    std::string annotator_id;
    std::string target_id;
    LabelSet labels;
    std::int64_t submitted_at = 0;  // UTC seconds
    std::uint64_t sequence = 0;     // event-log position
};

struct Disagreement {
    std::string target_id;
    LabelSet labels_a;
    LabelSet labels_b;
    std::size_t distance = 0;  // size of the symmetric difference
};

struct WaveStats {
    std::string wave_id;
    int codebook_version = 1;
    std::size_t dually_completed = 0;
    std::map<std::string, double> kappa;
    double average_kappa = 0.0;
    std::map<std::string, std::size_t> agreed;
    std::map<std::string, std::array<std::size_t, 2>> positives;  // per annotator, in wave order
    std::map<std::string, double> completion;                     // annotator -> fraction submitted
    std::vector<Disagreement> disagreements;                      // most labels apart first
};

struct NextItem {
    std::optional<AnnotationTarget> target;  // empty when the annotator is done
    std::size_t pending = 0;
};

struct SubmitAck {
    std::uint64_t sequence = 0;
    std::size_t pending = 0;
    bool superseded = false;
};

struct CreateWaveRequest {
    std::vector<std::string> target_ids;
    std::vector<std::string> annotators;
    std::optional<int> codebook_version;  // default: latest
    bool blind = true;
    std::optional<std::uint64_t> seed;    // default: derived from the wave number
};

struct ServiceOptions {
    // Empty: in-memory only. Otherwise an append-only JSONL event log; a
    // snapshot is kept next to it as "<log>.snapshot".
    std::filesystem::path log_path;
    std::size_t snapshot_every = 0;  // events between snapshots; 0 disables
    std::size_t min_wave_size = 1;
    std::size_t max_wave_size = 1000;
    std::uint64_t seed = 0;
    std::function<std::int64_t()> clock;  // default: system clock
};

// Waves, submissions and codebook revisions as an event-sourced store.
// Every state change is appended to the log before it is applied, so
// replaying the log reproduces the state exactly. Writes are serialized;
// reads share a lock and see a consistent state.
class AnnotationService {
public:
    // Replays an existing log (starting from its snapshot when present).
    AnnotationService(Codebook initial, std::vector<AnnotationTarget> targets, ServiceOptions options = {});
    ~AnnotationService();

    AnnotationService(const AnnotationService&) = delete;
    AnnotationService& operator=(const AnnotationService&) = delete;

    Wave create_wave(const CreateWaveRequest& request);
    SubmitAck submit(const std::string& wave_id, const std::string& annotator, const std::string& target_id,
                     const std::vector<std::string>& labels);
    NextItem next(const std::string& wave_id, const std::string& annotator) const;
    // Throws StateError when nothing is dually completed.
    WaveStats stats(const std::string& wave_id) const;
    // Throws StateError on a blind wave that is still Open.
    std::vector<Disagreement> disagreements(const std::string& wave_id) const;
    // Open -> Reconciling -> Closed; Reconciling may reopen.
    Wave transition(const std::string& wave_id, WaveStatus to);
    void add_note(const std::string& wave_id, const std::string& note);
    // Applies the revisions to the latest codebook. The wave must not be Open.
    RevisionResult revise_codebook(const std::string& wave_id, const std::vector<Revision>& revisions);

    Wave wave(const std::string& wave_id) const;
    std::vector<Wave> waves() const;
    Codebook codebook(int version) const;
    int latest_codebook_version() const;
    std::optional<AnnotationTarget> target(const std::string& target_id) const;
    std::vector<Submission> history(const std::string& wave_id, const std::string& annotator,
                                    const std::string& target_id) const;
    std::vector<nlohmann::json> audit_log() const;

    // Canonical dump of the whole state; equal states dump equal.
    nlohmann::json state_json() const;
    void snapshot();

private:
    struct State;

    std::uint64_t commit(nlohmann::json event);
    void apply(State& s, const nlohmann::json& event) const;
    void load();
    nlohmann::json state_json_locked() const;
    void write_snapshot_locked() const;

    std::vector<AnnotationTarget> target_list_;
    std::map<std::string, std::size_t> target_index_;
    ServiceOptions options_;
    std::unique_ptr<State> state_;
    std::vector<nlohmann::json> events_;
    std::ofstream log_;
    mutable std::shared_mutex mutex_;
};

// Loads a dual-annotated dataset into a fresh in-memory service as one wave
// (annotators "A" and "B") and returns its statistics.
WaveStats replay_as_wave(std::span<const GoldRecord> gold, const Codebook& cb);

nlohmann::json wave_to_json(const Wave& w);
// Redacted stats (blind wave still Open) carry only completion figures.
nlohmann::json stats_to_json(const WaveStats& s, bool redacted = false);
nlohmann::json disagreement_to_json(const Disagreement& d);
nlohmann::json codebook_to_json(const Codebook& cb);
nlohmann::json revision_to_json(const Revision& r);
Revision revision_from_json(const nlohmann::json& j);

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;       // 0 picks a free port
    std::string token;     // when set, every API request needs X-Auth-Token
    std::filesystem::path static_dir;  // console bundle, served at /
};

// Reads HUMBENCH_BIND ("host" or "host:port"), HUMBENCH_PORT and HUMBENCH_TOKEN.
ServerOptions server_options_from_env(ServerOptions defaults = {});

class AnnotationServer {
public:
    AnnotationServer(AnnotationService& service, ServerOptions options);
    ~AnnotationServer();

    // Binds and serves on a background thread; returns the bound port.
    int start();
    // Binds and serves on the calling thread until stop().
    void run();
    void stop();
    int port() const noexcept { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace humbench::annotation
