#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "humbench/prompt.hpp"

namespace humbench {

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t total_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

struct ChatRequest {
    std::string model_id;
    Conversation messages;
    double temperature = 0.0;
    std::optional<int> max_tokens;

    void validate() const;  // non-empty model, well-formed conversation, temperature 0
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
    std::int64_t latency_ms = 0;
    nlohmann::json provider_meta = nlohmann::json::object();
};

struct CacheEntry {
    std::string key;
    nlohmann::json request;  // canonical form, kept for auditing
    ChatResponse response;
    std::string recorded_at;  // ISO-8601 UTC
};

// Canonical JSON of the fields that identify a request. Object keys are
// emitted sorted, so serialization order never affects the digest.
nlohmann::json canonical_request(const ChatRequest& r);
// Hex SHA-256 of the canonical request.
std::string cache_key(const ChatRequest& r);

nlohmann::json response_to_json(const ChatResponse& r);
ChatResponse response_from_json(const nlohmann::json& j);
nlohmann::json entry_to_json(const CacheEntry& e);
CacheEntry entry_from_json(const nlohmann::json& j);

// Cache files are JSONL: a header line {"humbench_cache": 1} followed by one
// entry per line. Header lines may reappear mid-file, so files concatenate.
// The first entry for a key wins; later duplicates are ignored.
class ResponseCache {
public:
    static constexpr int kFormatVersion = 1;

    ResponseCache() = default;
    // Loads `path` if it exists; appends go to the same file.
    explicit ResponseCache(std::filesystem::path path);

    std::optional<ChatResponse> find(const std::string& key) const;
    // Returns false when the key was already present (nothing written).
    bool append(const CacheEntry& entry);
    std::size_t size() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    // Immutable after construction; read without locking.
    std::map<std::string, ChatResponse> snapshot_;
    mutable std::mutex delta_mutex_;
    std::map<std::string, ChatResponse> delta_;
    std::ofstream writer_;
};

// Provider round-trip. Implementations throw TransportError; status 0 means
// the request never produced an HTTP status (DNS, connect, timeout).
class Transport {
public:
    virtual ~Transport() = default;
    virtual ChatResponse send(const ChatRequest& request, std::chrono::milliseconds timeout) = 0;
};

// Chat-completions style JSON over HTTP(S).
struct HttpTransportConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string api_key;

    // HUMBENCH_API_KEY (required), HUMBENCH_BASE_URL, HUMBENCH_API_PATH.
    static HttpTransportConfig from_env();
};

std::shared_ptr<Transport> make_http_transport(HttpTransportConfig config);

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    double max_jitter = 0.10;  // fraction of each backoff step
};

// 408, 429, 5xx and status-less failures are retried.
bool is_retryable(int status);

// Delays slept before attempts 2..max_attempts.
std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy, std::uint64_t seed);

enum class GatewayMode { Live, Record, Replay };

std::string_view to_string(GatewayMode m);
GatewayMode parse_gateway_mode(std::string_view s);

struct GatewayConfig {
    std::string model_id;
    GatewayMode mode = GatewayMode::Replay;
    std::filesystem::path cache_path;  // required for Record and Replay
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds timeout{120000};
    RetryPolicy retry;
    std::optional<int> max_tokens;
    std::uint64_t jitter_seed = 0;
};

struct GatewayStats {
    std::size_t calls = 0;
    std::size_t dials = 0;  // transport round-trips, retries included
    std::size_t cache_hits = 0;
    std::size_t recorded = 0;
    std::size_t peak_in_flight = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

class Gateway {
public:
    // transport may be null for Replay.
    Gateway(GatewayConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper = {});

    ChatResponse complete(const ChatRequest& request);
    ChatResponse complete(const ChatRequest& request, GatewayMode mode);
    // Wraps the conversation into a request using the configured model.
    ChatResponse complete(const Conversation& messages);

    ChatRequest make_request(const Conversation& messages) const;

    const GatewayConfig& config() const noexcept { return config_; }
    GatewayStats stats() const;
    // Digest of the cache file contents at construction (empty if absent).
    const std::string& cache_digest() const noexcept { return cache_digest_; }

private:
    ChatResponse round_trip(const ChatRequest& request);
    void acquire();
    void release();

    GatewayConfig config_;
    std::shared_ptr<Transport> transport_;
    Sleeper sleeper_;
    std::unique_ptr<ResponseCache> cache_;
    std::string cache_digest_;

    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;

    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> dials_{0};
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> recorded_{0};
    std::atomic<std::size_t> peak_{0};
    std::atomic<std::uint64_t> retry_stream_{0};
};

// Hex SHA-256 of a file's bytes, or empty when the file does not exist.
std::string file_digest(const std::filesystem::path& path);

}  // namespace humbench
