#include "humbench/gateway.hpp"

#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <thread>

#include "humbench/error.hpp"
#include "humbench/rng.hpp"
#include "humbench/sha256.hpp"
#include "humbench/text.hpp"

namespace humbench {

using nlohmann::json;

void ChatRequest::validate() const {
    if (model_id.empty()) throw ValidationError("request has no model_id");
    if (temperature != 0.0) throw ValidationError("temperature is fixed at 0");
    if (max_tokens && *max_tokens <= 0) throw ValidationError("max_tokens must be positive");
    messages.validate();
}

json canonical_request(const ChatRequest& r) {
    json j;
    j["v"] = 1;
    j["model_id"] = r.model_id;
    j["messages"] = conversation_to_json(r.messages);
    j["temperature"] = r.temperature;
    j["max_tokens"] = r.max_tokens ? json(*r.max_tokens) : json(nullptr);
    return j;
}

std::string cache_key(const ChatRequest& r) { return sha256_hex(canonical_request(r).dump()); }

json response_to_json(const ChatResponse& r) {
    return {{"text", r.text},
            {"usage",
             {{"prompt_tokens", r.usage.prompt_tokens},
              {"completion_tokens", r.usage.completion_tokens},
              {"total_tokens", r.usage.total_tokens}}},
            {"latency_ms", r.latency_ms},
            {"provider_meta", r.provider_meta}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    if (auto u = j.find("usage"); u != j.end()) {
        r.usage.prompt_tokens = u->value("prompt_tokens", std::int64_t{0});
        r.usage.completion_tokens = u->value("completion_tokens", std::int64_t{0});
        r.usage.total_tokens = u->value("total_tokens", std::int64_t{0});
    }
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.provider_meta = j.value("provider_meta", json::object());
    return r;
}

json entry_to_json(const CacheEntry& e) {
    return {{"key", e.key}, {"request", e.request}, {"response", response_to_json(e.response)},
            {"recorded_at", e.recorded_at}};
}

CacheEntry entry_from_json(const json& j) {
    CacheEntry e;
    e.key = j.at("key").get<std::string>();
    e.request = j.value("request", json());
    e.response = response_from_json(j.at("response"));
    e.recorded_at = j.value("recorded_at", std::string());
    return e;
}

// ---------------------------------------------------------------------------

namespace {

json cache_header() { return {{"humbench_cache", ResponseCache::kFormatVersion}}; }

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_);
        if (!in) throw ValidationError("cannot read cache file " + path_.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw ValidationError(path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
            if (j.contains("humbench_cache")) {
                if (j["humbench_cache"] != kFormatVersion)
                    throw ValidationError(path_.string() + ": unsupported cache format version");
                continue;
            }
            CacheEntry e = entry_from_json(j);
            snapshot_.emplace(e.key, std::move(e.response));
        }
    }
}

std::optional<ChatResponse> ResponseCache::find(const std::string& key) const {
    if (auto it = snapshot_.find(key); it != snapshot_.end()) return it->second;
    std::lock_guard lock(delta_mutex_);
    if (auto it = delta_.find(key); it != delta_.end()) return it->second;
    return std::nullopt;
}

bool ResponseCache::append(const CacheEntry& entry) {
    if (snapshot_.count(entry.key)) return false;
    std::lock_guard lock(delta_mutex_);
    if (!delta_.emplace(entry.key, entry.response).second) return false;
    if (path_.empty()) return true;
    if (!writer_.is_open()) {
        const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        writer_.open(path_, std::ios::app);
        if (!writer_) throw ValidationError("cannot write cache file " + path_.string());
        if (fresh) writer_ << cache_header().dump() << '\n';
    }
    writer_ << entry_to_json(entry).dump() << '\n';
    writer_.flush();
    return true;
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(delta_mutex_);
    return snapshot_.size() + delta_.size();
}

// ---------------------------------------------------------------------------

bool is_retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy, std::uint64_t seed) {
    if (policy.max_attempts < 1 || policy.max_attempts > 5)
        throw ValidationError("retry policy allows 1 to 5 attempts");
    if (policy.max_jitter < 0.0 || policy.max_jitter > 0.10)
        throw ValidationError("retry jitter must be within 10% of the backoff");
    std::vector<std::chrono::milliseconds> out;
    Rng rng(seed);
    double step = static_cast<double>(policy.base.count());
    for (int i = 1; i < policy.max_attempts; ++i) {
        const double jitter = step * policy.max_jitter * rng.uniform01();
        out.emplace_back(static_cast<std::int64_t>(std::floor(step + jitter)));
        step *= policy.factor;
    }
    return out;
}

std::string_view to_string(GatewayMode m) {
    switch (m) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Record: return "record";
        case GatewayMode::Replay: return "replay";
    }
    return "?";
}

GatewayMode parse_gateway_mode(std::string_view s) {
    const std::string v = text::to_lower(s);
    if (v == "live") return GatewayMode::Live;
    if (v == "record") return GatewayMode::Record;
    if (v == "replay") return GatewayMode::Replay;
    throw ValidationError("unknown gateway mode '" + std::string(s) + "'");
}

std::string file_digest(const std::filesystem::path& path) {
    if (path.empty() || !std::filesystem::exists(path)) return {};
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return sha256_hex(os.str());
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
    if (config_.max_in_flight == 0) throw ValidationError("max_in_flight must be at least 1");
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    backoff_schedule(config_.retry, 0);  // validates the policy
    if (config_.mode != GatewayMode::Replay && !transport_)
        throw ValidationError(std::string(to_string(config_.mode)) + " mode needs a provider transport");
    if (config_.mode == GatewayMode::Replay) {
        if (config_.cache_path.empty()) throw ValidationError("replay mode needs a cache file");
        if (!std::filesystem::exists(config_.cache_path))
            throw ValidationError("cache file " + config_.cache_path.string() + " does not exist");
    }
    if (config_.mode == GatewayMode::Record && config_.cache_path.empty())
        throw ValidationError("record mode needs a cache file");
    if (!config_.cache_path.empty()) {
        cache_digest_ = file_digest(config_.cache_path);
        cache_ = std::make_unique<ResponseCache>(config_.cache_path);
    }
}

ChatRequest Gateway::make_request(const Conversation& messages) const {
    ChatRequest r;
    r.model_id = config_.model_id;
    r.messages = messages;
    r.max_tokens = config_.max_tokens;
    return r;
}

ChatResponse Gateway::complete(const Conversation& messages) { return complete(make_request(messages)); }

ChatResponse Gateway::complete(const ChatRequest& request) { return complete(request, config_.mode); }

ChatResponse Gateway::complete(const ChatRequest& request, GatewayMode mode) {
    request.validate();
    ++calls_;
    const std::string key = cache_key(request);
    if (mode == GatewayMode::Replay) {
        if (!cache_) throw ValidationError("replay mode needs a cache file");
        auto hit = cache_->find(key);
        if (!hit) throw CacheMiss(key);
        ++hits_;
        return *hit;
    }
    ChatResponse resp = round_trip(request);
    if (mode == GatewayMode::Record) {
        if (!cache_) throw ValidationError("record mode needs a cache file");
        CacheEntry e{key, canonical_request(request), resp, utc_now()};
        if (cache_->append(e)) ++recorded_;
    }
    return resp;
}

void Gateway::acquire() {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
    std::size_t peak = peak_.load();
    while (in_flight_ > peak && !peak_.compare_exchange_weak(peak, in_flight_)) {
    }
}

void Gateway::release() {
    {
        std::lock_guard lock(slots_mutex_);
        --in_flight_;
    }
    slots_cv_.notify_one();
}

ChatResponse Gateway::round_trip(const ChatRequest& request) {
    if (!transport_) throw ValidationError("no provider transport configured");
    const auto delays = backoff_schedule(config_.retry, splitmix64(config_.jitter_seed ^ retry_stream_++));
    for (int attempt = 1;; ++attempt) {
        acquire();
        try {
            ++dials_;
            const auto start = std::chrono::steady_clock::now();
            ChatResponse r = transport_->send(request, config_.timeout);
            release();
            if (r.latency_ms == 0) {
                r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
            }
            return r;
        } catch (const TransportError& e) {
            release();
            if (!is_retryable(e.status()) || attempt >= config_.retry.max_attempts) {
                throw TransportError("gave up after " + std::to_string(attempt) + " attempt(s): " + e.what(),
                                     e.status());
            }
            sleeper_(delays[static_cast<std::size_t>(attempt - 1)]);
        } catch (...) {
            release();
            throw;
        }
    }
}

GatewayStats Gateway::stats() const {
    return GatewayStats{calls_.load(), dials_.load(), hits_.load(), recorded_.load(), peak_.load()};
}

}  // namespace humbench
