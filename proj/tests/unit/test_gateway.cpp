#include <filesystem>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "humbench/error.hpp"
#include "humbench/gateway.hpp"
#include "humbench/sha256.hpp"
#include "scripted_transport.hpp"

using namespace humbench;
using humbench::testing::ScriptedTransport;
using namespace std::chrono_literals;

namespace {

Conversation conv(const std::string& user) { return Conversation{{{Role::System, "sys"}, {Role::User, user}}}; }

ChatRequest request(const std::string& user, const std::string& model = "m") {
    ChatRequest r;
    r.model_id = model;
    r.messages = conv(user);
    return r;
}

std::filesystem::path fresh(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "humbench_gateway_test";
    std::filesystem::create_directories(dir);
    auto p = dir / name;
    std::filesystem::remove(p);
    return p;
}

std::shared_ptr<ScriptedTransport> echo() {
    return std::make_shared<ScriptedTransport>(
        [](const ChatRequest& r) { return "echo: " + r.messages.last_user().content; });
}

GatewayConfig config(GatewayMode mode, const std::filesystem::path& cache) {
    GatewayConfig c;
    c.model_id = "m";
    c.mode = mode;
    c.cache_path = cache;
    return c;
}

}  // namespace

TEST(CacheKey, DependsOnIdentifyingFieldsOnly) {
    const auto a = request("hello");
    EXPECT_EQ(cache_key(a), cache_key(request("hello")));
    EXPECT_NE(cache_key(a), cache_key(request("hello!")));
    EXPECT_NE(cache_key(a), cache_key(request("hello", "other-model")));
    auto capped = a;
    capped.max_tokens = 10;
    EXPECT_NE(cache_key(a), cache_key(capped));
    EXPECT_EQ(cache_key(a).size(), 64u);
    EXPECT_EQ(cache_key(a), sha256_hex(canonical_request(a).dump()));
}

TEST(CacheKey, CanonicalJsonHasSortedKeys) {
    const std::string dumped = canonical_request(request("x")).dump();
    const auto parsed = nlohmann::json::parse(dumped);
    EXPECT_EQ(parsed.dump(), dumped);
    EXPECT_LT(dumped.find("\"messages\""), dumped.find("\"model_id\""));
}

TEST(Request, RejectsNonZeroTemperatureAndMalformedConversation) {
    auto r = request("x");
    r.temperature = 0.7;
    EXPECT_THROW(r.validate(), ValidationError);
    auto bad = request("x");
    bad.messages.messages.erase(bad.messages.messages.begin());
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(ResponseCache, FirstEntryWinsAndFilesConcatenate) {
    const auto a = fresh("a.jsonl"), b = fresh("b.jsonl"), joined = fresh("joined.jsonl");
    {
        ResponseCache ca(a);
        EXPECT_TRUE(ca.append({"k1", {}, {"first", {1, 1, 2}, 5, {}}, "2026-01-01T00:00:00Z"}));
        EXPECT_FALSE(ca.append({"k1", {}, {"second", {}, 0, {}}, "2026-01-01T00:00:00Z"}));
        EXPECT_EQ(ca.size(), 1u);
        ResponseCache cb(b);
        cb.append({"k1", {}, {"shadowed", {}, 0, {}}, "x"});
        cb.append({"k2", {}, {"other", {}, 0, {}}, "x"});
    }
    {
        std::ofstream out(joined, std::ios::binary);
        for (const auto& p : {a, b}) out << std::ifstream(p, std::ios::binary).rdbuf();
    }
    ResponseCache j(joined);
    EXPECT_EQ(j.size(), 2u);
    EXPECT_EQ(j.find("k1")->text, "first");
    EXPECT_EQ(j.find("k1")->usage, (TokenUsage{1, 1, 2}));
    EXPECT_EQ(j.find("k2")->text, "other");
    EXPECT_FALSE(j.find("k3"));
}

TEST(ResponseCache, RejectsUnknownFormatVersion) {
    const auto p = fresh("v9.jsonl");
    std::ofstream(p) << "{\"humbench_cache\":9}\n";
    EXPECT_THROW(ResponseCache{p}, ValidationError);
}

TEST(Gateway, RecordThenReplayWithoutTransport) {
    const auto cache = fresh("record.jsonl");
    auto t = echo();
    {
        Gateway g(config(GatewayMode::Record, cache), t);
        EXPECT_EQ(g.complete(conv("one")).text, "echo: one");
        EXPECT_EQ(g.complete(conv("two")).text, "echo: two");
        EXPECT_EQ(g.stats().recorded, 2u);
    }
    Gateway replay(config(GatewayMode::Replay, cache), nullptr);
    EXPECT_EQ(replay.complete(conv("two")).text, "echo: two");
    EXPECT_EQ(replay.stats().cache_hits, 1u);
    EXPECT_EQ(replay.stats().dials, 0u);
    EXPECT_FALSE(replay.cache_digest().empty());
    try {
        replay.complete(conv("three"));
        FAIL() << "expected a cache miss";
    } catch (const CacheMiss& e) {
        EXPECT_EQ(e.digest(), cache_key(replay.make_request(conv("three"))));
    }
    EXPECT_EQ(t->calls.load(), 2u);
}

TEST(Gateway, ModeRequirements) {
    EXPECT_THROW(Gateway(config(GatewayMode::Replay, fresh("missing.jsonl")), nullptr), ValidationError);
    EXPECT_THROW(Gateway(config(GatewayMode::Record, ""), echo()), ValidationError);
    EXPECT_THROW(Gateway(config(GatewayMode::Live, ""), nullptr), ValidationError);
    Gateway live(config(GatewayMode::Live, ""), echo());
    EXPECT_EQ(live.complete(conv("x")).text, "echo: x");
}

TEST(Retry, BackoffScheduleDoublesWithBoundedJitter) {
    RetryPolicy p;
    const auto d = backoff_schedule(p, 42);
    ASSERT_EQ(d.size(), 4u);
    const std::int64_t base[] = {1000, 2000, 4000, 8000};
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_GE(d[i].count(), base[i]);
        EXPECT_LE(d[i].count(), base[i] + base[i] / 10);
    }
    EXPECT_EQ(backoff_schedule(p, 42), d);
    p.max_attempts = 6;
    EXPECT_THROW(backoff_schedule(p, 0), ValidationError);
    p.max_attempts = 5;
    p.max_jitter = 0.2;
    EXPECT_THROW(backoff_schedule(p, 0), ValidationError);
}

TEST(Retry, RetryableStatuses) {
    for (int s : {0, 408, 429, 500, 502, 503}) EXPECT_TRUE(is_retryable(s)) << s;
    for (int s : {400, 401, 403, 404, 422}) EXPECT_FALSE(is_retryable(s)) << s;
}

TEST(Retry, RetriesTransientFailuresWithInjectedSleeper) {
    auto t = echo();
    t->fail_next({429, 503});
    std::vector<std::chrono::milliseconds> slept;
    Gateway g(config(GatewayMode::Live, ""), t, [&](std::chrono::milliseconds d) { slept.push_back(d); });
    EXPECT_EQ(g.complete(conv("x")).text, "echo: x");
    EXPECT_EQ(g.stats().dials, 3u);
    ASSERT_EQ(slept.size(), 2u);
    EXPECT_GE(slept[0].count(), 1000);
    EXPECT_GE(slept[1].count(), 2000);
}

TEST(Retry, GivesUpAfterFiveAttempts) {
    auto t = echo();
    t->fail_next({500, 500, 500, 500, 500, 500});
    int sleeps = 0;
    Gateway g(config(GatewayMode::Live, ""), t, [&](std::chrono::milliseconds) { ++sleeps; });
    try {
        g.complete(conv("x"));
        FAIL() << "expected a transport error";
    } catch (const TransportError& e) {
        EXPECT_EQ(e.status(), 500);
    }
    EXPECT_EQ(g.stats().dials, 5u);
    EXPECT_EQ(sleeps, 4);
}

TEST(Retry, ClientErrorsAreNotRetried) {
    auto t = echo();
    t->fail_next({401});
    int sleeps = 0;
    Gateway g(config(GatewayMode::Live, ""), t, [&](std::chrono::milliseconds) { ++sleeps; });
    EXPECT_THROW(g.complete(conv("x")), TransportError);
    EXPECT_EQ(g.stats().dials, 1u);
    EXPECT_EQ(sleeps, 0);
}

TEST(Gateway, InFlightNeverExceedsLimit) {
    std::atomic<int> current{0}, peak{0};
    auto t = std::make_shared<ScriptedTransport>([&](const ChatRequest&) {
        const int now = ++current;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(5ms);
        --current;
        return std::string("ok");
    });
    auto c = config(GatewayMode::Live, "");
    c.max_in_flight = 3;
    Gateway g(c, t);
    std::vector<std::thread> threads;
    for (int i = 0; i < 12; ++i) threads.emplace_back([&, i] { g.complete(conv("q" + std::to_string(i))); });
    for (auto& th : threads) th.join();
    EXPECT_LE(peak.load(), 3);
    EXPECT_LE(g.stats().peak_in_flight, 3u);
    EXPECT_GE(g.stats().peak_in_flight, 2u);
    EXPECT_EQ(g.stats().calls, 12u);
}

TEST(Gateway, RecordingIsSafeUnderConcurrency) {
    const auto cache = fresh("concurrent.jsonl");
    {
        auto c = config(GatewayMode::Record, cache);
        c.max_in_flight = 8;
        Gateway g(c, echo());
        std::vector<std::thread> threads;
        for (int i = 0; i < 40; ++i) threads.emplace_back([&, i] { g.complete(conv("q" + std::to_string(i % 20))); });
        for (auto& th : threads) th.join();
        EXPECT_EQ(g.stats().recorded, 20u);
    }
    ResponseCache reloaded(cache);
    EXPECT_EQ(reloaded.size(), 20u);
}
