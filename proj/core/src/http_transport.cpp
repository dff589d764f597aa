#include <httplib.h>

#include <cstdlib>

#include "humbench/error.hpp"
#include "humbench/gateway.hpp"

namespace humbench {

using nlohmann::json;

HttpTransportConfig HttpTransportConfig::from_env() {
    HttpTransportConfig c;
    const char* key = std::getenv("HUMBENCH_API_KEY");
    if (!key || !*key) throw ValidationError("HUMBENCH_API_KEY is not set (needed for live and record modes)");
    c.api_key = key;
    if (const char* url = std::getenv("HUMBENCH_BASE_URL"); url && *url) c.base_url = url;
    if (const char* path = std::getenv("HUMBENCH_API_PATH"); path && *path) c.path = path;
    return c;
}

namespace {

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(HttpTransportConfig config) : config_(std::move(config)) {}

    ChatResponse send(const ChatRequest& request, std::chrono::milliseconds timeout) override {
        httplib::Client client(config_.base_url);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout).count();
        client.set_connection_timeout(secs);
        client.set_read_timeout(secs);
        client.set_write_timeout(secs);
        if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

        json body;
        body["model"] = request.model_id;
        body["messages"] = conversation_to_json(request.messages);
        body["temperature"] = request.temperature;
        if (request.max_tokens) body["max_tokens"] = *request.max_tokens;

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(config_.path, body.dump(), "application/json");
        const auto elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
        if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), 0);
        if (res->status != 200) {
            throw TransportError("provider returned HTTP " + std::to_string(res->status) + ": " +
                                     res->body.substr(0, 300),
                                 res->status);
        }

        json j;
        try {
            j = json::parse(res->body);
        } catch (const json::exception& e) {
            throw TransportError(std::string("provider returned invalid JSON: ") + e.what(), res->status);
        }
        const auto& choices = j.value("choices", json::array());
        if (choices.empty() || !choices[0].contains("message"))
            throw TransportError("provider response has no choices", res->status);
        const auto& content = choices[0]["message"].value("content", json());
        if (!content.is_string()) throw TransportError("provider response has no text content", res->status);

        ChatResponse out;
        out.text = content.get<std::string>();
        if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
            out.usage.prompt_tokens = u->value("prompt_tokens", std::int64_t{0});
            out.usage.completion_tokens = u->value("completion_tokens", std::int64_t{0});
            out.usage.total_tokens = u->value("total_tokens", std::int64_t{0});
        }
        out.latency_ms = elapsed.count();
        out.provider_meta = {{"id", j.value("id", std::string())},
                             {"model", j.value("model", std::string())},
                             {"finish_reason", choices[0].value("finish_reason", json())},
                             {"max_tokens", request.max_tokens ? json(*request.max_tokens) : json("provider-default")}};
        return out;
    }

private:
    HttpTransportConfig config_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(HttpTransportConfig config) {
    return std::make_shared<HttpTransport>(std::move(config));
}

}  // namespace humbench
