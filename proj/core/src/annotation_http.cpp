#include <cstdlib>

#include <httplib.h>

#include "humbench/annotation_service.hpp"
#include "humbench/error.hpp"

namespace humbench::annotation {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) throw ValidationError("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON body: ") + e.what());
    }
}

// Maps library errors onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const NotFound& e) {
            send_json(res, 404, {{"error", e.what()}});
        } catch (const StateError& e) {
            send_json(res, 409, {{"error", e.what()}});
        } catch (const ValidationError& e) {
            send_json(res, 400, {{"error", e.what()}});
        } catch (const json::exception& e) {
            send_json(res, 400, {{"error", std::string("bad request field: ") + e.what()}});
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", e.what()}});
        }
    };
}

bool is_api_path(const std::string& path) {
    return path.rfind("/waves", 0) == 0 || path.rfind("/codebook", 0) == 0;
}

}  // namespace

struct AnnotationServer::Impl {
    AnnotationService& service;
    ServerOptions options;
    httplib::Server server;

    Impl(AnnotationService& s, ServerOptions o) : service(s), options(std::move(o)) { routes(); }

    int bind();

    void routes() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (!options.token.empty() && is_api_path(req.path) &&
                req.get_header_value("X-Auth-Token") != options.token) {
                send_json(res, 401, {{"error", "missing or wrong X-Auth-Token"}});
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });

        server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"ok", true}});
        });

        server.Get("/waves", guarded([this](const httplib::Request&, httplib::Response& res) {
            json arr = json::array();
            for (const auto& w : service.waves()) arr.push_back(wave_to_json(w));
            send_json(res, 200, arr);
        }));

        server.Post("/waves", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            CreateWaveRequest r;
            r.target_ids = body.at("target_ids").get<std::vector<std::string>>();
            r.annotators = body.at("annotators").get<std::vector<std::string>>();
            if (body.contains("codebook_version")) r.codebook_version = body.at("codebook_version").get<int>();
            r.blind = body.value("blind", true);
            if (body.contains("seed")) r.seed = body.at("seed").get<std::uint64_t>();
            send_json(res, 201, wave_to_json(service.create_wave(r)));
        }));

        server.Get(R"(/waves/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, wave_to_json(service.wave(req.matches[1])));
        }));

        server.Get(R"(/waves/([^/]+)/next)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string annotator = req.get_param_value("annotator");
            if (annotator.empty()) throw ValidationError("query parameter 'annotator' is required");
            const std::string wave_id = req.matches[1];
            const auto item = service.next(wave_id, annotator);
            json body{{"wave_id", wave_id},
                      {"annotator", annotator},
                      {"pending", item.pending},
                      {"done", !item.target.has_value()},
                      {"codebook_version", service.wave(wave_id).codebook_version}};
            if (item.target) body["target"] = target_to_json(*item.target);
            send_json(res, 200, body);
        }));

        server.Post(R"(/waves/([^/]+)/submissions)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        const std::string wave_id = req.matches[1];
                        const auto annotator = body.at("annotator").get<std::string>();
                        const auto target_id = body.at("target_id").get<std::string>();
                        const auto ack = service.submit(wave_id, annotator, target_id,
                                                        body.at("labels").get<std::vector<std::string>>());
                        send_json(res, 201,
                                  {{"wave_id", wave_id},
                                   {"annotator", annotator},
                                   {"target_id", target_id},
                                   {"sequence", ack.sequence},
                                   {"pending", ack.pending},
                                   {"superseded", ack.superseded}});
                    }));

        server.Get(R"(/waves/([^/]+)/stats)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string wave_id = req.matches[1];
            const Wave w = service.wave(wave_id);
            const bool redacted = w.blind && w.status == WaveStatus::Open;
            send_json(res, 200, stats_to_json(service.stats(wave_id), redacted));
        }));

        server.Get(R"(/waves/([^/]+)/disagreements)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       json arr = json::array();
                       for (const auto& d : service.disagreements(req.matches[1])) {
                           arr.push_back(disagreement_to_json(d));
                       }
                       send_json(res, 200, arr);
                   }));

        server.Post(R"(/waves/([^/]+)/transition)",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const json body = parse_body(req);
                        const auto to = parse_wave_status(body.at("status").get<std::string>());
                        send_json(res, 200, wave_to_json(service.transition(req.matches[1], to)));
                    }));

        server.Post(R"(/waves/([^/]+)/notes)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            service.add_note(req.matches[1], body.at("note").get<std::string>());
            send_json(res, 201, wave_to_json(service.wave(req.matches[1])));
        }));

        server.Post("/codebook/revisions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            std::vector<Revision> revisions;
            for (const auto& r : body.at("revisions")) revisions.push_back(revision_from_json(r));
            const auto result = service.revise_codebook(body.at("wave_id").get<std::string>(), revisions);
            json remap = json::object();
            for (const auto& [old_abbrev, now] : result.remap) remap[old_abbrev] = now ? json(*now) : json(nullptr);
            send_json(res, 201, {{"version", result.codebook.version()}, {"remap", remap}});
        }));

        server.Get(R"(/codebook/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string v = req.matches[1];
            int version = 0;
            if (v == "latest") {
                version = service.latest_codebook_version();
            } else {
                try {
                    std::size_t used = 0;
                    version = std::stoi(v, &used);
                    if (used != v.size()) throw std::invalid_argument(v);
                } catch (const std::exception&) {
                    throw ValidationError("codebook version must be an integer or 'latest'");
                }
            }
            send_json(res, 200, codebook_to_json(service.codebook(version)));
        }));

        if (!options.static_dir.empty()) {
            if (!server.set_mount_point("/", options.static_dir.string())) {
                throw ValidationError("static directory " + options.static_dir.string() + " does not exist");
            }
        }
    }
};

ServerOptions server_options_from_env(ServerOptions defaults) {
    if (const char* bind = std::getenv("HUMBENCH_BIND"); bind && *bind) {
        const std::string b = bind;
        const auto colon = b.rfind(':');
        const bool has_port = colon != std::string::npos && colon + 1 < b.size() &&
                              b.find_first_not_of("0123456789", colon + 1) == std::string::npos &&
                              b.find(':') == colon;
        defaults.host = has_port ? b.substr(0, colon) : b;
        if (has_port) defaults.port = std::stoi(b.substr(colon + 1));
    }
    if (const char* port = std::getenv("HUMBENCH_PORT"); port && *port) defaults.port = std::stoi(port);
    if (const char* token = std::getenv("HUMBENCH_TOKEN"); token && *token) defaults.token = token;
    return defaults;
}

AnnotationServer::AnnotationServer(AnnotationService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::Impl::bind() {
    const int port = options.port == 0 ? server.bind_to_any_port(options.host)
                                       : (server.bind_to_port(options.host, options.port) ? options.port : -1);
    if (port < 0) throw Error("cannot bind " + options.host + ":" + std::to_string(options.port));
    return port;
}

int AnnotationServer::start() {
    port_ = impl_->bind();
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void AnnotationServer::run() {
    port_ = impl_->bind();
    impl_->server.listen_after_bind();
}

void AnnotationServer::stop() {
    if (impl_) impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace humbench::annotation
