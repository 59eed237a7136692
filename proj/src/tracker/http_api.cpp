#include "cgft/tracker/http_api.hpp"

#include "cgft/cgm/line_transport.hpp"
#include "cgft/cgm/wire.hpp"
#include "cgft/common/error.hpp"
#include "cgft/tracker/json.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <condition_variable>
#include <deque>
#include <list>
#include <sstream>
#include <thread>

namespace cgft::tracker {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kIdPattern = "([A-Za-z0-9_.\\-]+)";

/// Malformed request (unparseable body, missing field of the wrong type).
class BadRequest : public Error {
  public:
    using Error::Error;
};

class Unauthorized : public Error {
  public:
    using Error::Error;
};

class Forbidden : public Error {
  public:
    using Error::Error;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, {{"error", kind}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw BadRequest(std::string("request body is not valid JSON: ") + e.what());
    }
}

Timestamp query_time(const httplib::Request& req, const char* key, const char* fallback) {
    const auto text = req.has_param(key) ? req.get_param_value(key) : std::string(fallback);
    const auto t = parse_rfc3339(text);
    if (!t) {
        throw BadRequest(std::string("query parameter '") + key + "' must be an RFC3339 UTC timestamp");
    }
    return *t;
}

recognizer::ModelFeatures parse_features(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw BadRequest("'features' must be a non-empty array with one number array per model");
    }
    recognizer::ModelFeatures out;
    for (const auto& row : j) {
        if (!row.is_array()) {
            throw BadRequest("'features' must be a non-empty array with one number array per model");
        }
        std::vector<double> values;
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw BadRequest("feature values must be numbers");
            }
            values.push_back(v.get<double>());
        }
        out.push_back(std::move(values));
    }
    return out;
}

struct SseSession {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::string> queue;
    bool closed = false;
};

} // namespace

struct HttpApi::Impl {
    Tracker& tracker;
    HttpOptions options;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    std::mutex sessions_mutex;
    std::list<std::shared_ptr<SseSession>> sessions;

    Impl(Tracker& t, HttpOptions o) : tracker(t), options(std::move(o)) { routes(); }

    std::optional<Role> caller_role(const httplib::Request& req) const {
        if (options.tokens.empty()) {
            return std::nullopt;
        }
        std::string token;
        const auto auth = req.get_header_value("Authorization");
        if (auth.rfind("Bearer ", 0) == 0) {
            token = auth.substr(7);
        } else if (req.has_param("token")) {
            token = req.get_param_value("token");
        }
        const auto it = options.tokens.find(token);
        if (it == options.tokens.end()) {
            throw Unauthorized("a valid bearer token is required");
        }
        return it->second;
    }

    void require_patient_role(const httplib::Request& req) const {
        const auto role = caller_role(req);
        if (role && *role != Role::patient) {
            throw Forbidden("only the patient role may submit or confirm meals");
        }
    }

    template <typename F>
    httplib::Server::Handler guarded(F&& f) {
        return [this, f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
            try {
                if (req.path != "/health") {
                    (void)caller_role(req);
                }
                f(req, res);
            } catch (const BadRequest& e) {
                send_error(res, 400, "bad-request", e.what());
            } catch (const Unauthorized& e) {
                send_error(res, 401, "unauthorized", e.what());
            } catch (const Forbidden& e) {
                send_error(res, 403, "forbidden", e.what());
            } catch (const NotFound& e) {
                send_error(res, 404, "not-found", e.what());
            } catch (const Conflict& e) {
                send_error(res, 409, "conflict", e.what());
            } catch (const InvalidArgument& e) {
                send_error(res, 422, "invalid", e.what());
            } catch (const DataError& e) {
                send_error(res, 422, "invalid", e.what());
            } catch (const recognizer::Unavailable& e) {
                send_error(res, 503, "recognizer-unavailable", e.what());
            } catch (const StorageError& e) {
                spdlog::error("storage failure on {} {}: {}", req.method, req.path, e.what());
                send_error(res, 503, "storage-unavailable", e.what());
            } catch (const json::exception& e) {
                send_error(res, 400, "bad-request", e.what());
            } catch (const std::exception& e) {
                spdlog::error("unhandled error on {} {}: {}", req.method, req.path, e.what());
                send_error(res, 500, "internal", e.what());
            }
        };
    }

    void routes() {
        const std::string id = kIdPattern;

        server.Get("/health", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}, {"recognizer", tracker.recognizer() != nullptr}});
        }));

        server.Get("/patients", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, tracker.patients());
        }));

        server.Post("/patients", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto body = parse_body(req);
            if (!body.is_object() || !body.contains("patient_id")) {
                throw BadRequest("body must be a patient profile object with 'patient_id'");
            }
            send_json(res, 201, tracker.create_patient(body.get<PatientProfile>()));
        }));

        server.Get("/patients/" + id, guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, tracker.get_patient(req.matches[1]));
        }));

        server.Post("/patients/" + id + "/device",
                    guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = parse_body(req);
                        if (!body.is_object() || !body.contains("device_id") || !body["device_id"].is_string()) {
                            throw BadRequest("body must be {\"device_id\": string}");
                        }
                        send_json(res, 200, tracker.link_device(req.matches[1], body["device_id"].get<std::string>()));
                    }));

        server.Post("/readings", guarded([this](const httplib::Request& req, httplib::Response& res) {
            if (req.get_header_value("Content-Type").rfind(kJson, 0) == 0) {
                ingest_json(req, res);
            } else {
                ingest_frames(req, res);
            }
        }));

        server.Post("/patients/" + id + "/meals", guarded([this](const httplib::Request& req, httplib::Response& res) {
            require_patient_role(req);
            const auto body = parse_body(req);
            if (!body.is_object() || !body.contains("timestamp") || !body["timestamp"].is_string()) {
                throw BadRequest("body must carry an RFC3339 'timestamp'");
            }
            const auto ts = parse_rfc3339(body["timestamp"].get<std::string>());
            if (!ts) {
                throw BadRequest("'timestamp' must be an RFC3339 UTC timestamp");
            }
            MealInput input;
            if (body.contains("features")) {
                input.features = parse_features(body["features"]);
            }
            if (body.contains("image_ref")) {
                if (!body["image_ref"].is_string()) {
                    throw BadRequest("'image_ref' must be a string");
                }
                input.image_ref = body["image_ref"].get<std::string>();
            }
            if (input.features.has_value() == input.image_ref.has_value()) {
                throw BadRequest("give exactly one of 'features' or 'image_ref'");
            }
            send_json(res, 201, tracker.submit_meal(req.matches[1], input, *ts));
        }));

        server.Get("/meals/" + id, guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, tracker.get_meal(req.matches[1]));
        }));

        server.Put("/meals/" + id + "/category", guarded([this](const httplib::Request& req, httplib::Response& res) {
            require_patient_role(req);
            const auto body = parse_body(req);
            if (!body.is_object() || !body.contains("category") || !body["category"].is_string()) {
                throw BadRequest("body must be {\"category\": string}");
            }
            send_json(res, 200, tracker.confirm_meal_category(req.matches[1], body["category"].get<std::string>()));
        }));

        server.Get("/patients/" + id + "/timeline",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto from = query_time(req, "from", "1970-01-01T00:00:00Z");
                       const auto to = query_time(req, "to", "9999-12-31T23:59:59Z");
                       send_json(res, 200, tracker.get_timeline(req.matches[1], from, to));
                   }));

        server.Get("/patients/" + id + "/alerts", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto role = caller_role(req);
            if (!role && req.has_param("role")) {
                role = parse_role(req.get_param_value("role"));
            }
            send_json(res, 200, tracker.alerts(req.matches[1], role));
        }));

        server.Get("/patients/" + id + "/state", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, tracker.state(req.matches[1]));
        }));

        server.Get("/patients/" + id + "/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
            stream_events(req.matches[1], res);
        }));

        if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir.string())) {
            throw ConfigError("static directory '" + options.static_dir.string() + "' does not exist");
        }

        server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
        });
    }

    void ingest_json(const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        std::vector<cgm::GlucoseReading> readings;
        for (const auto& item : body.is_array() ? body : json::array({body})) {
            auto r = item.get<cgm::GlucoseReading>();
            cgm::validate(r);
            readings.push_back(std::move(r));
        }
        json results = json::array();
        json alerts = json::array();
        for (const auto& r : readings) {
            const auto out = tracker.ingest(r);
            results.push_back({{"device_id", r.device_id},
                               {"seq", r.seq},
                               {"status", out.result == cgm::IngestResult::stored ? "stored" : "duplicate"}});
            for (const auto& a : out.alerts) {
                alerts.push_back(a);
            }
        }
        send_json(res, 200, {{"results", results}, {"alerts", alerts}});
    }

    void ingest_frames(const httplib::Request& req, httplib::Response& res) {
        const auto handler =
            cgm::make_ingest_handler([this](const cgm::GlucoseReading& r) { return tracker.ingest(r).result; });
        std::istringstream in(req.body);
        std::string line;
        std::string reply;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            reply += handler(line);
            reply += '\n';
        }
        res.status = 200;
        res.set_content(reply, "text/plain");
    }

    void stream_events(const std::string& patient_id, httplib::Response& res) {
        (void)tracker.get_patient(patient_id);
        auto session = std::make_shared<SseSession>();
        {
            std::lock_guard lock(sessions_mutex);
            sessions.push_back(session);
        }
        const auto sub = tracker.subscribe(patient_id, [session](const Event& e) {
            std::lock_guard lock(session->mutex);
            session->queue.push_back("event: " + to_string(e.type) + "\ndata: " + e.data.dump() + "\n\n");
            session->cv.notify_one();
        });
        res.set_header("Cache-Control", "no-cache");
        bool greeted = false;
        res.set_chunked_content_provider(
            "text/event-stream",
            [this, session, greeted](std::size_t, httplib::DataSink& sink) mutable {
                if (!greeted) {
                    greeted = true;
                    const std::string hello = ": connected\n\n";
                    return sink.write(hello.data(), hello.size());
                }
                std::deque<std::string> batch;
                {
                    std::unique_lock lock(session->mutex);
                    session->cv.wait_for(lock, options.keepalive,
                                         [&] { return session->closed || !session->queue.empty(); });
                    if (session->closed) {
                        sink.done();
                        return false;
                    }
                    batch.swap(session->queue);
                }
                if (batch.empty()) {
                    batch.emplace_back(": keepalive\n\n");
                }
                for (const auto& chunk : batch) {
                    if (!sink.write(chunk.data(), chunk.size())) {
                        return false;
                    }
                }
                return true;
            },
            [this, session, sub](bool) {
                tracker.unsubscribe(sub);
                std::lock_guard lock(sessions_mutex);
                sessions.remove(session);
            });
    }

    void close_sessions() {
        std::lock_guard lock(sessions_mutex);
        for (const auto& s : sessions) {
            std::lock_guard session_lock(s->mutex);
            s->closed = true;
            s->cv.notify_all();
        }
    }
};

HttpApi::HttpApi(Tracker& tracker, HttpOptions options) : impl_(std::make_unique<Impl>(tracker, std::move(options))) {}

HttpApi::~HttpApi() {
    stop();
}

int HttpApi::bind(const std::string& host, int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port < 0) {
        throw Error("cannot bind HTTP listener to " + host + ":" + std::to_string(port));
    }
    return impl_->port;
}

void HttpApi::run() {
    impl_->server.listen_after_bind();
}

void HttpApi::start() {
    impl_->thread = std::thread([this] { run(); });
    impl_->server.wait_until_ready();
}

void HttpApi::stop() {
    if (!impl_) {
        return;
    }
    impl_->close_sessions();
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

} // namespace cgft::tracker
