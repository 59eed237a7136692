#pragma once

#include "cgft/tracker/tracker.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace cgft::tracker {

struct HttpOptions {
    /// Static bearer tokens. Empty disables authentication; otherwise every
    /// route except /health needs a known token (Authorization header or
    /// `token` query parameter) and meal writes need the patient role.
    std::map<std::string, Role> tokens;
    std::filesystem::path static_dir; ///< served under / when set
    std::chrono::milliseconds keepalive{15000}; ///< comment line on idle event streams
};

/// JSON-over-HTTP front end of the tracker:
///
///   GET  /health
///   GET  /patients                     POST /patients
///   GET  /patients/{id}                POST /patients/{id}/device
///   POST /readings                     frame lines (text) or JSON reading(s)
///   POST /patients/{id}/meals          {"timestamp", "features"|"image_ref"}
///   GET  /meals/{id}                   PUT  /meals/{id}/category
///   GET  /patients/{id}/timeline?from=&to=
///   GET  /patients/{id}/alerts?role=
///   GET  /patients/{id}/state
///   GET  /patients/{id}/events         server-sent events: reading, meal, alert
///
/// Errors come back as {"error": kind, "message": text} with 400 (malformed
/// body), 401/403, 404, 409, 422 (rejected values) or 503 (recognizer or
/// storage unavailable).
class HttpApi {
  public:
    explicit HttpApi(Tracker& tracker, HttpOptions options = {});
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Port 0 picks an ephemeral port. Returns the bound port; throws Error.
    int bind(const std::string& host, int port);

    /// Serves on the bound socket until stop().
    void run();

    /// run() on a background thread.
    void start();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace cgft::tracker
