#pragma once

#include "cgft/cgm/reading.hpp"
#include "cgft/cgm/reading_store.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

namespace cgft::cgm {

/// Turns one request line into one reply line (no newline on either side).
using LineHandler = std::function<std::string(std::string_view line)>;

/// Parses frames, hands readings to `ingest` and answers OK/ERR. Duplicates
/// are acknowledged with OK so a relay that resends stops retrying.
LineHandler make_ingest_handler(std::function<IngestResult(const GlucoseReading&)> ingest);

/// Newline-delimited request/reply server over TCP, one thread per connection.
class LineServer {
  public:
    /// Port 0 picks an ephemeral port; see port() after start().
    LineServer(std::string host, std::uint16_t port, LineHandler handler);
    ~LineServer();

    LineServer(const LineServer&) = delete;
    LineServer& operator=(const LineServer&) = delete;

    /// Binds and starts accepting. Throws Error when the socket cannot be bound.
    void start();
    void stop();

    [[nodiscard]] std::uint16_t port() const noexcept { return port_; }

  private:
    void accept_loop();
    void serve(int fd);

    std::string host_;
    std::uint16_t port_;
    LineHandler handler_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex clients_mutex_;
    std::list<int> client_fds_;
    std::list<std::thread> client_threads_;
};

/// Blocking client: one line out, one line back.
class LineClient {
  public:
    LineClient(const std::string& host, std::uint16_t port);
    ~LineClient();

    LineClient(const LineClient&) = delete;
    LineClient& operator=(const LineClient&) = delete;

    /// Throws Error when the connection drops.
    std::string request(std::string_view line);

  private:
    int fd_ = -1;
    std::string pending_;
};

} // namespace cgft::cgm
