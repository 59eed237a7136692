#include "cgft/cgm/line_transport.hpp"

#include "cgft/cgm/wire.hpp"
#include "cgft/common/error.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace cgft::cgm {

namespace {

constexpr std::size_t kMaxLine = 4096;

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

/// Reads until a newline; returns false on EOF/error before a full line.
bool read_line(int fd, std::string& pending, std::string& line) {
    while (true) {
        if (auto nl = pending.find('\n'); nl != std::string::npos) {
            line = pending.substr(0, nl);
            pending.erase(0, nl + 1);
            return true;
        }
        if (pending.size() > kMaxLine) {
            return false;
        }
        char buf[1024];
        const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) {
                continue;
            }
            return false;
        }
        pending.append(buf, static_cast<std::size_t>(n));
    }
}

} // namespace

LineHandler make_ingest_handler(std::function<IngestResult(const GlucoseReading&)> ingest) {
    return [ingest = std::move(ingest)](std::string_view line) -> std::string {
        try {
            const auto reading = parse_frame(line);
            ingest(reading);
            return encode_ack(reading.seq);
        } catch (const FrameError& e) {
            return encode_nack(to_string(e.kind()));
        } catch (const StorageError&) {
            return encode_nack("storage-unavailable");
        } catch (const Error& e) {
            return encode_nack(e.what());
        }
    };
}

LineServer::LineServer(std::string host, std::uint16_t port, LineHandler handler)
    : host_(std::move(host)), port_(port), handler_(std::move(handler)) {}

LineServer::~LineServer() {
    stop();
}

void LineServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw Error(std::string("socket: ") + std::strerror(errno));
    }
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port_);
    if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error("invalid listen address '" + host_ + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
        const std::string reason = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw Error("cannot listen on " + host_ + ":" + std::to_string(port_) + ": " + reason);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void LineServer::stop() {
    if (!running_.exchange(false)) {
        return;
    }
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) {
        acceptor_.join();
    }
    std::list<std::thread> threads;
    {
        std::lock_guard lock(clients_mutex_);
        for (int fd : client_fds_) {
            ::shutdown(fd, SHUT_RDWR);
        }
        threads.swap(client_threads_);
    }
    for (auto& t : threads) {
        t.join();
    }
    listen_fd_ = -1;
}

void LineServer::accept_loop() {
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) {
                continue;
            }
            return;
        }
        std::lock_guard lock(clients_mutex_);
        if (!running_) {
            ::close(fd);
            return;
        }
        client_fds_.push_back(fd);
        client_threads_.emplace_back([this, fd] { serve(fd); });
    }
}

void LineServer::serve(int fd) {
    std::string pending;
    std::string line;
    while (read_line(fd, pending, line)) {
        if (!send_all(fd, handler_(line) + "\n")) {
            break;
        }
    }
    std::lock_guard lock(clients_mutex_);
    client_fds_.remove(fd);
    ::close(fd);
}

LineClient::LineClient(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
        throw Error("cannot resolve '" + host + "'");
    }
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
        const std::string reason = std::strerror(errno);
        if (fd_ >= 0) {
            ::close(fd_);
        }
        throw Error("cannot connect to " + host + ":" + std::to_string(port) + ": " + reason);
    }
}

LineClient::~LineClient() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

std::string LineClient::request(std::string_view line) {
    std::string out(line);
    out += '\n';
    if (!send_all(fd_, out)) {
        throw Error("connection lost while sending");
    }
    std::string reply;
    if (!read_line(fd_, pending_, reply)) {
        throw Error("connection lost while waiting for a reply");
    }
    return reply;
}

} // namespace cgft::cgm
