// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include "helps/server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace helps {

namespace {

constexpr std::size_t kMaxFrameBytes = 1 << 20;

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error(what + ": " + std::strerror(errno)); }

int open_socket(const std::string& host, std::uint16_t port, bool listen_side) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (listen_side) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
        throw std::runtime_error("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        fail("socket");
    }
    if (listen_side) {
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 16) != 0) {
            ::freeaddrinfo(res);
            ::close(fd);
            fail("cannot listen on " + host + ":" + service);
        }
    } else if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        ::freeaddrinfo(res);
        ::close(fd);
        fail("cannot connect to " + host + ":" + service);
    }
    ::freeaddrinfo(res);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
}

Message server_error(const std::string& code, const std::string& detail) {
    return Message{std::string(kSchemaVersion), "", kLcsSender, 0, ErrorMsg{code, detail, std::nullopt}};
}

}  // namespace

TcpServer::TcpServer(const std::string& host, std::uint16_t port, Handler handler, Ticker ticker, double tick_s)
    : handler_(std::move(handler)), ticker_(std::move(ticker)), tick_s_(tick_s), start_(std::chrono::steady_clock::now()) {
    if (tick_s_ <= 0.0) throw std::invalid_argument("tick must be positive");
    listen_fd_ = open_socket(host, port, true);
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    if (::pipe(wake_pipe_) != 0) fail("pipe");
}

TcpServer::~TcpServer() {
    for (auto& [fd, c] : connections_) ::close(fd);
    if (listen_fd_ >= 0) ::close(listen_fd_);
    for (int fd : wake_pipe_) {
        if (fd >= 0) ::close(fd);
    }
}

double TcpServer::now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

void TcpServer::stop() {
    stopping_ = true;
    const char b = 1;
    [[maybe_unused]] const auto n = ::write(wake_pipe_[1], &b, 1);
}

void TcpServer::write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return;  // the read side notices the broken peer
        off += static_cast<std::size_t>(n);
    }
}

void TcpServer::deliver(const std::vector<Outbound>& out, Connection* origin) {
    for (const auto& o : out) {
        const std::string line = encode(o.message);
        bool sent = false;
        for (auto& [fd, c] : connections_) {
            if (c.client_id == o.to) {
                write_all(fd, line);
                sent = true;
            }
        }
        // Rejected handshakes have no registered id yet; answer on the socket.
        if (!sent && origin != nullptr && !origin->client_id) write_all(origin->fd, line);
    }
}

void TcpServer::accept_client() {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    connections_[fd].fd = fd;
}

void TcpServer::dispatch(Connection& c, const std::string& line) {
    Message m;
    try {
        m = decode(line);
    } catch (const ProtocolError& e) {
        write_all(c.fd, encode(server_error(std::string(to_string(e.kind())), e.what())));
        return;
    }
    if (!c.client_id) {
        const auto* hello = std::get_if<Hello>(&m.body);
        if (hello == nullptr) {
            write_all(c.fd, encode(server_error("handshake_required", "first frame must be Hello")));
            return;
        }
        const auto out = handler_(m, now());
        for (const auto& o : out) {
            if (o.to == hello->client_id && std::holds_alternative<Ack>(o.message.body)) c.client_id = hello->client_id;
        }
        deliver(out, &c);
        return;
    }
    if (m.sender != *c.client_id) {
        write_all(c.fd, encode(server_error("sender_mismatch", "connection belongs to '" + *c.client_id + "'")));
        return;
    }
    deliver(handler_(m, now()), &c);
}

bool TcpServer::read_client(Connection& c) {
    char buf[8192];
    const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
    if (n <= 0) return n < 0 && errno == EINTR;
    c.buffer.append(buf, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = c.buffer.find('\n')) != std::string::npos) {
        const std::string line = c.buffer.substr(0, nl);
        c.buffer.erase(0, nl + 1);
        if (!line.empty()) dispatch(c, line);
    }
    if (c.buffer.size() > kMaxFrameBytes) {
        write_all(c.fd, encode(server_error("malformed_frame", "frame exceeds 1 MiB")));
        return false;
    }
    return true;
}

void TcpServer::run() {
    double next_tick = now();
    while (!stopping_) {
        std::vector<pollfd> fds;
        fds.push_back({listen_fd_, POLLIN, 0});
        fds.push_back({wake_pipe_[0], POLLIN, 0});
        for (const auto& [fd, c] : connections_) fds.push_back({fd, POLLIN, 0});
        const int timeout_ms = std::max(0, static_cast<int>((next_tick - now()) * 1000.0));
        if (::poll(fds.data(), fds.size(), timeout_ms) < 0 && errno != EINTR) fail("poll");
        if (stopping_) break;
        if (fds[0].revents & POLLIN) accept_client();
        for (std::size_t i = 2; i < fds.size(); ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            auto it = connections_.find(fds[i].fd);
            if (it == connections_.end()) continue;
            if (!read_client(it->second)) {
                ::close(it->first);
                connections_.erase(it);
            }
        }
        if (now() >= next_tick) {
            deliver(ticker_(now()), nullptr);
            next_tick = now() + tick_s_;
        }
    }
}

TcpClient::TcpClient(const std::string& host, std::uint16_t port) : fd_(open_socket(host, port, false)) {}

TcpClient::~TcpClient() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpClient::send(const Message& m) { send_raw(encode(m)); }

void TcpClient::send_raw(const std::string& line) {
    std::size_t off = 0;
    while (off < line.size()) {
        const ssize_t n = ::send(fd_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) fail("send");
        off += static_cast<std::size_t>(n);
    }
}

std::optional<Message> TcpClient::receive(double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            const std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return decode(line);
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd p{fd_, POLLIN, 0};
        if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) continue;
        char buf[8192];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n <= 0) return std::nullopt;
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

}  // namespace helps
