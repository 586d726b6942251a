// SPDX-FileCopyrightText: Copyright (c) 2026 The helps-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Line-delimited JSON over TCP. One thread owns every socket and calls the
// handler, so the service behind it never sees concurrent calls. The first
// frame on a connection must be a Hello; outbound frames are routed by the
// client id each connection announced.

#ifndef HELPS_SERVER_HPP
#define HELPS_SERVER_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "helps/service.hpp"

namespace helps {

class TcpServer {
public:
    using Handler = std::function<std::vector<Outbound>(const Message&, double now_s)>;
    using Ticker = std::function<std::vector<Outbound>(double now_s)>;

    /// Binds immediately; port 0 picks an ephemeral port. Throws std::runtime_error.
    TcpServer(const std::string& host, std::uint16_t port, Handler handler, Ticker ticker, double tick_s = 0.1);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    std::uint16_t port() const { return port_; }
    /// Serves until stop() is called from any thread.
    void run();
    void stop();

private:
    struct Connection {
        int fd = -1;
        std::string buffer;
        std::optional<std::string> client_id;
    };

    double now() const;
    void accept_client();
    bool read_client(Connection& c);  // false when the peer went away
    void dispatch(Connection& c, const std::string& line);
    void deliver(const std::vector<Outbound>& out, Connection* origin);
    static void write_all(int fd, const std::string& data);

    Handler handler_;
    Ticker ticker_;
    double tick_s_;
    int listen_fd_ = -1;
    int wake_pipe_[2] = {-1, -1};
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::chrono::steady_clock::time_point start_;
    std::map<int, Connection> connections_;
};

/// Blocking line client used by tests and the CLI.
class TcpClient {
public:
    TcpClient(const std::string& host, std::uint16_t port);
    ~TcpClient();
    TcpClient(const TcpClient&) = delete;
    TcpClient& operator=(const TcpClient&) = delete;

    void send(const Message& m);
    void send_raw(const std::string& line);
    /// Next decoded frame, or nullopt after timeout or disconnect.
    std::optional<Message> receive(double timeout_s = 5.0);

private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace helps

#endif  // HELPS_SERVER_HPP
