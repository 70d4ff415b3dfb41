// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "raychan/protocol.hpp"

namespace raychan {

struct NetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// "host:port" -> (host, port)
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

/// Blocking TCP stream carrying protocol frames.
class TcpConnection {
public:
    TcpConnection() = default;
    explicit TcpConnection(int fd) : fd_(fd) {}
    TcpConnection(TcpConnection&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    TcpConnection& operator=(TcpConnection&& o) noexcept;
    TcpConnection(const TcpConnection&) = delete;
    TcpConnection& operator=(const TcpConnection&) = delete;
    ~TcpConnection();

    static TcpConnection connect(const std::string& host, std::uint16_t port);

    bool valid() const { return fd_ >= 0; }
    void close();

    void send_frame(const WireMessage& msg);
    /// One complete frame; nullopt on a clean peer close at a frame boundary.
    std::optional<WireMessage> recv_frame();

private:
    void send_all(const std::uint8_t* data, std::size_t n);
    bool recv_all(std::uint8_t* data, std::size_t n, bool eof_ok);

    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& o) noexcept : fd_(o.fd_), port_(o.port_) { o.fd_ = -1; }
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    /// Binds and listens; port 0 picks an ephemeral port (see port()).
    static TcpListener bind(const std::string& host, std::uint16_t port);

    std::uint16_t port() const { return port_; }
    TcpConnection accept();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace raychan
