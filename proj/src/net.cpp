// SPDX-License-Identifier: Apache-2.0

#include "raychan/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <vector>

namespace raychan {

namespace {

[[noreturn]] void fail(const std::string& what) {
    throw NetError(what + ": " + std::strerror(errno));
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    if (getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || !result)
        throw NetError("cannot resolve host: " + host);
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(result->ai_addr)->sin_addr;
    freeaddrinfo(result);
    return addr;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size())
        throw NetError("endpoint must be host:port, got '" + endpoint + "'");
    const std::string host = endpoint.substr(0, colon);
    const std::string port_text = endpoint.substr(colon + 1);
    int port = 0;
    try {
        port = std::stoi(port_text);
    } catch (const std::exception&) {
        throw NetError("invalid port in endpoint '" + endpoint + "'");
    }
    if (port < 0 || port > 65535) throw NetError("port out of range in '" + endpoint + "'");
    return {host, static_cast<std::uint16_t>(port)};
}

TcpConnection& TcpConnection::operator=(TcpConnection&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

TcpConnection::~TcpConnection() { close(); }

void TcpConnection::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpConnection TcpConnection::connect(const std::string& host, std::uint16_t port) {
    const sockaddr_in addr = resolve(host, port);
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail("socket");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        fail("connect to " + host + ":" + std::to_string(port));
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpConnection(fd);
}

void TcpConnection::send_all(const std::uint8_t* data, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
        const ssize_t r = ::send(fd_, data + sent, n - sent, MSG_NOSIGNAL);
        if (r < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        sent += static_cast<std::size_t>(r);
    }
}

bool TcpConnection::recv_all(std::uint8_t* data, std::size_t n, bool eof_ok) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::recv(fd_, data + got, n - got, 0);
        if (r < 0) {
            if (errno == EINTR) continue;
            fail("recv");
        }
        if (r == 0) {
            if (got == 0 && eof_ok) return false;
            throw NetError("connection closed mid-frame");
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

void TcpConnection::send_frame(const WireMessage& msg) {
    const std::vector<std::uint8_t> frame = encode(msg);
    send_all(frame.data(), frame.size());
}

std::optional<WireMessage> TcpConnection::recv_frame() {
    std::uint8_t prefix[4];
    if (!recv_all(prefix, 4, /*eof_ok=*/true)) return std::nullopt;
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) length |= static_cast<std::uint32_t>(prefix[i]) << (8 * i);
    std::vector<std::uint8_t> frame(4u + length);
    std::memcpy(frame.data(), prefix, 4);
    recv_all(frame.data() + 4, length, /*eof_ok=*/false);
    return decode(frame);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

TcpListener TcpListener::bind(const std::string& host, std::uint16_t port) {
    const sockaddr_in addr = resolve(host, port);
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) fail("socket");
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        fail("bind " + host + ":" + std::to_string(port));
    }
    if (::listen(fd, 8) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        fail("listen");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        fail("getsockname");
    }
    TcpListener listener;
    listener.fd_ = fd;
    listener.port_ = ntohs(bound.sin_port);
    return listener;
}

TcpConnection TcpListener::accept() {
    for (;;) {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpConnection(fd);
        }
        if (errno == EINTR) continue;
        fail("accept");
    }
}

}  // namespace raychan
