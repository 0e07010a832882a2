#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "muckle/bytes.hpp"

namespace muckle {

/// "host:port" split at the last colon. Throws std::invalid_argument.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

/// Blocking TCP stream carrying handshake messages framed by their own
/// 4-byte header. Owns the socket; move-only. Errors throw std::system_error.
class TcpConnection {
public:
    TcpConnection() = default;
    explicit TcpConnection(int fd) : fd_(fd) {}
    ~TcpConnection();
    TcpConnection(TcpConnection&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    TcpConnection& operator=(TcpConnection&& other) noexcept;
    TcpConnection(const TcpConnection&) = delete;
    TcpConnection& operator=(const TcpConnection&) = delete;

    static TcpConnection connect(const std::string& host, std::uint16_t port);

    void send(ByteView wire);
    /// One whole message, or nullopt on orderly close before a header.
    std::optional<Bytes> receive_message();
    void close();
    bool is_open() const { return fd_ >= 0; }

private:
    bool read_exact(std::uint8_t* out, std::size_t n);
    int fd_ = -1;
};

class TcpListener {
public:
    /// Port 0 picks an ephemeral port.
    TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    TcpConnection accept();
    /// Unblocks a pending accept().
    void shutdown();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace muckle
