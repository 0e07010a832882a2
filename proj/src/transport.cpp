#include "muckle/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <stdexcept>
#include <system_error>

#include "muckle/wire.hpp"

namespace muckle {

namespace {

[[noreturn]] void throw_errno(const std::string& what) { throw std::system_error(errno, std::generic_category(), what); }

struct AddrInfo {
    addrinfo* list = nullptr;
    ~AddrInfo() {
        if (list) freeaddrinfo(list);
    }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    AddrInfo out;
    const std::string service = std::to_string(port);
    const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.list);
    if (rc != 0) throw std::runtime_error("cannot resolve '" + host + "': " + gai_strerror(rc));
    return out;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("endpoint must be host:port: " + endpoint);
    std::string host = endpoint.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    const std::string port_text = endpoint.substr(colon + 1);
    std::size_t used = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(port_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != port_text.size() || port > 65535)
        throw std::invalid_argument("bad port in endpoint: " + endpoint);
    return {host, static_cast<std::uint16_t>(port)};
}

// ---- TcpConnection ----

TcpConnection::~TcpConnection() { close(); }

TcpConnection& TcpConnection::operator=(TcpConnection&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

TcpConnection TcpConnection::connect(const std::string& host, std::uint16_t port) {
    auto info = resolve(host, port, false);
    int last_errno = 0;
    for (auto* ai = info.list; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return TcpConnection(fd);
        }
        last_errno = errno;
        ::close(fd);
    }
    errno = last_errno;
    throw_errno("connect to " + host + ":" + std::to_string(port));
}

void TcpConnection::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void TcpConnection::send(ByteView wire) {
    std::size_t done = 0;
    while (done < wire.size()) {
        const ssize_t n = ::send(fd_, wire.data() + done, wire.size() - done, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send");
        }
        done += static_cast<std::size_t>(n);
    }
}

bool TcpConnection::read_exact(std::uint8_t* out, std::size_t n) {
    std::size_t done = 0;
    while (done < n) {
        const ssize_t got = ::recv(fd_, out + done, n - done, 0);
        if (got < 0) {
            if (errno == EINTR) continue;
            throw_errno("recv");
        }
        if (got == 0) {
            if (done == 0) return false;
            throw std::runtime_error("connection closed inside a message");
        }
        done += static_cast<std::size_t>(got);
    }
    return true;
}

std::optional<Bytes> TcpConnection::receive_message() {
    Bytes wire(kHeaderLen);
    if (!read_exact(wire.data(), kHeaderLen)) return std::nullopt;
    const std::size_t body = (std::size_t{wire[1]} << 16) | (std::size_t{wire[2]} << 8) | wire[3];
    wire.resize(kHeaderLen + body);
    if (body && !read_exact(wire.data() + kHeaderLen, body))
        throw std::runtime_error("connection closed inside a message");
    return wire;
}

// ---- TcpListener ----

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    auto info = resolve(host, port, true);
    int last_errno = 0;
    for (auto* ai = info.list; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
            fd_ = fd;
            break;
        }
        last_errno = errno;
        ::close(fd);
    }
    if (fd_ < 0) {
        errno = last_errno;
        throw_errno("listen on " + host + ":" + std::to_string(port));
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) throw_errno("getsockname");
    port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                       : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

TcpConnection TcpListener::accept() {
    for (;;) {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return TcpConnection(fd);
        }
        if (errno != EINTR) throw_errno("accept");
    }
}

void TcpListener::shutdown() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace muckle
