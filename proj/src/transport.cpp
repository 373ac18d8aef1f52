#include "qkdo/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace qkdo::net {

namespace {

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw std::runtime_error("transport: bad IPv4 address " + host);
    return addr;
}

// Waits for readability; returns false on timeout.
bool wait_readable(int fd, std::optional<std::chrono::steady_clock::time_point> deadline) {
    for (;;) {
        pollfd pfd{fd, POLLIN, 0};
        int timeout_ms = -1;
        if (deadline) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                *deadline - std::chrono::steady_clock::now());
            timeout_ms = static_cast<int>(std::max<std::int64_t>(left.count(), 0));
        }
        int rc = ::poll(&pfd, 1, timeout_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;  // signal (e.g. SIGTERM); recheck deadline
            throw std::runtime_error(std::string("poll: ") + std::strerror(errno));
        }
        return rc > 0;
    }
}

}  // namespace

TcpStream::~TcpStream() { close(); }

TcpStream::TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

void TcpStream::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::optional<TcpStream> TcpStream::connect(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return std::nullopt;
    sockaddr_in addr = make_addr(host, port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        return std::nullopt;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpStream(fd);
}

void TcpStream::write_frame(const std::vector<std::uint8_t>& frame) {
    std::size_t sent = 0;
    while (sent < frame.size()) {
        ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) throw std::runtime_error("transport: send failed");
        sent += static_cast<std::size_t>(n);
    }
}

bool TcpStream::read_exact(std::uint8_t* dst, std::size_t n,
                           std::optional<std::chrono::steady_clock::time_point> deadline) {
    std::size_t got = 0;
    while (got < n) {
        if (!wait_readable(fd_, deadline)) return false;
        ssize_t r = ::recv(fd_, dst + got, n - got, 0);
        if (r == 0) {
            if (got == 0) {
                close();  // clean EOF between frames; invalidate so callers can tell from timeout
                return false;
            }
            throw std::runtime_error("transport: connection closed mid-frame");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("transport: recv: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

std::optional<std::vector<std::uint8_t>> TcpStream::read_frame(
    std::optional<std::chrono::milliseconds> timeout) {
    std::optional<std::chrono::steady_clock::time_point> deadline;
    if (timeout) deadline = std::chrono::steady_clock::now() + *timeout;

    std::vector<std::uint8_t> frame(8);
    if (!read_exact(frame.data(), 8, deadline)) return std::nullopt;

    std::uint16_t length = static_cast<std::uint16_t>((frame[2] << 8) | frame[3]);
    if (length < 8) throw std::runtime_error("transport: frame length below header size");
    frame.resize(length);
    if (length > 8 && !read_exact(frame.data() + 8, length - 8u, deadline))
        throw std::runtime_error("transport: timeout mid-frame");
    return frame;
}

TcpListener::~TcpListener() { close(); }

TcpListener::TcpListener(TcpListener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
    other.fd_ = -1;
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        port_ = other.port_;
        other.fd_ = -1;
    }
    return *this;
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpListener TcpListener::bind(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("transport: socket failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = make_addr(host, port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw std::runtime_error("transport: bind " + host + ":" + std::to_string(port) + ": " +
                                 std::strerror(errno));
    }
    if (::listen(fd, 16) != 0) {
        ::close(fd);
        throw std::runtime_error("transport: listen failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);

    TcpListener l;
    l.fd_ = fd;
    l.port_ = ntohs(addr.sin_port);
    return l;
}

std::optional<TcpStream> TcpListener::accept(std::optional<std::chrono::milliseconds> timeout) {
    std::optional<std::chrono::steady_clock::time_point> deadline;
    if (timeout) deadline = std::chrono::steady_clock::now() + *timeout;
    if (!wait_readable(fd_, deadline)) return std::nullopt;
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) return std::nullopt;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpStream(fd);
}

}  // namespace qkdo::net
