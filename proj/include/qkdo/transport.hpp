#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qkdo::net {

// Thin RAII wrapper over a connected TCP socket. Frames are delimited by the
// OpenFlow header length field: read 8 bytes, then length-8 more.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    ~TcpStream();

    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    static std::optional<TcpStream> connect(const std::string& host, std::uint16_t port);

    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }
    void close();

    // Whole-frame write; throws std::runtime_error on transport loss.
    void write_frame(const std::vector<std::uint8_t>& frame);

    // Reads one length-delimited frame. nullopt on clean EOF or timeout;
    // throws on a malformed length prefix or transport error.
    std::optional<std::vector<std::uint8_t>> read_frame(
        std::optional<std::chrono::milliseconds> timeout = std::nullopt);

private:
    bool read_exact(std::uint8_t* dst, std::size_t n,
                    std::optional<std::chrono::steady_clock::time_point> deadline);

    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    ~TcpListener();

    TcpListener(TcpListener&& other) noexcept;
    TcpListener& operator=(TcpListener&& other) noexcept;
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    // Binds and listens; port 0 picks an ephemeral port.
    static TcpListener bind(const std::string& host, std::uint16_t port);

    std::uint16_t local_port() const { return port_; }
    bool valid() const { return fd_ >= 0; }
    void close();

    std::optional<TcpStream> accept(std::optional<std::chrono::milliseconds> timeout);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace qkdo::net
