#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>
#include <variant>
#include <vector>

namespace qkdo {

enum class TraceDirection : std::uint8_t {
    controller_to_agent = 0,
    agent_to_controller = 1,
};

struct TraceEntry {
    TraceDirection direction;
    std::vector<std::uint8_t> frame;
};

// Capture file of raw southbound frames. Record layout, repeated:
//   1 byte direction, 4-byte big-endian frame length, frame bytes.
class TraceRecorder {
public:
    TraceRecorder() = default;
    explicit TraceRecorder(const std::string& path);

    bool enabled() const { return out_.is_open(); }
    void record(TraceDirection dir, const std::vector<std::uint8_t>& frame);

private:
    std::mutex mutex_;
    std::ofstream out_;
};

struct TraceReadError {
    std::size_t offset;
    std::string detail;
};

using TraceReadResult = std::variant<std::vector<TraceEntry>, TraceReadError>;

// Reads a capture back; a truncated final record is reported as an error
// alongside every complete entry read before it.
std::vector<TraceEntry> read_trace(const std::string& path, std::string* truncation_error);

// Decodes and pretty-prints every frame of a capture.
std::string render_trace(const std::vector<TraceEntry>& entries);

}  // namespace qkdo
