#include "qkdo/trace.hpp"

#include <stdexcept>

#include "qkdo/codec.hpp"

namespace qkdo {

TraceRecorder::TraceRecorder(const std::string& path)
    : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("trace: cannot open " + path);
}

void TraceRecorder::record(TraceDirection dir, const std::vector<std::uint8_t>& frame) {
    if (!out_.is_open()) return;
    std::lock_guard lock(mutex_);
    char head[5];
    head[0] = static_cast<char>(dir);
    std::uint32_t len = static_cast<std::uint32_t>(frame.size());
    head[1] = static_cast<char>(len >> 24);
    head[2] = static_cast<char>(len >> 16);
    head[3] = static_cast<char>(len >> 8);
    head[4] = static_cast<char>(len);
    out_.write(head, sizeof(head));
    out_.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(len));
    out_.flush();
}

std::vector<TraceEntry> read_trace(const std::string& path, std::string* truncation_error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("trace: cannot open " + path);
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<TraceEntry> entries;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        if (pos + 5 > raw.size()) {
            if (truncation_error)
                *truncation_error = "truncated record header at offset " + std::to_string(pos);
            break;
        }
        std::uint8_t dir = static_cast<std::uint8_t>(raw[pos]);
        std::uint32_t len = 0;
        for (int i = 1; i <= 4; ++i) len = (len << 8) | static_cast<std::uint8_t>(raw[pos + i]);
        pos += 5;
        if (dir > 1 || len > 0x10000) {
            if (truncation_error)
                *truncation_error = "corrupt record at offset " + std::to_string(pos - 5);
            break;
        }
        if (pos + len > raw.size()) {
            if (truncation_error)
                *truncation_error = "truncated frame at offset " + std::to_string(pos - 5) +
                                    " (need " + std::to_string(len) + " bytes)";
            break;
        }
        TraceEntry e;
        e.direction = static_cast<TraceDirection>(dir);
        e.frame.assign(raw.begin() + static_cast<std::ptrdiff_t>(pos),
                       raw.begin() + static_cast<std::ptrdiff_t>(pos + len));
        entries.push_back(std::move(e));
        pos += len;
    }
    return entries;
}

std::string render_trace(const std::vector<TraceEntry>& entries) {
    std::string out;
    std::size_t index = 0;
    for (const auto& e : entries) {
        out += "frame " + std::to_string(index++) + "  ";
        out += e.direction == TraceDirection::controller_to_agent ? "controller -> agent"
                                                                  : "agent -> controller";
        out += "  (" + std::to_string(e.frame.size()) + " bytes)\n";
        auto decoded = wire::decode(e.frame);
        if (const auto* msg = std::get_if<wire::AnyMsg>(&decoded)) {
            out += "  " + wire::describe(*msg) + "\n";
        } else {
            const auto& err = std::get<wire::DecodeError>(decoded);
            out += "  undecodable: " + err.detail + "\n";
        }
        out += wire::hex_dump(e.frame);
    }
    return out;
}

}  // namespace qkdo
