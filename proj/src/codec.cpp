#include "qkdo/codec.hpp"

#include <cstdio>
#include <stdexcept>

namespace qkdo::wire {

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_header(std::vector<std::uint8_t>& out, std::uint8_t type, std::uint16_t length,
                std::uint32_t xid) {
    put_u8(out, protocol_version);
    put_u8(out, type);
    put_u16(out, length);
    put_u32(out, xid);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    std::uint8_t u8() { return bytes_[pos_++]; }
    std::uint16_t u16() {
        auto hi = u8();
        return static_cast<std::uint16_t>((hi << 8) | u8());
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }
    void raw(std::uint8_t* dst, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = bytes_[pos_ + i];
        pos_ += n;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

DecodeError error(DecodeErrorKind kind, std::string detail, std::uint32_t value = 0) {
    return DecodeError{kind, std::move(detail), value};
}

}  // namespace

std::vector<std::uint8_t> encode(const AnyMsg& msg) {
    std::vector<std::uint8_t> out;
    if (const auto* hello = std::get_if<HelloMsg>(&msg)) {
        put_header(out, msg_hello, header_size, hello->xid);
    } else if (const auto* req = std::get_if<ChainConfigRequestMsg>(&msg)) {
        if (req->message_function != chain_message_function)
            throw std::invalid_argument("chain request: bad message_function");
        put_header(out, msg_chain_config_request, ChainConfigRequestMsg::encoded_size, req->xid);
        put_u32(out, req->chain_id);
        put_u32(out, req->node_id);
        put_u32(out, req->message_function);
        put_u32(out, req->input_port);
        out.insert(out.end(), req->resource_units.bytes().begin(),
                   req->resource_units.bytes().end());
        put_u32(out, req->output_port);
    } else if (const auto* resp = std::get_if<ChainConfigResponseMsg>(&msg)) {
        if (resp->message_function != chain_message_function)
            throw std::invalid_argument("chain response: bad message_function");
        put_header(out, msg_chain_config_response, ChainConfigResponseMsg::encoded_size,
                   resp->xid);
        put_u32(out, resp->chain_id);
        put_u32(out, resp->node_id);
        put_u32(out, resp->message_function);
        put_u32(out, resp->status);
    } else {
        const auto& report = std::get<NodeInfoReportMsg>(msg);
        if (report.ports.size() > 255)
            throw std::invalid_argument("node info report: too many ports");
        put_header(out, msg_node_info_report,
                   static_cast<std::uint16_t>(report.encoded_size()), report.xid);
        put_u32(out, report.node_id);
        put_u8(out, report.node_kind);
        put_u8(out, static_cast<std::uint8_t>(report.ports.size()));
        for (const auto& p : report.ports) {
            put_u32(out, p.port_no);
            put_u32(out, p.peer_node_id);
            put_u32(out, p.length_dm);
            put_u8(out, p.protocol);
            put_u32(out, p.key_rate_bps);
        }
    }
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < header_size)
        return error(DecodeErrorKind::truncated_input,
                     "need at least 8 header bytes, got " + std::to_string(bytes.size()));

    Reader r(bytes);
    OfHeader header;
    header.version = r.u8();
    header.msg_type = r.u8();
    header.length = r.u16();
    header.xid = r.u32();

    if (header.length < header_size)
        return error(DecodeErrorKind::length_mismatch,
                     "header length " + std::to_string(header.length) + " below minimum 8",
                     header.length);
    if (header.length != bytes.size())
        return error(DecodeErrorKind::length_mismatch,
                     "header length " + std::to_string(header.length) + " but " +
                         std::to_string(bytes.size()) + " bytes supplied",
                     header.length);

    switch (header.msg_type) {
        case msg_hello: {
            if (header.length != header_size)
                return error(DecodeErrorKind::length_mismatch, "hello must be 8 bytes",
                             header.length);
            return AnyMsg{HelloMsg{header.xid}};
        }
        case msg_chain_config_request: {
            if (header.length != ChainConfigRequestMsg::encoded_size)
                return error(DecodeErrorKind::length_mismatch, "chain request must be 44 bytes",
                             header.length);
            ChainConfigRequestMsg msg;
            msg.xid = header.xid;
            msg.chain_id = r.u32();
            msg.node_id = r.u32();
            msg.message_function = r.u32();
            if (msg.message_function != chain_message_function)
                return error(DecodeErrorKind::bad_constant, "chain request message_function",
                             msg.message_function);
            msg.input_port = r.u32();
            r.raw(msg.resource_units.bytes().data(), ResourceBitmap::byte_count);
            msg.output_port = r.u32();
            return AnyMsg{msg};
        }
        case msg_chain_config_response: {
            if (header.length != ChainConfigResponseMsg::encoded_size)
                return error(DecodeErrorKind::length_mismatch, "chain response must be 24 bytes",
                             header.length);
            ChainConfigResponseMsg msg;
            msg.xid = header.xid;
            msg.chain_id = r.u32();
            msg.node_id = r.u32();
            msg.message_function = r.u32();
            if (msg.message_function != chain_message_function)
                return error(DecodeErrorKind::bad_constant, "chain response message_function",
                             msg.message_function);
            msg.status = r.u32();
            return AnyMsg{msg};
        }
        case msg_node_info_report: {
            if (header.length < header_size + 6)
                return error(DecodeErrorKind::length_mismatch, "node info report too short",
                             header.length);
            NodeInfoReportMsg msg;
            msg.xid = header.xid;
            msg.node_id = r.u32();
            msg.node_kind = r.u8();
            std::uint8_t port_count = r.u8();
            if (r.remaining() != static_cast<std::size_t>(port_count) * 17)
                return error(DecodeErrorKind::length_mismatch,
                             "node info report body does not match declared port count",
                             port_count);
            for (std::uint8_t i = 0; i < port_count; ++i) {
                PortInfo p;
                p.port_no = r.u32();
                p.peer_node_id = r.u32();
                p.length_dm = r.u32();
                p.protocol = r.u8();
                p.key_rate_bps = r.u32();
                msg.ports.push_back(p);
            }
            return AnyMsg{msg};
        }
        default:
            return error(DecodeErrorKind::unknown_type,
                         "unknown message type " + std::to_string(header.msg_type),
                         header.msg_type);
    }
}

std::uint8_t msg_type_of(const AnyMsg& msg) {
    if (std::holds_alternative<HelloMsg>(msg)) return msg_hello;
    if (std::holds_alternative<ChainConfigRequestMsg>(msg)) return msg_chain_config_request;
    if (std::holds_alternative<ChainConfigResponseMsg>(msg)) return msg_chain_config_response;
    return msg_node_info_report;
}

std::uint32_t xid_of(const AnyMsg& msg) {
    return std::visit([](const auto& m) { return m.xid; }, msg);
}

std::string describe(const AnyMsg& msg) {
    char buf[192];
    if (const auto* hello = std::get_if<HelloMsg>(&msg)) {
        std::snprintf(buf, sizeof(buf), "HELLO xid=%u", hello->xid);
    } else if (const auto* req = std::get_if<ChainConfigRequestMsg>(&msg)) {
        std::snprintf(buf, sizeof(buf),
                      "CHAIN_CONFIG_REQUEST xid=%u chain=%u node=%u in_port=%u out_port=%u "
                      "resources=%s",
                      req->xid, req->chain_id, req->node_id, req->input_port, req->output_port,
                      req->resource_units.to_hex().c_str());
    } else if (const auto* resp = std::get_if<ChainConfigResponseMsg>(&msg)) {
        std::snprintf(buf, sizeof(buf), "CHAIN_CONFIG_RESPONSE xid=%u chain=%u node=%u status=%u",
                      resp->xid, resp->chain_id, resp->node_id, resp->status);
    } else {
        const auto& report = std::get<NodeInfoReportMsg>(msg);
        std::snprintf(buf, sizeof(buf), "NODE_INFO_REPORT xid=%u node=%u kind=%u ports=%zu",
                      report.xid, report.node_id, report.node_kind, report.ports.size());
    }
    return buf;
}

std::string hex_dump(std::span<const std::uint8_t> bytes) {
    std::string out;
    char line[96];
    for (std::size_t off = 0; off < bytes.size(); off += 16) {
        int n = std::snprintf(line, sizeof(line), "%04zx  ", off);
        out.append(line, static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < 16; ++i) {
            if (off + i < bytes.size())
                n = std::snprintf(line, sizeof(line), "%02x ", bytes[off + i]);
            else
                n = std::snprintf(line, sizeof(line), "   ");
            out.append(line, static_cast<std::size_t>(n));
            if (i == 7) out.push_back(' ');
        }
        out.push_back(' ');
        for (std::size_t i = 0; i < 16 && off + i < bytes.size(); ++i) {
            std::uint8_t c = bytes[off + i];
            out.push_back(c >= 0x20 && c < 0x7f ? static_cast<char>(c) : '.');
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace qkdo::wire
