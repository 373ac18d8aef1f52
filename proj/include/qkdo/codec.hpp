#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qkdo/bitmap.hpp"

namespace qkdo::wire {

// OpenFlow 1.3.x wire version carried in every header.
inline constexpr std::uint8_t protocol_version = 0x04;

// Fixed discriminator carried by both chain-config messages.
inline constexpr std::uint32_t chain_message_function = 0x0000FFFF;

enum MsgType : std::uint8_t {
    msg_hello = 0,
    msg_chain_config_request = 32,
    msg_chain_config_response = 33,
    msg_node_info_report = 34,
};

// Orchestration status codes carried by ChainConfigResponseMsg.
enum ConfigStatus : std::uint32_t {
    status_ok = 0,
    status_insufficient_resources = 1,
    status_unknown_port = 2,
    status_node_busy = 3,
    status_internal_error = 4,
};

struct OfHeader {
    std::uint8_t version = protocol_version;
    std::uint8_t msg_type = 0;
    std::uint16_t length = 0;
    std::uint32_t xid = 0;

    friend bool operator==(const OfHeader&, const OfHeader&) = default;
};

inline constexpr std::size_t header_size = 8;

struct HelloMsg {
    std::uint32_t xid = 0;

    friend bool operator==(const HelloMsg&, const HelloMsg&) = default;
};

struct ChainConfigRequestMsg {
    static constexpr std::size_t encoded_size = 44;

    std::uint32_t xid = 0;
    std::uint32_t chain_id = 0;
    std::uint32_t node_id = 0;
    std::uint32_t message_function = chain_message_function;
    std::uint32_t input_port = 0;
    ResourceBitmap resource_units;
    std::uint32_t output_port = 0;

    friend bool operator==(const ChainConfigRequestMsg&, const ChainConfigRequestMsg&) = default;
};

struct ChainConfigResponseMsg {
    static constexpr std::size_t encoded_size = 24;

    std::uint32_t xid = 0;
    std::uint32_t chain_id = 0;
    std::uint32_t node_id = 0;
    std::uint32_t message_function = chain_message_function;
    std::uint32_t status = status_ok;

    friend bool operator==(const ChainConfigResponseMsg&, const ChainConfigResponseMsg&) = default;
};

struct PortInfo {
    std::uint32_t port_no = 0;
    std::uint32_t peer_node_id = 0;
    std::uint32_t length_dm = 0;       // decimeters, keeps fractional km exact
    std::uint8_t protocol = 0;
    std::uint32_t key_rate_bps = 0;

    friend bool operator==(const PortInfo&, const PortInfo&) = default;
};

struct NodeInfoReportMsg {
    std::uint32_t xid = 0;
    std::uint32_t node_id = 0;
    std::uint8_t node_kind = 0;
    std::vector<PortInfo> ports;

    std::size_t encoded_size() const { return header_size + 6 + ports.size() * 17; }

    friend bool operator==(const NodeInfoReportMsg&, const NodeInfoReportMsg&) = default;
};

using AnyMsg = std::variant<HelloMsg, ChainConfigRequestMsg, ChainConfigResponseMsg,
                            NodeInfoReportMsg>;

enum class DecodeErrorKind {
    truncated_input,
    length_mismatch,
    unknown_type,
    bad_constant,
    malformed,
};

struct DecodeError {
    DecodeErrorKind kind;
    std::string detail;
    std::uint32_t offending_value = 0;
};

using DecodeResult = std::variant<AnyMsg, DecodeError>;

// Big-endian field order exactly as declared above. Throws
// std::invalid_argument when message invariants do not hold.
std::vector<std::uint8_t> encode(const AnyMsg& msg);

// Decodes one complete frame. Never throws on arbitrary input.
DecodeResult decode(std::span<const std::uint8_t> bytes);

std::uint8_t msg_type_of(const AnyMsg& msg);
std::uint32_t xid_of(const AnyMsg& msg);
std::string describe(const AnyMsg& msg);

// Wireshark-style hex dump, 16 bytes per row with offsets.
std::string hex_dump(std::span<const std::uint8_t> bytes);

}  // namespace qkdo::wire
