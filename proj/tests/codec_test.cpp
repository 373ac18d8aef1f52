#include <doctest.h>

#include <random>
#include <stdexcept>

#include "qkdo/codec.hpp"

using namespace qkdo;
using namespace qkdo::wire;

namespace {

ChainConfigRequestMsg sample_request() {
    ChainConfigRequestMsg msg;
    msg.xid = 7;
    msg.chain_id = 1;
    msg.node_id = 6;
    msg.input_port = 1;
    msg.output_port = 3;
    msg.resource_units.set(0);
    return msg;
}

AnyMsg random_message(std::mt19937& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<std::uint32_t> u32;
    switch (pick(rng)) {
        case 0: return HelloMsg{u32(rng)};
        case 1: {
            ChainConfigRequestMsg m;
            m.xid = u32(rng);
            m.chain_id = u32(rng);
            m.node_id = u32(rng);
            m.input_port = u32(rng);
            m.output_port = u32(rng);
            for (auto& b : m.resource_units.bytes()) b = static_cast<std::uint8_t>(rng());
            return m;
        }
        case 2: {
            ChainConfigResponseMsg m;
            m.xid = u32(rng);
            m.chain_id = u32(rng);
            m.node_id = u32(rng);
            m.status = u32(rng) % 5;
            return m;
        }
        default: {
            NodeInfoReportMsg m;
            m.xid = u32(rng);
            m.node_id = u32(rng);
            m.node_kind = static_cast<std::uint8_t>(rng() % 3);
            std::uniform_int_distribution<int> ports(0, 6);
            int n = ports(rng);
            for (int i = 0; i < n; ++i) {
                PortInfo p;
                p.port_no = u32(rng);
                p.peer_node_id = u32(rng);
                p.length_dm = u32(rng);
                p.protocol = static_cast<std::uint8_t>(rng() % 2);
                p.key_rate_bps = u32(rng);
                m.ports.push_back(p);
            }
            return m;
        }
    }
}

}  // namespace

TEST_CASE("chain config request encodes to exactly 44 bytes") {
    auto bytes = encode(AnyMsg{sample_request()});
    CHECK(bytes.size() == 44);
    CHECK(bytes[0] == protocol_version);
    CHECK(bytes[1] == 32);
    CHECK(bytes[2] == 0x00);
    CHECK(bytes[3] == 44);
    // message_function constant on the wire after chain_id and node_id
    CHECK(bytes[16] == 0x00);
    CHECK(bytes[17] == 0x00);
    CHECK(bytes[18] == 0xff);
    CHECK(bytes[19] == 0xff);
}

TEST_CASE("chain config response encodes to exactly 24 bytes with type 33") {
    ChainConfigResponseMsg msg;
    msg.xid = 9;
    msg.chain_id = 1;
    msg.node_id = 2;
    msg.status = status_ok;
    auto bytes = encode(AnyMsg{msg});
    CHECK(bytes.size() == 24);
    CHECK(bytes[1] == 33);
}

TEST_CASE("hello with xid 0 is the canonical 8-byte header") {
    auto bytes = encode(AnyMsg{HelloMsg{0}});
    CHECK(bytes == std::vector<std::uint8_t>{protocol_version, 0x00, 0x00, 0x08, 0x00, 0x00,
                                             0x00, 0x00});
}

TEST_CASE("resource bitmap slot 0 is the most significant bit of the first byte") {
    auto msg = sample_request();
    auto bytes = encode(AnyMsg{msg});
    CHECK(bytes[24] == 0x80);  // body: chain(4) node(4) func(4) in(4), bitmap starts at 24
    msg.resource_units.clear(0);
    msg.resource_units.set(127);
    bytes = encode(AnyMsg{msg});
    CHECK(bytes[24] == 0x00);
    CHECK(bytes[39] == 0x01);
}

TEST_CASE("decode round trips a constructed request") {
    auto msg = sample_request();
    auto decoded = decode(encode(AnyMsg{msg}));
    REQUIRE(std::holds_alternative<AnyMsg>(decoded));
    auto round = std::get<ChainConfigRequestMsg>(std::get<AnyMsg>(decoded));
    CHECK(round == msg);
    CHECK(round.chain_id == 1);
    CHECK(round.node_id == 6);
}

TEST_CASE("truncated request reports truncated or mismatched length") {
    auto bytes = encode(AnyMsg{sample_request()});
    bytes.pop_back();  // 43 bytes
    auto decoded = decode(bytes);
    REQUIRE(std::holds_alternative<DecodeError>(decoded));
    CHECK(std::get<DecodeError>(decoded).kind == DecodeErrorKind::length_mismatch);

    std::vector<std::uint8_t> stub(bytes.begin(), bytes.begin() + 5);
    decoded = decode(stub);
    REQUIRE(std::holds_alternative<DecodeError>(decoded));
    CHECK(std::get<DecodeError>(decoded).kind == DecodeErrorKind::truncated_input);
}

TEST_CASE("unknown message type is rejected with the offending value") {
    auto bytes = encode(AnyMsg{sample_request()});
    bytes[1] = 99;
    auto decoded = decode(bytes);
    REQUIRE(std::holds_alternative<DecodeError>(decoded));
    const auto& err = std::get<DecodeError>(decoded);
    CHECK(err.kind == DecodeErrorKind::unknown_type);
    CHECK(err.offending_value == 99);
}

TEST_CASE("wrong message_function constant is rejected on both codec sides") {
    auto bytes = encode(AnyMsg{sample_request()});
    bytes[16] = 0x12;
    auto decoded = decode(bytes);
    REQUIRE(std::holds_alternative<DecodeError>(decoded));
    CHECK(std::get<DecodeError>(decoded).kind == DecodeErrorKind::bad_constant);

    auto msg = sample_request();
    msg.message_function = 0xdeadbeef;
    CHECK_THROWS_AS((void)encode(AnyMsg{msg}), std::invalid_argument);
}

TEST_CASE("round trip identity over generated messages, re-encode stable") {
    std::mt19937 rng(11);
    for (int i = 0; i < 2000; ++i) {
        AnyMsg msg = random_message(rng);
        auto bytes = encode(msg);
        auto decoded = decode(bytes);
        REQUIRE(std::holds_alternative<AnyMsg>(decoded));
        const auto& round = std::get<AnyMsg>(decoded);
        CHECK(round == msg);
        CHECK(encode(round) == bytes);
    }
}

TEST_CASE("decoder is total on arbitrary byte input") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<std::size_t> size(0, 4096);
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::uint8_t> blob(size(rng));
        for (auto& b : blob) b = static_cast<std::uint8_t>(rng());
        auto decoded = decode(blob);  // must not crash
        if (std::holds_alternative<AnyMsg>(decoded))
            CHECK(encode(std::get<AnyMsg>(decoded)) == blob);
    }
}
