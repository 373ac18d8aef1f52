#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkdo/model.hpp"

namespace qkdo {

// Fixed-length bitstring used for link keys, the global key and ciphertexts.
struct SecretKey {
    static constexpr std::size_t default_bits = 256;

    std::vector<std::uint8_t> bytes;
    std::string origin;  // "link:<id>", "pair:<id>" or "global"

    std::size_t bit_length() const { return bytes.size() * 8; }
    bool is_zero() const;

    friend bool operator==(const SecretKey& a, const SecretKey& b) { return a.bytes == b.bytes; }

    static SecretKey zero(std::size_t bits = default_bits);
};

enum class CustodyItemKind : std::uint8_t { link_key, ciphertext, global_key };

struct CustodyEntry {
    NodeId node_id;
    CustodyItemKind item;
    std::optional<LinkId> link_id;  // set for link-key entries
};

// Append-only record of which node held which key material during one relay
// run; the audit that untrusted relays never enter the custody chain.
struct CustodyLog {
    std::vector<CustodyEntry> entries;

    void add(NodeId node, CustodyItemKind item, std::optional<LinkId> link = std::nullopt) {
        entries.push_back({node, item, link});
    }
    bool mentions(NodeId node) const;
    std::vector<NodeId> holders_of_global_key() const;
    std::string render() const;  // line-oriented export
};

// Deterministic emulated key generation: identical shared key at both ends,
// derived from (seed, key_unit). A TF pair is one key unit keyed by the
// lower of its two segment link ids.
SecretKey generate_link_key(LinkId key_unit, std::uint64_t seed,
                            std::size_t bits = SecretKey::default_bits);

SecretKey xor_combine(const SecretKey& a, const SecretKey& b);  // throws on length mismatch

// One encryption hop of the relay pipeline. A pair-backed hop spans the
// untrusted relay with the TF pair's single shared key.
struct RelayHop {
    NodeId from;
    NodeId to;
    LinkId key_unit;
    std::optional<NodeId> untrusted_mid;
};

// Hop decomposition of an established chain's physical path.
std::vector<RelayHop> relay_hops(const ChainRecord& chain, const PhysicalTopology& topo);

struct RelayOutcome {
    SecretKey delivered;
    CustodyLog custody;
    std::vector<SecretKey> wire_ciphertexts;  // one per hop, in order
};

// Hop-by-hop XOR relaying of the global key: the source encrypts with the
// first hop key, every trusted relay decrypts and re-encrypts, the
// destination decrypts. Untrusted relays take no action and appear nowhere
// in the custody log.
RelayOutcome relay_global_key(const ChainRecord& chain, const PhysicalTopology& topo,
                              const SecretKey& global_key, std::uint64_t seed);

}  // namespace qkdo
