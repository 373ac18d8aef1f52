#include "qkdo/keyrelay.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace qkdo {

bool SecretKey::is_zero() const {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

SecretKey SecretKey::zero(std::size_t bits) {
    SecretKey k;
    k.bytes.assign(bits / 8, 0);
    return k;
}

bool CustodyLog::mentions(NodeId node) const {
    return std::any_of(entries.begin(), entries.end(),
                       [node](const CustodyEntry& e) { return e.node_id == node; });
}

std::vector<NodeId> CustodyLog::holders_of_global_key() const {
    std::vector<NodeId> holders;
    for (const auto& e : entries)
        if (e.item == CustodyItemKind::global_key &&
            std::find(holders.begin(), holders.end(), e.node_id) == holders.end())
            holders.push_back(e.node_id);
    return holders;
}

std::string CustodyLog::render() const {
    std::string out;
    std::size_t seq = 0;
    for (const auto& e : entries) {
        out += std::to_string(seq++) + "\tnode " + std::to_string(e.node_id) + "\t";
        switch (e.item) {
            case CustodyItemKind::link_key:
                out += "link-key(" + std::to_string(e.link_id.value_or(0)) + ")";
                break;
            case CustodyItemKind::ciphertext: out += "ciphertext"; break;
            case CustodyItemKind::global_key: out += "global-key"; break;
        }
        out += "\n";
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

SecretKey generate_link_key(LinkId key_unit, std::uint64_t seed, std::size_t bits) {
    if (bits == 0 || bits % 8 != 0)
        throw std::invalid_argument("key length must be a positive multiple of 8 bits");
    std::mt19937_64 rng(splitmix64(seed) ^ splitmix64(0x6c696e6bull + key_unit));
    SecretKey key;
    key.origin = "link:" + std::to_string(key_unit);
    key.bytes.reserve(bits / 8);
    for (std::size_t i = 0; i < bits / 8; ++i)
        key.bytes.push_back(static_cast<std::uint8_t>(rng()));
    return key;
}

SecretKey xor_combine(const SecretKey& a, const SecretKey& b) {
    if (a.bytes.size() != b.bytes.size())
        throw std::invalid_argument("xor_combine: length mismatch (" +
                                    std::to_string(a.bit_length()) + " vs " +
                                    std::to_string(b.bit_length()) + " bits)");
    SecretKey out;
    out.origin = "xor";
    out.bytes.resize(a.bytes.size());
    for (std::size_t i = 0; i < a.bytes.size(); ++i) out.bytes[i] = a.bytes[i] ^ b.bytes[i];
    return out;
}

std::vector<RelayHop> relay_hops(const ChainRecord& chain, const PhysicalTopology& topo) {
    std::vector<RelayHop> hops;
    const auto& path = chain.physical_path;
    std::size_t i = 0;
    while (i + 1 < path.size()) {
        NodeId from = path[i];
        NodeId mid = path[i + 1];
        if (topo.kind_of(mid) == NodeKind::untrusted_relay) {
            if (i + 2 >= path.size())
                throw std::invalid_argument("relay_hops: path ends at an untrusted relay");
            NodeId to = path[i + 2];
            const QkdLink* first = topo.find_link(from, mid);
            const QkdLink* second = topo.find_link(mid, to);
            if (!first || !second)
                throw std::invalid_argument("relay_hops: missing TF segment link");
            hops.push_back({from, to, std::min(first->link_id, second->link_id), mid});
            i += 2;
        } else {
            const QkdLink* link = topo.find_link(from, mid);
            if (!link) throw std::invalid_argument("relay_hops: missing link on path");
            hops.push_back({from, mid, link->link_id, std::nullopt});
            i += 1;
        }
    }
    return hops;
}

RelayOutcome relay_global_key(const ChainRecord& chain, const PhysicalTopology& topo,
                              const SecretKey& global_key, std::uint64_t seed) {
    auto hops = relay_hops(chain, topo);
    if (hops.empty()) throw std::invalid_argument("relay_global_key: empty chain");

    RelayOutcome out;
    out.custody.add(hops.front().from, CustodyItemKind::global_key);

    SecretKey carried = global_key;
    for (const auto& hop : hops) {
        SecretKey hop_key = generate_link_key(hop.key_unit, seed, global_key.bit_length());
        if (hop_key.bytes.size() != carried.bytes.size())
            throw std::invalid_argument("relay_global_key: hop key length mismatch");

        out.custody.add(hop.from, CustodyItemKind::link_key, hop.key_unit);
        SecretKey ciphertext = xor_combine(hop_key, carried);
        out.wire_ciphertexts.push_back(ciphertext);

        out.custody.add(hop.to, CustodyItemKind::ciphertext);
        out.custody.add(hop.to, CustodyItemKind::link_key, hop.key_unit);
        carried = xor_combine(hop_key, ciphertext);
        out.custody.add(hop.to, CustodyItemKind::global_key);
    }

    out.delivered = carried;
    out.delivered.origin = "global";
    return out;
}

}  // namespace qkdo
