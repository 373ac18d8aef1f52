#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdo/bitmap.hpp"

namespace qkdo {

using NodeId = std::uint32_t;
using LinkId = std::uint32_t;
using ChainId = std::uint32_t;

enum class NodeKind : std::uint8_t {
    qkd_node = 0,
    trusted_relay = 1,
    untrusted_relay = 2,
};

enum class ProtocolKind : std::uint8_t {
    bb84 = 0,
    tf = 1,
};

std::string to_string(NodeKind kind);
std::string to_string(ProtocolKind protocol);

struct QkdLink {
    LinkId link_id = 0;
    NodeId node_a = 0;
    NodeId node_b = 0;
    double length_km = 0.0;
    ProtocolKind protocol = ProtocolKind::bb84;
    double key_rate_kbps = 0.0;

    NodeId other(NodeId n) const { return n == node_a ? node_b : node_a; }
    bool touches(NodeId n) const { return n == node_a || n == node_b; }

    friend bool operator==(const QkdLink&, const QkdLink&) = default;
};

struct PhysicalTopology {
    std::map<NodeId, NodeKind> nodes;
    std::vector<QkdLink> links;

    std::optional<NodeKind> kind_of(NodeId n) const;
    const QkdLink* find_link(LinkId id) const;
    const QkdLink* find_link(NodeId a, NodeId b) const;
    std::vector<const QkdLink*> incident_links(NodeId n) const;
};

// One routable edge of the abstracted graph. A pair-backed edge collapses the
// fixed two-segment traversal of an untrusted relay into a single hop.
struct AbstractEdge {
    std::uint32_t edge_id = 0;
    NodeId node_a = 0;
    NodeId node_b = 0;
    double length_km = 0.0;
    double min_rate_kbps = 0.0;
    std::vector<LinkId> underlying;           // one link, or two crossing a UR
    std::optional<NodeId> collapsed_relay;    // set iff underlying.size() == 2

    NodeId other(NodeId n) const { return n == node_a ? node_b : node_a; }
    bool touches(NodeId n) const { return n == node_a || n == node_b; }
};

struct AbstractedTopology {
    std::map<NodeId, NodeKind> nodes;
    std::vector<AbstractEdge> edges;

    std::vector<const AbstractEdge*> incident_edges(NodeId n) const;
    const AbstractEdge* find_edge(NodeId a, NodeId b) const;
};

enum class ProtocolRequirement : std::uint8_t {
    conventional = 0,   // BB84 links only
    heterogeneous = 1,  // BB84 and TF permitted
};

struct ChainRequest {
    std::uint32_t request_id = 0;
    NodeId source = 0;
    NodeId destination = 0;
    double required_rate_kbps = 0.0;
    ProtocolRequirement protocol = ProtocolRequirement::heterogeneous;
};

enum class ChainStatus : std::uint8_t { pending, established, failed };

struct SlotAllocation {
    LinkId link_id = 0;
    std::size_t slot = 0;

    friend bool operator==(const SlotAllocation&, const SlotAllocation&) = default;
};

struct ChainRecord {
    ChainId chain_id = 0;
    std::uint32_t request_id = 0;
    std::vector<NodeId> physical_path;
    std::vector<NodeId> trusted_relays;
    std::vector<NodeId> untrusted_relays;
    std::vector<SlotAllocation> allocations;
    ChainStatus status = ChainStatus::pending;
    std::string failure_reason;
};

// Returns one human-readable entry per invariant breach; empty means valid.
std::vector<std::string> validate_topology(const PhysicalTopology& topo);

// Collapses every untrusted relay into a single pair-backed edge. Throws
// std::invalid_argument when validate_topology reports violations.
AbstractedTopology abstract_topology(const PhysicalTopology& topo);

}  // namespace qkdo
