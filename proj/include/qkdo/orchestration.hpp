#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkdo/model.hpp"

namespace qkdo {

using ResourceView = std::map<LinkId, ResourceBitmap>;

ResourceView make_resource_view(const PhysicalTopology& topo);

// Minimum-hop path on the abstracted graph, Dijkstra with hop count as the
// metric. Ties break to the lexicographically smallest node-id sequence.
// nullopt when src and dst are disconnected.
std::optional<std::vector<AbstractEdge>> compute_path(NodeId src, NodeId dst,
                                                      const AbstractedTopology& abstracted);

struct RelaySearch {
    std::vector<NodeId> trusted;
    std::vector<NodeId> untrusted;
    std::vector<NodeId> physical_path;
};

// Expands pair-backed edges to reinsert their untrusted relays and collects
// the relays along the path in traversal order.
RelaySearch locate_relays(const std::vector<AbstractEdge>& path, NodeId src,
                          const PhysicalTopology& topo);

enum class AllocFailureKind { insufficient_rate, no_free_slot };

struct AllocFailure {
    AllocFailureKind kind;
    LinkId link_id;
    std::string detail;
};

using AllocResult = std::variant<std::vector<SlotAllocation>, AllocFailure>;

// First-fit: the lowest-index free slot on every path link. Atomic — the
// view is only mutated when every link can be satisfied.
AllocResult allocate_resources(const std::vector<NodeId>& physical_path,
                               double required_rate_kbps, ResourceView& view,
                               const PhysicalTopology& topo);

void release_allocations(const std::vector<SlotAllocation>& allocations, ResourceView& view);

}  // namespace qkdo
