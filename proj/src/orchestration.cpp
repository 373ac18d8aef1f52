#include "qkdo/orchestration.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace qkdo {

ResourceView make_resource_view(const PhysicalTopology& topo) {
    ResourceView view;
    for (const auto& link : topo.links) view.emplace(link.link_id, ResourceBitmap{});
    return view;
}

std::optional<std::vector<AbstractEdge>> compute_path(NodeId src, NodeId dst,
                                                      const AbstractedTopology& abstracted) {
    if (!abstracted.nodes.count(src) || !abstracted.nodes.count(dst)) return std::nullopt;
    if (src == dst) return std::vector<AbstractEdge>{};

    // Hop distance to dst for every node, then a greedy forward walk that
    // always picks the smallest-id next node keeps the node sequence
    // lexicographically minimal among equal-hop paths.
    constexpr unsigned unreachable = std::numeric_limits<unsigned>::max();
    std::map<NodeId, unsigned> dist;
    for (const auto& [n, _] : abstracted.nodes) dist[n] = unreachable;
    dist[dst] = 0;
    std::queue<NodeId> frontier;
    frontier.push(dst);
    while (!frontier.empty()) {
        NodeId cur = frontier.front();
        frontier.pop();
        for (const auto* e : abstracted.incident_edges(cur)) {
            NodeId next = e->other(cur);
            if (dist[next] == unreachable) {
                dist[next] = dist[cur] + 1;
                frontier.push(next);
            }
        }
    }
    if (dist[src] == unreachable) return std::nullopt;

    std::vector<AbstractEdge> path;
    NodeId cur = src;
    while (cur != dst) {
        const AbstractEdge* best = nullptr;
        NodeId best_next = 0;
        for (const auto* e : abstracted.incident_edges(cur)) {
            NodeId next = e->other(cur);
            if (dist[next] + 1 != dist[cur]) continue;
            if (!best || next < best_next) {
                best = e;
                best_next = next;
            }
        }
        path.push_back(*best);
        cur = best_next;
    }
    return path;
}

RelaySearch locate_relays(const std::vector<AbstractEdge>& path, NodeId src,
                          const PhysicalTopology& topo) {
    RelaySearch out;
    out.physical_path.push_back(src);
    NodeId cur = src;
    for (const auto& edge : path) {
        if (!edge.touches(cur))
            throw std::invalid_argument("locate_relays: disconnected abstract path");
        NodeId next = edge.other(cur);
        if (edge.collapsed_relay) {
            out.physical_path.push_back(*edge.collapsed_relay);
            out.untrusted.push_back(*edge.collapsed_relay);
        }
        out.physical_path.push_back(next);
        cur = next;
    }
    // Trusted relays are the interior physical-path nodes of that kind.
    for (std::size_t i = 1; i + 1 < out.physical_path.size(); ++i)
        if (topo.kind_of(out.physical_path[i]) == NodeKind::trusted_relay)
            out.trusted.push_back(out.physical_path[i]);
    return out;
}

AllocResult allocate_resources(const std::vector<NodeId>& physical_path,
                               double required_rate_kbps, ResourceView& view,
                               const PhysicalTopology& topo) {
    std::vector<SlotAllocation> chosen;
    ResourceView staged = view;

    for (std::size_t i = 0; i + 1 < physical_path.size(); ++i) {
        const QkdLink* link = topo.find_link(physical_path[i], physical_path[i + 1]);
        if (!link)
            throw std::invalid_argument("allocate_resources: path nodes " +
                                        std::to_string(physical_path[i]) + " and " +
                                        std::to_string(physical_path[i + 1]) +
                                        " share no physical link");
        if (link->key_rate_kbps < required_rate_kbps)
            return AllocFailure{AllocFailureKind::insufficient_rate, link->link_id,
                                "link " + std::to_string(link->link_id) + " offers " +
                                    std::to_string(link->key_rate_kbps) + " kbps, requested " +
                                    std::to_string(required_rate_kbps)};
        auto& bitmap = staged.at(link->link_id);
        auto slot = bitmap.first_free();
        if (!slot)
            return AllocFailure{AllocFailureKind::no_free_slot, link->link_id,
                                "link " + std::to_string(link->link_id) + " has no free slot"};
        bitmap.set(*slot);
        chosen.push_back({link->link_id, *slot});
    }

    view = std::move(staged);
    return chosen;
}

void release_allocations(const std::vector<SlotAllocation>& allocations, ResourceView& view) {
    for (const auto& a : allocations) {
        auto it = view.find(a.link_id);
        if (it != view.end()) it->second.clear(a.slot);
    }
}

}  // namespace qkdo
