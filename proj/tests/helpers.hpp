#pragma once

#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "qkdo/model.hpp"
#include "qkdo/scenario.hpp"

namespace qkdo::test {

inline Scenario default_scenario() {
    return load_scenario(std::string(QKDO_SOURCE_DIR) + "/scenarios/default.json");
}

inline PhysicalTopology default_topology() { return default_scenario().topology; }

// Independent hop-count oracle: plain BFS on the abstract graph.
inline std::optional<unsigned> bfs_hops(NodeId src, NodeId dst,
                                        const AbstractedTopology& graph) {
    if (!graph.nodes.count(src) || !graph.nodes.count(dst)) return std::nullopt;
    std::map<NodeId, unsigned> dist;
    dist[src] = 0;
    std::queue<NodeId> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
        NodeId cur = frontier.front();
        frontier.pop();
        if (cur == dst) return dist[cur];
        for (const auto* e : graph.incident_edges(cur)) {
            NodeId next = e->other(cur);
            if (!dist.count(next)) {
                dist[next] = dist[cur] + 1;
                frontier.push(next);
            }
        }
    }
    return std::nullopt;
}

// Random connected abstract graph with up to max_nodes QKD nodes.
inline AbstractedTopology random_abstract_graph(std::mt19937& rng, std::size_t max_nodes = 8) {
    std::uniform_int_distribution<std::size_t> node_count(2, max_nodes);
    std::size_t n = node_count(rng);
    AbstractedTopology graph;
    for (NodeId i = 1; i <= n; ++i) graph.nodes.emplace(i, NodeKind::qkd_node);

    std::uint32_t edge_id = 1;
    auto add_edge = [&](NodeId a, NodeId b) {
        if (graph.find_edge(a, b)) return;
        AbstractEdge e;
        e.edge_id = edge_id++;
        e.node_a = a;
        e.node_b = b;
        e.length_km = 1.0;
        e.min_rate_kbps = 1.0;
        e.underlying = {e.edge_id};
        graph.edges.push_back(e);
    };
    // random spanning tree, then extra edges
    for (NodeId i = 2; i <= n; ++i) {
        std::uniform_int_distribution<NodeId> pick(1, i - 1);
        add_edge(i, pick(rng));
    }
    std::uniform_int_distribution<int> extra_count(0, static_cast<int>(n));
    int extras = extra_count(rng);
    std::uniform_int_distribution<NodeId> any(1, static_cast<NodeId>(n));
    for (int i = 0; i < extras; ++i) {
        NodeId a = any(rng), b = any(rng);
        if (a != b) add_edge(a, b);
    }
    return graph;
}

// Random valid physical topology with a few untrusted relays, for
// abstraction property tests.
inline PhysicalTopology random_physical_topology(std::mt19937& rng) {
    PhysicalTopology topo;
    std::uniform_int_distribution<std::size_t> base_count(2, 6);
    std::size_t n = base_count(rng);
    for (NodeId i = 1; i <= n; ++i)
        topo.nodes.emplace(i, i <= 2 ? NodeKind::qkd_node
                                     : (rng() % 2 ? NodeKind::trusted_relay
                                                  : NodeKind::qkd_node));

    LinkId link_id = 1;
    auto add_link = [&](NodeId a, NodeId b, ProtocolKind protocol) {
        if (topo.find_link(a, b)) return false;
        QkdLink l;
        l.link_id = link_id++;
        l.node_a = a;
        l.node_b = b;
        l.length_km = 1.0 + static_cast<double>(rng() % 100);
        l.protocol = protocol;
        l.key_rate_kbps = 1.0 + static_cast<double>(rng() % 50);
        topo.links.push_back(l);
        return true;
    };

    for (NodeId i = 2; i <= n; ++i) {
        std::uniform_int_distribution<NodeId> pick(1, i - 1);
        add_link(i, pick(rng), ProtocolKind::bb84);
    }
    std::uniform_int_distribution<NodeId> any(1, static_cast<NodeId>(n));
    for (std::size_t i = 0; i < n / 2; ++i) {
        NodeId a = any(rng), b = any(rng);
        if (a != b) add_link(a, b, ProtocolKind::bb84);
    }

    // attach untrusted relays between random distinct base nodes
    std::uniform_int_distribution<int> ur_count(0, 2);
    int urs = ur_count(rng);
    NodeId next_node = static_cast<NodeId>(n + 1);
    for (int i = 0; i < urs; ++i) {
        NodeId a = any(rng), b = any(rng);
        if (a == b) continue;
        NodeId ur = next_node++;
        topo.nodes.emplace(ur, NodeKind::untrusted_relay);
        add_link(a, ur, ProtocolKind::tf);
        add_link(ur, b, ProtocolKind::tf);
    }
    return topo;
}

}  // namespace qkdo::test
