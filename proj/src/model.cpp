#include "qkdo/model.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <stdexcept>

namespace qkdo {

std::string to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::qkd_node: return "qkd_node";
        case NodeKind::trusted_relay: return "trusted_relay";
        case NodeKind::untrusted_relay: return "untrusted_relay";
    }
    return "unknown";
}

std::string to_string(ProtocolKind protocol) {
    switch (protocol) {
        case ProtocolKind::bb84: return "BB84";
        case ProtocolKind::tf: return "TF";
    }
    return "unknown";
}

std::string ResourceBitmap::to_hex() const {
    std::string out;
    out.reserve(byte_count * 2);
    static const char digits[] = "0123456789abcdef";
    for (auto b : bytes_) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

std::optional<NodeKind> PhysicalTopology::kind_of(NodeId n) const {
    auto it = nodes.find(n);
    if (it == nodes.end()) return std::nullopt;
    return it->second;
}

const QkdLink* PhysicalTopology::find_link(LinkId id) const {
    for (const auto& l : links)
        if (l.link_id == id) return &l;
    return nullptr;
}

const QkdLink* PhysicalTopology::find_link(NodeId a, NodeId b) const {
    for (const auto& l : links)
        if ((l.node_a == a && l.node_b == b) || (l.node_a == b && l.node_b == a)) return &l;
    return nullptr;
}

std::vector<const QkdLink*> PhysicalTopology::incident_links(NodeId n) const {
    std::vector<const QkdLink*> out;
    for (const auto& l : links)
        if (l.touches(n)) out.push_back(&l);
    return out;
}

std::vector<const AbstractEdge*> AbstractedTopology::incident_edges(NodeId n) const {
    std::vector<const AbstractEdge*> out;
    for (const auto& e : edges)
        if (e.touches(n)) out.push_back(&e);
    return out;
}

const AbstractEdge* AbstractedTopology::find_edge(NodeId a, NodeId b) const {
    for (const auto& e : edges)
        if ((e.node_a == a && e.node_b == b) || (e.node_a == b && e.node_b == a)) return &e;
    return nullptr;
}

namespace {

std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

}  // namespace

std::vector<std::string> validate_topology(const PhysicalTopology& topo) {
    std::vector<std::string> violations;

    std::set<LinkId> seen_links;
    for (const auto& link : topo.links) {
        if (!seen_links.insert(link.link_id).second)
            violations.push_back(fmt("link %u: duplicate link_id", link.link_id));
        if (link.node_a == link.node_b)
            violations.push_back(fmt("link %u: self-loop at node %u", link.link_id, link.node_a));
        for (NodeId end : {link.node_a, link.node_b})
            if (!topo.nodes.count(end))
                violations.push_back(fmt("link %u: endpoint %u not in topology", link.link_id, end));
        if (link.length_km < 0.0)
            violations.push_back(fmt("link %u: negative length", link.link_id));
        if (link.key_rate_kbps <= 0.0)
            violations.push_back(fmt("link %u: key rate must be positive", link.link_id));
    }

    // Parallel links would make the graph non-simple.
    for (std::size_t i = 0; i < topo.links.size(); ++i)
        for (std::size_t j = i + 1; j < topo.links.size(); ++j) {
            const auto& a = topo.links[i];
            const auto& b = topo.links[j];
            bool same = (a.node_a == b.node_a && a.node_b == b.node_b) ||
                        (a.node_a == b.node_b && a.node_b == b.node_a);
            if (same && a.node_a != a.node_b)
                violations.push_back(
                    fmt("links %u and %u: parallel edge between nodes %u and %u", a.link_id,
                        b.link_id, a.node_a, a.node_b));
        }

    for (const auto& link : topo.links) {
        auto ka = topo.kind_of(link.node_a);
        auto kb = topo.kind_of(link.node_b);
        bool has_ur = (ka == NodeKind::untrusted_relay) || (kb == NodeKind::untrusted_relay);
        bool both_ur = (ka == NodeKind::untrusted_relay) && (kb == NodeKind::untrusted_relay);
        if (link.protocol == ProtocolKind::tf) {
            if (!has_ur || both_ur)
                violations.push_back(
                    fmt("link %u: TF link must have an untrusted relay on exactly one endpoint",
                        link.link_id));
        } else if (has_ur) {
            violations.push_back(
                fmt("link %u: BB84 link may not touch an untrusted relay", link.link_id));
        }
    }

    for (const auto& [node, kind] : topo.nodes) {
        if (kind != NodeKind::untrusted_relay) continue;
        auto incident = topo.incident_links(node);
        if (incident.size() != 2)
            violations.push_back(fmt("node %u: untrusted relay has degree %zu, expected 2", node,
                                     incident.size()));
        // a non-TF incident link is already reported by the per-link check
    }

    // Every QKD node must reach every other QKD node.
    std::vector<NodeId> qkd_nodes;
    for (const auto& [node, kind] : topo.nodes)
        if (kind == NodeKind::qkd_node) qkd_nodes.push_back(node);
    if (qkd_nodes.size() >= 2) {
        std::set<NodeId> reached{qkd_nodes.front()};
        std::vector<NodeId> frontier{qkd_nodes.front()};
        while (!frontier.empty()) {
            NodeId cur = frontier.back();
            frontier.pop_back();
            for (const auto* l : topo.incident_links(cur)) {
                NodeId next = l->other(cur);
                if (reached.insert(next).second) frontier.push_back(next);
            }
        }
        for (NodeId n : qkd_nodes)
            if (!reached.count(n))
                violations.push_back(fmt("node %u: QKD node unreachable from node %u", n,
                                         qkd_nodes.front()));
    }

    return violations;
}

AbstractedTopology abstract_topology(const PhysicalTopology& topo) {
    auto violations = validate_topology(topo);
    if (!violations.empty())
        throw std::invalid_argument("malformed topology: " + violations.front());

    AbstractedTopology abstracted;
    for (const auto& [node, kind] : topo.nodes)
        if (kind != NodeKind::untrusted_relay) abstracted.nodes.emplace(node, kind);

    std::uint32_t next_edge_id = 1;
    std::set<LinkId> consumed;

    for (const auto& [node, kind] : topo.nodes) {
        if (kind != NodeKind::untrusted_relay) continue;
        auto incident = topo.incident_links(node);
        const QkdLink& first = *incident[0];
        const QkdLink& second = *incident[1];
        AbstractEdge edge;
        edge.edge_id = next_edge_id++;
        edge.node_a = first.other(node);
        edge.node_b = second.other(node);
        edge.length_km = first.length_km + second.length_km;
        edge.min_rate_kbps = std::min(first.key_rate_kbps, second.key_rate_kbps);
        edge.underlying = {first.link_id, second.link_id};
        edge.collapsed_relay = node;
        abstracted.edges.push_back(std::move(edge));
        consumed.insert(first.link_id);
        consumed.insert(second.link_id);
    }

    for (const auto& link : topo.links) {
        if (consumed.count(link.link_id)) continue;
        AbstractEdge edge;
        edge.edge_id = next_edge_id++;
        edge.node_a = link.node_a;
        edge.node_b = link.node_b;
        edge.length_km = link.length_km;
        edge.min_rate_kbps = link.key_rate_kbps;
        edge.underlying = {link.link_id};
        abstracted.edges.push_back(std::move(edge));
    }

    return abstracted;
}

}  // namespace qkdo
