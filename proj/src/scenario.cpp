#include "qkdo/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qkdo {

namespace {

NodeKind parse_kind(const std::string& s) {
    if (s == "qkd_node") return NodeKind::qkd_node;
    if (s == "trusted_relay") return NodeKind::trusted_relay;
    if (s == "untrusted_relay") return NodeKind::untrusted_relay;
    throw std::runtime_error("scenario: unknown node kind '" + s + "'");
}

ProtocolKind parse_protocol(const std::string& s) {
    if (s == "BB84") return ProtocolKind::bb84;
    if (s == "TF") return ProtocolKind::tf;
    throw std::runtime_error("scenario: unknown link protocol '" + s + "'");
}

Endpoint parse_endpoint(const nlohmann::json& j) {
    Endpoint ep;
    ep.host = j.at("host").get<std::string>();
    ep.port = j.at("port").get<std::uint16_t>();
    return ep;
}

}  // namespace

std::map<std::uint32_t, LinkId> Scenario::ports_of(NodeId node) const {
    std::vector<LinkId> incident;
    for (const auto& l : topology.links)
        if (l.touches(node)) incident.push_back(l.link_id);
    std::sort(incident.begin(), incident.end());
    std::map<std::uint32_t, LinkId> ports;
    std::uint32_t next = 1;
    for (LinkId id : incident) ports.emplace(next++, id);
    return ports;
}

std::uint32_t Scenario::port_towards(NodeId node, NodeId peer) const {
    for (const auto& [port, link_id] : ports_of(node)) {
        const QkdLink* l = topology.find_link(link_id);
        if (l && l->other(node) == peer) return port;
    }
    return 0;
}

Scenario parse_scenario(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    Scenario sc;
    sc.name = j.value("name", "unnamed");

    for (const auto& n : j.at("nodes")) {
        ScenarioNode node;
        node.node_id = n.at("id").get<NodeId>();
        node.kind = parse_kind(n.at("kind").get<std::string>());
        if (!sc.topology.nodes.emplace(node.node_id, node.kind).second)
            throw std::runtime_error("scenario: duplicate node id " +
                                     std::to_string(node.node_id));
    }

    for (const auto& l : j.at("links")) {
        QkdLink link;
        link.link_id = l.at("id").get<LinkId>();
        link.node_a = l.at("a").get<NodeId>();
        link.node_b = l.at("b").get<NodeId>();
        link.length_km = l.at("length_km").get<double>();
        link.protocol = parse_protocol(l.at("protocol").get<std::string>());
        link.key_rate_kbps = l.at("key_rate_kbps").get<double>();
        sc.topology.links.push_back(link);
    }

    sc.southbound = parse_endpoint(j.at("southbound"));
    sc.northbound = parse_endpoint(j.at("northbound"));
    sc.agent_latency_ms = j.value("agent_latency_ms", 20u);
    sc.key_seed = j.value("key_seed", std::uint64_t{1});
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scenario: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text);
}

}  // namespace qkdo
