#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qkdo/model.hpp"

namespace qkdo {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
};

struct ScenarioNode {
    NodeId node_id = 0;
    NodeKind kind = NodeKind::qkd_node;
};

// One emulation run: the physical topology plus the addresses everything
// binds or dials. See docs/scenario-format.md for the file syntax.
struct Scenario {
    std::string name;
    PhysicalTopology topology;
    Endpoint southbound;   // controller listen address; agents dial it
    Endpoint northbound;   // HTTP server bind address
    std::uint32_t agent_latency_ms = 20;
    std::uint64_t key_seed = 1;

    // Agent-local port numbering: ports 1..n in ascending link_id order of
    // the node's incident links. Port 0 means "no port" on the wire.
    std::map<std::uint32_t, LinkId> ports_of(NodeId node) const;
    std::uint32_t port_towards(NodeId node, NodeId peer) const;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

}  // namespace qkdo
