#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qkdo/codec.hpp"
#include "qkdo/keyrelay.hpp"
#include "qkdo/model.hpp"
#include "qkdo/scenario.hpp"
#include "qkdo/transport.hpp"

namespace qkdo {

struct AgentPort {
    std::uint32_t port_no = 0;
    NodeId peer_node_id = 0;
    LinkId link_id = 0;
    double length_km = 0.0;
    ProtocolKind protocol = ProtocolKind::bb84;
    double key_rate_kbps = 0.0;
};

struct AgentConfig {
    NodeId node_id = 0;
    NodeKind kind = NodeKind::qkd_node;
    std::vector<AgentPort> ports;
    Endpoint controller;
    std::chrono::milliseconds processing_latency{20};
    std::uint64_t key_seed = 1;
    bool log_frames = false;  // hex-dump every frame to stderr
};

// Pre-stored node information plus addressing, derived from the scenario.
AgentConfig agent_config_from_scenario(const Scenario& scenario, NodeId node_id);

struct PortState {
    std::optional<ChainId> configured_chain;
    std::optional<std::size_t> resource_slot;
    std::deque<SecretKey> key_store;
};

// Emulated SDN-enabled QKD/relay node: dials the controller, completes the
// HELLO handshake, reports its pre-stored information, then serves chain
// configuration requests until stopped.
class Agent {
public:
    explicit Agent(AgentConfig config);

    // Serves until stop(); reconnects with backoff on transport loss.
    void run();
    void stop();

    // Pure configuration handler, exposed for direct unit testing.
    wire::ChainConfigResponseMsg handle_config(const wire::ChainConfigRequestMsg& msg);

    std::map<std::uint32_t, PortState> port_snapshot() const;
    std::string last_error() const;
    bool handshake_completed() const { return handshake_done_.load(); }

    const AgentConfig& config() const { return config_; }
    wire::NodeInfoReportMsg build_info_report(std::uint32_t xid) const;

private:
    bool serve_session(net::TcpStream& stream);
    void log_frame(const char* dir, const std::vector<std::uint8_t>& frame) const;

    AgentConfig config_;
    mutable std::mutex mutex_;
    std::map<std::uint32_t, PortState> ports_;
    std::string last_error_;
    std::atomic<bool> stop_requested_{false};
    std::atomic<bool> handshake_done_{false};
    std::atomic<int> session_fd_{-1};
    std::uint32_t next_xid_ = 1;
};

}  // namespace qkdo
