#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qkdo/codec.hpp"
#include "qkdo/metrics.hpp"
#include "qkdo/model.hpp"
#include "qkdo/orchestration.hpp"
#include "qkdo/scenario.hpp"
#include "qkdo/trace.hpp"
#include "qkdo/transport.hpp"

namespace qkdo {

enum class SessionState : std::uint8_t { connected, handshake_done, info_received };

struct AgentSession {
    NodeId node_id = 0;
    net::TcpStream stream;
    SessionState state = SessionState::connected;
    std::uint32_t last_xid = 0;
    std::map<NodeId, std::uint32_t> port_towards;  // peer node -> local port number
};

enum class OrchestrationError : std::uint8_t {
    none,
    invalid_request,
    no_path,
    insufficient_rate,
    no_free_slot,
    node_config_failed,
    timeout,
    internal,
};

std::string to_string(OrchestrationError err);

struct ChainResponse {
    bool established = false;
    ChainId chain_id = 0;
    OrchestrationError error = OrchestrationError::none;
    std::string reason;
    std::vector<NodeId> path;
    ChainMetrics metrics;
};

struct ControllerConfig {
    Scenario scenario;
    std::chrono::milliseconds response_timeout{5000};
    std::shared_ptr<TraceRecorder> trace;
    bool log_frames = false;
};

// The SDN controller: accepts agent sessions, assembles and abstracts the
// topology from node info reports, and orchestrates chains over the
// southbound wire protocol. Orchestration requests are handled one at a
// time; agent registration runs on its own accept thread.
class Controller {
public:
    explicit Controller(ControllerConfig config);
    ~Controller();

    Controller(const Controller&) = delete;
    Controller& operator=(const Controller&) = delete;

    // Binds the southbound listener (port 0 picks an ephemeral port) and
    // starts accepting agents.
    void start();
    void stop();

    std::uint16_t southbound_port() const { return southbound_port_; }

    // Blocks until every scenario node has registered and the topology is
    // assembled. Returns an error naming the missing node on timeout, or an
    // inconsistent-report diagnosis.
    std::optional<std::string> wait_initialized(std::chrono::milliseconds timeout);

    ChainResponse orchestrate(const ChainRequest& request);

    // Frees the chain's slots, tears down its nodes, removes the record.
    bool release_chain(ChainId chain_id);

    bool initialized() const { return initialized_.load(); }
    PhysicalTopology physical_topology() const;
    AbstractedTopology abstracted_topology() const;
    ResourceView resource_view() const;
    std::vector<ChainRecord> chains() const;
    std::optional<ChainRecord> chain(ChainId chain_id) const;
    std::vector<std::string> event_log() const;
    std::vector<SessionState> session_states() const;
    std::string init_error() const;

private:
    struct PendingConfig {
        NodeId node_id;
        std::uint32_t xid;
        std::vector<std::uint8_t> frame;
    };

    void accept_loop();
    bool register_agent(net::TcpStream stream);
    std::optional<std::string> assemble_topology_locked();
    void note_event(const std::string& event);

    PendingConfig build_config(NodeId node, ChainId chain, std::uint32_t input_port,
                               std::uint32_t output_port, const ResourceBitmap& bitmap);
    void send_config(const PendingConfig& config);

    // Awaits one matching response per pending config; any response arrival
    // order, matched by xid. Returns the failing response or a timeout.
    std::optional<ChainResponse> await_responses(std::vector<PendingConfig> pending,
                                                 ChainId chain_id);
    void teardown_nodes(const std::vector<NodeId>& nodes, ChainId chain_id);

    ControllerConfig config_;
    net::TcpListener listener_;
    std::uint16_t southbound_port_ = 0;
    std::thread accept_thread_;
    std::atomic<bool> stop_requested_{false};
    std::atomic<bool> initialized_{false};

    mutable std::mutex state_mutex_;
    std::map<NodeId, AgentSession> sessions_;
    std::map<NodeId, wire::NodeInfoReportMsg> reports_;
    PhysicalTopology physical_;
    AbstractedTopology abstracted_;
    ResourceView resource_view_;
    std::map<ChainId, ChainRecord> chains_;
    ChainId next_chain_id_ = 1;
    std::string init_error_;
    mutable std::mutex events_mutex_;
    std::vector<std::string> events_;

    std::mutex orchestrate_mutex_;  // requests handled one by one
};

}  // namespace qkdo
