#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qkdo/agent.hpp"
#include "qkdo/controller.hpp"
#include "qkdo/keyrelay.hpp"
#include "qkdo/northbound.hpp"
#include "qkdo/scenario.hpp"

namespace qkdo {

struct TestbedOptions {
    Scenario scenario;
    std::string scenario_path;       // required when subprocess_agents
    bool subprocess_agents = false;  // fork/exec the agent binary per node
    std::string agent_binary;        // required when subprocess_agents
    std::optional<std::string> trace_path;
    bool log_frames = false;
};

// Boots controller + northbound + one agent per scenario node, and shuts
// them down in reverse order.
class Testbed {
public:
    explicit Testbed(TestbedOptions options);
    ~Testbed();

    // Returns an error string on boot failure.
    std::optional<std::string> start();
    void stop();

    Controller& controller() { return *controller_; }
    const Scenario& scenario() const { return options_.scenario; }
    std::uint16_t northbound_port() const { return northbound_port_; }
    const std::string& northbound_host() const { return options_.scenario.northbound.host; }

    // Restarts one in-process agent; used to exercise re-registration.
    void restart_agent(NodeId node_id);

private:
    TestbedOptions options_;
    std::unique_ptr<Controller> controller_;
    std::unique_ptr<NorthboundServer> northbound_;
    std::uint16_t northbound_port_ = 0;

    struct AgentRun {
        NodeId node_id = 0;
        std::unique_ptr<Agent> agent;  // in-process
        std::thread thread;
        int pid = -1;  // subprocess
    };
    std::vector<AgentRun> agents_;

    void launch_agent(NodeId node_id);
    void stop_agent(AgentRun& run);
};

struct DemoChainResult {
    std::string label;
    bool established = false;
    ChainId chain_id = 0;
    std::vector<NodeId> path;
    ChainMetrics metrics;  // control_delay_ms filled from the operator clock
    std::string failure_reason;
    RelayOutcome relay;      // key relay run over the established chain
    bool relay_ok = false;   // destination recovered the global key bit-exactly
};

struct DemoReport {
    DemoChainResult conventional;
    DemoChainResult heterogeneous;
    std::string table;  // rendered comparison
};

// Replays the two demonstration requests: conventional 2->1 (BB84) and
// heterogeneous 2->3 (BB84+TF), both at 10 kbps, then runs the key relay
// over each established chain.
std::optional<DemoReport> run_demo(Testbed& testbed, std::string* error);

}  // namespace qkdo
