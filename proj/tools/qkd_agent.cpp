// Standalone SDN agent for one emulated QKD/relay node.
#include <csignal>
#include <cstdio>

#include <CLI11.hpp>

#include "qkdo/agent.hpp"
#include "qkdo/scenario.hpp"

namespace {
qkdo::Agent* g_agent = nullptr;
void on_signal(int) {
    if (g_agent) g_agent->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emulated SDN-enabled QKD/relay node agent"};
    std::string scenario_path;
    std::uint32_t node_id = 0;
    std::string controller_host;
    std::uint16_t controller_port = 0;
    std::uint32_t latency_ms = 0;
    bool verbose = false;
    app.add_option("--scenario", scenario_path, "Scenario file path")->required();
    app.add_option("--node", node_id, "Node id to emulate")->required();
    app.add_option("--controller-host", controller_host, "Override controller host");
    app.add_option("--controller-port", controller_port, "Override controller port");
    app.add_option("--latency-ms", latency_ms, "Override per-message processing latency");
    app.add_flag("--verbose", verbose, "Hex-dump every frame");
    CLI11_PARSE(app, argc, argv);

    try {
        auto scenario = qkdo::load_scenario(scenario_path);
        auto config = qkdo::agent_config_from_scenario(scenario, node_id);
        if (!controller_host.empty()) config.controller.host = controller_host;
        if (controller_port != 0) config.controller.port = controller_port;
        if (app.count("--latency-ms")) config.processing_latency = std::chrono::milliseconds(latency_ms);
        config.log_frames = verbose;

        qkdo::Agent agent(config);
        g_agent = &agent;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        if (verbose)
            std::fprintf(stderr, "agent %u: dialing %s:%u\n", node_id,
                         config.controller.host.c_str(), config.controller.port);
        agent.run();
        if (!agent.last_error().empty()) {
            std::fprintf(stderr, "agent %u: %s\n", node_id, agent.last_error().c_str());
            return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "agent: %s\n", e.what());
        return 2;
    }
    return 0;
}
