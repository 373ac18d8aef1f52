// Standalone controller + northbound server, serving until interrupted.
#include <atomic>
#include <csignal>
#include <cstdio>
#include <thread>

#include <CLI11.hpp>

#include "qkdo/controller.hpp"
#include "qkdo/northbound.hpp"
#include "qkdo/scenario.hpp"

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop.store(true); }
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SDN controller for emulated QKD chain orchestration"};
    std::string scenario_path;
    std::string trace_path;
    std::uint32_t timeout_ms = 5000;
    bool verbose = false;
    app.add_option("--scenario", scenario_path, "Scenario file path")->required();
    app.add_option("--trace", trace_path, "Record southbound frames to this capture file");
    app.add_option("--timeout-ms", timeout_ms, "Per-node response timeout");
    app.add_flag("--verbose", verbose, "Hex-dump every frame");
    CLI11_PARSE(app, argc, argv);

    try {
        qkdo::ControllerConfig config;
        config.scenario = qkdo::load_scenario(scenario_path);
        config.response_timeout = std::chrono::milliseconds(timeout_ms);
        config.log_frames = verbose;
        if (!trace_path.empty()) config.trace = std::make_shared<qkdo::TraceRecorder>(trace_path);

        qkdo::Controller controller(std::move(config));
        controller.start();
        std::fprintf(stderr, "controller: southbound listening on port %u\n",
                     controller.southbound_port());

        auto scenario = qkdo::load_scenario(scenario_path);
        qkdo::NorthboundServer northbound(controller, scenario.northbound.host,
                                          scenario.northbound.port);
        if (!northbound.start()) {
            std::fprintf(stderr, "controller: northbound bind failed\n");
            return 3;
        }
        std::fprintf(stderr, "controller: northbound listening on port %u\n", northbound.port());

        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));

        northbound.stop();
        controller.stop();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "controller: %s\n", e.what());
        return 2;
    }
    return 0;
}
