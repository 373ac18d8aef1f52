#include "qkdo/testbed.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace qkdo {

using nlohmann::json;

Testbed::Testbed(TestbedOptions options) : options_(std::move(options)) {}

Testbed::~Testbed() { stop(); }

void Testbed::launch_agent(NodeId node_id) {
    AgentRun run;
    run.node_id = node_id;
    if (options_.subprocess_agents) {
        std::string node_arg = std::to_string(node_id);
        std::string port_arg = std::to_string(controller_->southbound_port());
        pid_t pid = ::fork();
        if (pid == 0) {
            // Scenario files may carry port 0; the child gets the real port.
            ::execl(options_.agent_binary.c_str(), options_.agent_binary.c_str(), "--scenario",
                    options_.scenario_path.c_str(), "--node", node_arg.c_str(),
                    "--controller-port", port_arg.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        run.pid = pid;
    } else {
        AgentConfig config = agent_config_from_scenario(options_.scenario, node_id);
        config.controller.port = controller_->southbound_port();
        config.log_frames = options_.log_frames;
        run.agent = std::make_unique<Agent>(config);
        Agent* agent = run.agent.get();
        run.thread = std::thread([agent] { agent->run(); });
    }
    agents_.push_back(std::move(run));
}

void Testbed::stop_agent(AgentRun& run) {
    if (run.agent) {
        run.agent->stop();
        if (run.thread.joinable()) run.thread.join();
        run.agent.reset();
    }
    if (run.pid > 0) {
        ::kill(run.pid, SIGTERM);
        int status = 0;
        ::waitpid(run.pid, &status, 0);
        run.pid = -1;
    }
}

std::optional<std::string> Testbed::start() {
    ControllerConfig config;
    config.scenario = options_.scenario;
    config.log_frames = options_.log_frames;
    if (options_.trace_path) config.trace = std::make_shared<TraceRecorder>(*options_.trace_path);
    controller_ = std::make_unique<Controller>(std::move(config));
    try {
        controller_->start();
    } catch (const std::exception& e) {
        return std::string("boot-failure: ") + e.what();
    }

    for (const auto& [node_id, _] : options_.scenario.topology.nodes) launch_agent(node_id);

    if (auto err = controller_->wait_initialized(std::chrono::milliseconds(10000)))
        return "boot-failure: " + *err;

    northbound_ = std::make_unique<NorthboundServer>(*controller_,
                                                     options_.scenario.northbound.host,
                                                     options_.scenario.northbound.port);
    if (!northbound_->start()) return std::string("boot-failure: northbound bind failed");
    northbound_port_ = northbound_->port();
    return std::nullopt;
}

void Testbed::stop() {
    // Ordered shutdown: northbound first, then controller, then agents.
    if (northbound_) {
        northbound_->stop();
        northbound_.reset();
    }
    if (controller_) controller_->stop();
    for (auto& run : agents_) stop_agent(run);
    agents_.clear();
    controller_.reset();
}

void Testbed::restart_agent(NodeId node_id) {
    for (auto& run : agents_) {
        if (run.node_id != node_id || !run.agent) continue;
        stop_agent(run);
        AgentConfig config = agent_config_from_scenario(options_.scenario, node_id);
        config.controller.port = controller_->southbound_port();
        run.agent = std::make_unique<Agent>(config);
        Agent* agent = run.agent.get();
        run.thread = std::thread([agent] { agent->run(); });
        return;
    }
}

namespace {

std::optional<DemoChainResult> submit_demo_request(Testbed& testbed, const std::string& label,
                                                   NodeId src, NodeId dst,
                                                   ProtocolRequirement protocol,
                                                   std::string* error) {
    NorthboundRequestDoc doc;
    doc.source = src;
    doc.destination = dst;
    doc.required_rate_kbps = 10.0;
    doc.protocol = protocol;

    auto result = operator_submit(doc, testbed.northbound_host(), testbed.northbound_port());
    if (!result) {
        if (error) *error = label + ": northbound transport failure";
        return std::nullopt;
    }

    json body = json::parse(result->body, nullptr, false);
    if (body.is_discarded()) {
        if (error) *error = label + ": unparseable response body";
        return std::nullopt;
    }

    DemoChainResult out;
    out.label = label;
    out.established = body.value("status", "") == "established";
    if (body.contains("path")) out.path = body["path"].get<std::vector<NodeId>>();
    if (out.established) {
        out.chain_id = body["chain_id"].get<ChainId>();
        out.metrics.total_length_km = body["metrics"]["total_length_km"].get<double>();
        out.metrics.skc_kbps = body["metrics"]["skc_kbps"].get<double>();
        out.metrics.security.value = body["metrics"]["security_level"].get<double>();
        out.metrics.security.no_trusted_relay = body["metrics"]["no_trusted_relay"].get<bool>();
        out.metrics.trusted_relay_count = body["metrics"]["trusted_relay_count"].get<std::size_t>();
    } else {
        out.failure_reason = body.value("reason", "unknown");
    }
    out.metrics.control_delay_ms = result->control_delay_ms;
    return out;
}

}  // namespace

std::optional<DemoReport> run_demo(Testbed& testbed, std::string* error) {
    // The two demonstration paths share the 2-6 link and a port serves one
    // chain at a time, so each chain is measured, relayed and released in
    // turn.
    auto physical = testbed.controller().physical_topology();
    std::uint64_t seed = testbed.scenario().key_seed;

    auto run_one = [&](const std::string& label, NodeId src, NodeId dst,
                       ProtocolRequirement protocol) -> std::optional<DemoChainResult> {
        auto result = submit_demo_request(testbed, label, src, dst, protocol, error);
        if (!result) return std::nullopt;
        if (result->established) {
            if (auto record = testbed.controller().chain(result->chain_id)) {
                SecretKey global = generate_link_key(0xffffffff, seed);
                global.origin = "global";
                result->relay = relay_global_key(*record, physical, global, seed);
                result->relay_ok = result->relay.delivered == global;
            }
            testbed.controller().release_chain(result->chain_id);
        }
        return result;
    };

    auto conventional = run_one("Conventional (BB84)", 2, 1, ProtocolRequirement::conventional);
    if (!conventional) return std::nullopt;
    auto heterogeneous =
        run_one("Heterogeneous (BB84 & TF)", 2, 3, ProtocolRequirement::heterogeneous);
    if (!heterogeneous) return std::nullopt;

    DemoReport report;
    report.conventional = *conventional;
    report.heterogeneous = *heterogeneous;
    report.table = render_comparison({{report.conventional.label, report.conventional.metrics},
                                      {report.heterogeneous.label, report.heterogeneous.metrics}});
    return report;
}

}  // namespace qkdo
