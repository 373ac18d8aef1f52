// Scenario runner: boots the full emulated testbed, replays the two
// demonstration chains and renders the performance comparison, or decodes a
// recorded southbound capture.
//
// Exit codes: 0 success, 2 scenario invalid, 3 boot failure,
// 4 orchestration failure, 5 corrupt capture.
#include <unistd.h>

#include <cstdio>
#include <filesystem>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkdo/testbed.hpp"
#include "qkdo/trace.hpp"

namespace {

std::string sibling_binary(const char* name) {
    std::error_code ec;
    auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (ec) return name;
    return (self.parent_path() / name).string();
}

int run_soak(qkdo::Testbed& testbed, int cycles) {
    auto baseline = testbed.controller().resource_view();
    for (int i = 0; i < cycles; ++i) {
        qkdo::NorthboundRequestDoc doc;
        doc.source = 2;
        doc.destination = 3;
        doc.required_rate_kbps = 10.0;
        doc.protocol = qkdo::ProtocolRequirement::heterogeneous;
        auto result = qkdo::operator_submit(doc, testbed.northbound_host(),
                                            testbed.northbound_port());
        if (!result || result->http_status != 200) {
            std::fprintf(stderr, "soak: cycle %d submit failed\n", i);
            return 4;
        }
        auto body = nlohmann::json::parse(result->body);
        if (body["status"] != "established") {
            std::fprintf(stderr, "soak: cycle %d not established: %s\n", i,
                         result->body.c_str());
            return 4;
        }
        if (!testbed.controller().release_chain(body["chain_id"].get<qkdo::ChainId>())) {
            std::fprintf(stderr, "soak: cycle %d release failed\n", i);
            return 4;
        }
        if (testbed.controller().resource_view() != baseline) {
            std::fprintf(stderr, "soak: cycle %d resource view not restored\n", i);
            return 4;
        }
    }
    std::printf("soak: %d establish/release cycles, resource view restored each time\n", cycles);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emulated QKD chain orchestration testbed"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Boot the testbed and run a scenario");
    std::string scenario_path = "scenarios/default.json";
    std::string mode = "demo";
    std::string trace_path;
    std::string agent_bin = sibling_binary("qkd-agent");
    std::uint32_t source = 2, dest = 3;
    double rate = 10.0;
    std::string protocol = "BB84+TF";
    std::uint64_t seed = 0;
    std::uint32_t agent_latency_ms = 0;
    int soak_cycles = 100;
    bool in_process = false;
    bool verbose = false;
    run->add_option("--scenario", scenario_path, "Scenario file path");
    run->add_option("--mode", mode, "demo | single | soak")
        ->check(CLI::IsMember({"demo", "single", "soak"}));
    run->add_option("--source", source, "Source QKD node (single mode)");
    run->add_option("--dest", dest, "Destination QKD node (single mode)");
    run->add_option("--rate", rate, "Required secure key rate in kbps (single mode)");
    run->add_option("--protocol", protocol, "BB84 | BB84+TF (single mode)")
        ->check(CLI::IsMember({"BB84", "BB84+TF"}));
    run->add_option("--trace", trace_path, "Record southbound frames to this capture file");
    run->add_option("--seed", seed, "Override the scenario key seed");
    run->add_option("--agent-latency-ms", agent_latency_ms,
                    "Override per-agent processing latency");
    run->add_option("--agent-bin", agent_bin, "Agent binary for subprocess mode");
    run->add_option("--soak-cycles", soak_cycles, "Cycles in soak mode");
    run->add_flag("--in-process", in_process, "Run agents as threads instead of subprocesses");
    run->add_flag("--verbose", verbose, "Hex-dump every southbound frame");

    auto* dump = app.add_subcommand("dump-trace", "Decode a recorded southbound capture");
    std::string capture_path;
    dump->add_option("capture", capture_path, "Capture file")->required();

    CLI11_PARSE(app, argc, argv);

    if (dump->parsed()) {
        try {
            std::string truncation;
            auto entries = qkdo::read_trace(capture_path, &truncation);
            std::fputs(qkdo::render_trace(entries).c_str(), stdout);
            if (!truncation.empty()) {
                std::fprintf(stderr, "corrupt-capture: %s\n", truncation.c_str());
                return 5;
            }
        } catch (const std::exception& e) {
            std::fprintf(stderr, "corrupt-capture: %s\n", e.what());
            return 5;
        }
        return 0;
    }

    qkdo::TestbedOptions options;
    try {
        options.scenario = qkdo::load_scenario(scenario_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "scenario-invalid: %s\n", e.what());
        return 2;
    }
    auto violations = qkdo::validate_topology(options.scenario.topology);
    if (!violations.empty()) {
        for (const auto& v : violations) std::fprintf(stderr, "scenario-invalid: %s\n", v.c_str());
        return 2;
    }
    if (seed != 0) options.scenario.key_seed = seed;
    if (run->count("--agent-latency-ms")) options.scenario.agent_latency_ms = agent_latency_ms;
    options.scenario_path = scenario_path;
    options.subprocess_agents = !in_process;
    options.agent_binary = agent_bin;
    options.log_frames = verbose;
    if (!trace_path.empty()) options.trace_path = trace_path;
    if (options.subprocess_agents && run->count("--agent-latency-ms"))
        std::fprintf(stderr, "note: latency override applies to in-process agents only\n");

    qkdo::Testbed testbed(options);
    if (auto err = testbed.start()) {
        std::fprintf(stderr, "%s\n", err->c_str());
        return 3;
    }

    if (mode == "soak") {
        int rc = run_soak(testbed, soak_cycles);
        testbed.stop();
        return rc;
    }

    if (mode == "single") {
        qkdo::NorthboundRequestDoc doc;
        doc.source = source;
        doc.destination = dest;
        doc.required_rate_kbps = rate;
        doc.protocol = protocol == "BB84" ? qkdo::ProtocolRequirement::conventional
                                          : qkdo::ProtocolRequirement::heterogeneous;
        auto result = qkdo::operator_submit(doc, testbed.northbound_host(),
                                            testbed.northbound_port());
        testbed.stop();
        if (!result) {
            std::fprintf(stderr, "orchestration-failure: transport\n");
            return 4;
        }
        std::printf("%s\n", result->body.c_str());
        std::printf("control delay: %.2f ms\n", result->control_delay_ms);
        auto body = nlohmann::json::parse(result->body, nullptr, false);
        bool ok = !body.is_discarded() && body.value("status", "") == "established";
        if (!ok) std::fprintf(stderr, "orchestration-failure\n");
        return ok ? 0 : 4;
    }

    // demo mode
    std::string error;
    auto report = qkdo::run_demo(testbed, &error);
    if (!report) {
        testbed.stop();
        std::fprintf(stderr, "orchestration-failure: %s\n", error.c_str());
        return 4;
    }

    std::fputs(report->table.c_str(), stdout);
    bool ok = true;
    for (const auto& chain : {report->conventional, report->heterogeneous}) {
        if (!chain.established) {
            std::fprintf(stderr, "orchestration-failure: %s: %s\n", chain.label.c_str(),
                         chain.failure_reason.c_str());
            ok = false;
            continue;
        }
        std::printf("\n%s custody audit:\n%s", chain.label.c_str(),
                    chain.relay.custody.render().c_str());
        if (!chain.relay_ok) {
            std::fprintf(stderr, "relay failure: %s destination did not recover the global key\n",
                         chain.label.c_str());
            ok = false;
        }
        for (const auto& [node, kind] : testbed.scenario().topology.nodes)
            if (kind == qkdo::NodeKind::untrusted_relay && chain.relay.custody.mentions(node)) {
                std::fprintf(stderr, "audit violation: untrusted relay %u held key material\n",
                             node);
                ok = false;
            }
    }
    testbed.stop();
    if (!trace_path.empty()) std::printf("\nsouthbound capture written to %s\n", trace_path.c_str());
    return ok ? 0 : 4;
}
