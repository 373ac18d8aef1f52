#include "qkdo/agent.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace qkdo {

AgentConfig agent_config_from_scenario(const Scenario& scenario, NodeId node_id) {
    auto kind = scenario.topology.kind_of(node_id);
    if (!kind)
        throw std::runtime_error("agent: node " + std::to_string(node_id) + " not in scenario");

    AgentConfig config;
    config.node_id = node_id;
    config.kind = *kind;
    config.controller = scenario.southbound;
    config.processing_latency = std::chrono::milliseconds(scenario.agent_latency_ms);
    config.key_seed = scenario.key_seed;

    for (const auto& [port_no, link_id] : scenario.ports_of(node_id)) {
        const QkdLink* link = scenario.topology.find_link(link_id);
        AgentPort p;
        p.port_no = port_no;
        p.peer_node_id = link->other(node_id);
        p.link_id = link_id;
        p.length_km = link->length_km;
        p.protocol = link->protocol;
        p.key_rate_kbps = link->key_rate_kbps;
        config.ports.push_back(p);
    }
    return config;
}

Agent::Agent(AgentConfig config) : config_(std::move(config)) {
    for (const auto& p : config_.ports) ports_.emplace(p.port_no, PortState{});
}

wire::NodeInfoReportMsg Agent::build_info_report(std::uint32_t xid) const {
    wire::NodeInfoReportMsg report;
    report.xid = xid;
    report.node_id = config_.node_id;
    report.node_kind = static_cast<std::uint8_t>(config_.kind);
    for (const auto& p : config_.ports) {
        wire::PortInfo info;
        info.port_no = p.port_no;
        info.peer_node_id = p.peer_node_id;
        info.length_dm = static_cast<std::uint32_t>(std::llround(p.length_km * 10000.0));
        info.protocol = static_cast<std::uint8_t>(p.protocol);
        info.key_rate_bps = static_cast<std::uint32_t>(std::llround(p.key_rate_kbps * 1000.0));
        report.ports.push_back(info);
    }
    return report;
}

wire::ChainConfigResponseMsg Agent::handle_config(const wire::ChainConfigRequestMsg& msg) {
    wire::ChainConfigResponseMsg resp;
    resp.xid = msg.xid;
    resp.chain_id = msg.chain_id;
    resp.node_id = config_.node_id;

    std::lock_guard lock(mutex_);

    bool chain_present = std::any_of(ports_.begin(), ports_.end(), [&](const auto& kv) {
        return kv.second.configured_chain == msg.chain_id;
    });

    // An all-zero resource bitmap on an already-configured chain is a
    // teardown; on a fresh chain it configures ports without a slot (the
    // chain-endpoint side carries no outgoing link).
    if (!msg.resource_units.any() && chain_present) {
        for (auto& [port_no, state] : ports_)
            if (state.configured_chain == msg.chain_id) state = PortState{};
        resp.status = wire::status_ok;
        return resp;
    }

    for (std::uint32_t port : {msg.input_port, msg.output_port}) {
        if (port == 0) continue;  // port 0 = chain endpoint side, no port
        auto it = ports_.find(port);
        if (it == ports_.end()) {
            resp.status = wire::status_unknown_port;
            return resp;
        }
        if (it->second.configured_chain && *it->second.configured_chain != msg.chain_id) {
            resp.status = wire::status_node_busy;
            return resp;
        }
    }

    for (std::uint32_t port : {msg.input_port, msg.output_port}) {
        if (port == 0) continue;
        ports_.at(port).configured_chain = msg.chain_id;
    }

    if (msg.output_port != 0 && msg.resource_units.any()) {
        auto& state = ports_.at(msg.output_port);
        state.resource_slot = msg.resource_units.first_set();
        // Key-plane emulation hook: the outgoing link starts producing keys.
        auto port_cfg = std::find_if(config_.ports.begin(), config_.ports.end(),
                                            [&](const AgentPort& p) {
                                                return p.port_no == msg.output_port;
                                            });
        state.key_store.push_back(generate_link_key(port_cfg->link_id, config_.key_seed));
    }

    resp.status = wire::status_ok;
    return resp;
}

std::map<std::uint32_t, PortState> Agent::port_snapshot() const {
    std::lock_guard lock(mutex_);
    return ports_;
}

std::string Agent::last_error() const {
    std::lock_guard lock(mutex_);
    return last_error_;
}

void Agent::log_frame(const char* dir, const std::vector<std::uint8_t>& frame) const {
    if (!config_.log_frames) return;
    std::string text = "agent " + std::to_string(config_.node_id) + " " + dir + "\n" +
                       wire::hex_dump(frame);
    std::fputs(text.c_str(), stderr);
}

bool Agent::serve_session(net::TcpStream& stream) {
    session_fd_.store(stream.fd());

    auto hello = wire::encode(wire::AnyMsg{wire::HelloMsg{next_xid_++}});
    stream.write_frame(hello);
    log_frame("sent", hello);

    auto reply = stream.read_frame(std::chrono::milliseconds(5000));
    if (!reply) return false;
    log_frame("received", *reply);
    if (reply->size() < 1 || (*reply)[0] != wire::protocol_version) {
        std::lock_guard lock(mutex_);
        last_error_ = "handshake-version-mismatch: controller sent version " +
                      std::to_string(reply->empty() ? 0 : (*reply)[0]);
        return true;  // fatal, do not retry
    }
    auto decoded = wire::decode(*reply);
    if (!std::holds_alternative<wire::AnyMsg>(decoded) ||
        !std::holds_alternative<wire::HelloMsg>(std::get<wire::AnyMsg>(decoded))) {
        std::lock_guard lock(mutex_);
        last_error_ = "handshake: expected HELLO from controller";
        return true;
    }

    auto report = wire::encode(wire::AnyMsg{build_info_report(next_xid_++)});
    stream.write_frame(report);
    log_frame("sent", report);
    handshake_done_.store(true);

    while (!stop_requested_.load()) {
        auto frame = stream.read_frame(std::chrono::milliseconds(200));
        if (!frame) {
            if (stream.valid()) continue;  // timeout, poll stop flag
            return false;
        }
        log_frame("received", *frame);
        auto msg = wire::decode(*frame);
        if (const auto* err = std::get_if<wire::DecodeError>(&msg)) {
            std::lock_guard lock(mutex_);
            last_error_ = "decode: " + err->detail;
            continue;
        }
        const auto& any = std::get<wire::AnyMsg>(msg);
        if (const auto* req = std::get_if<wire::ChainConfigRequestMsg>(&any)) {
            std::this_thread::sleep_for(config_.processing_latency);
            auto resp = wire::encode(wire::AnyMsg{handle_config(*req)});
            stream.write_frame(resp);
            log_frame("sent", resp);
        }
        // Other message types are valid wire traffic but nothing to do here.
    }
    return true;
}

void Agent::run() {
    auto backoff = std::chrono::milliseconds(50);
    while (!stop_requested_.load()) {
        auto stream = net::TcpStream::connect(config_.controller.host, config_.controller.port);
        if (!stream) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, std::chrono::milliseconds(1000));
            continue;
        }
        backoff = std::chrono::milliseconds(50);
        bool fatal = false;
        try {
            fatal = serve_session(*stream);
        } catch (const std::exception& e) {
            std::lock_guard lock(mutex_);
            last_error_ = e.what();
        }
        session_fd_.store(-1);
        handshake_done_.store(false);
        if (fatal) return;
    }
}

void Agent::stop() {
    stop_requested_.store(true);
    int fd = session_fd_.load();
    if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
}

}  // namespace qkdo
