#include "qkdo/controller.hpp"

#include <poll.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qkdo {

namespace {

constexpr auto registration_timeout = std::chrono::milliseconds(3000);

std::uint32_t km_to_dm(double km) { return static_cast<std::uint32_t>(std::llround(km * 10000.0)); }
std::uint32_t kbps_to_bps(double kbps) {
    return static_cast<std::uint32_t>(std::llround(kbps * 1000.0));
}

}  // namespace

std::string to_string(OrchestrationError err) {
    switch (err) {
        case OrchestrationError::none: return "none";
        case OrchestrationError::invalid_request: return "invalid-request";
        case OrchestrationError::no_path: return "no-path";
        case OrchestrationError::insufficient_rate: return "insufficient-rate";
        case OrchestrationError::no_free_slot: return "no-free-slot";
        case OrchestrationError::node_config_failed: return "node-config-failed";
        case OrchestrationError::timeout: return "timeout";
        case OrchestrationError::internal: return "internal";
    }
    return "unknown";
}

Controller::Controller(ControllerConfig config) : config_(std::move(config)) {}

Controller::~Controller() { stop(); }

void Controller::start() {
    listener_ = net::TcpListener::bind(config_.scenario.southbound.host,
                                       config_.scenario.southbound.port);
    southbound_port_ = listener_.local_port();
    stop_requested_.store(false);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void Controller::stop() {
    stop_requested_.store(true);
    if (accept_thread_.joinable()) accept_thread_.join();
    listener_.close();
    std::lock_guard lock(state_mutex_);
    sessions_.clear();
}

void Controller::accept_loop() {
    while (!stop_requested_.load()) {
        auto stream = listener_.accept(std::chrono::milliseconds(100));
        if (!stream) continue;
        try {
            register_agent(std::move(*stream));
        } catch (const std::exception& e) {
            std::lock_guard lock(state_mutex_);
            init_error_ = e.what();
        }
    }
}

bool Controller::register_agent(net::TcpStream stream) {
    auto hello_frame = stream.read_frame(registration_timeout);
    if (!hello_frame) return false;
    if (config_.trace) config_.trace->record(TraceDirection::agent_to_controller, *hello_frame);
    auto hello = wire::decode(*hello_frame);
    if (!std::holds_alternative<wire::AnyMsg>(hello) ||
        !std::holds_alternative<wire::HelloMsg>(std::get<wire::AnyMsg>(hello)))
        return false;

    auto reply = wire::encode(wire::AnyMsg{wire::HelloMsg{0}});
    stream.write_frame(reply);
    if (config_.trace) config_.trace->record(TraceDirection::controller_to_agent, reply);

    auto report_frame = stream.read_frame(registration_timeout);
    if (!report_frame) return false;
    if (config_.trace) config_.trace->record(TraceDirection::agent_to_controller, *report_frame);
    auto decoded = wire::decode(*report_frame);
    if (!std::holds_alternative<wire::AnyMsg>(decoded)) return false;
    const auto* report = std::get_if<wire::NodeInfoReportMsg>(&std::get<wire::AnyMsg>(decoded));
    if (!report) return false;

    std::lock_guard lock(state_mutex_);
    if (!config_.scenario.topology.nodes.count(report->node_id)) {
        init_error_ = "unknown node " + std::to_string(report->node_id) + " registered";
        return false;
    }

    AgentSession session;
    session.node_id = report->node_id;
    session.stream = std::move(stream);
    session.state = SessionState::info_received;
    for (const auto& p : report->ports) session.port_towards[p.peer_node_id] = p.port_no;
    sessions_[report->node_id] = std::move(session);
    reports_[report->node_id] = *report;
    note_event("agent " + std::to_string(report->node_id) + " registered");

    if (reports_.size() == config_.scenario.topology.nodes.size() && !initialized_.load()) {
        auto err = assemble_topology_locked();
        if (err)
            init_error_ = *err;
        else
            initialized_.store(true);
    }
    return true;
}

std::optional<std::string> Controller::assemble_topology_locked() {
    PhysicalTopology assembled;
    assembled.nodes = config_.scenario.topology.nodes;

    for (const auto& scenario_link : config_.scenario.topology.links) {
        const wire::PortInfo* side_a = nullptr;
        const wire::PortInfo* side_b = nullptr;
        for (const auto& p : reports_.at(scenario_link.node_a).ports)
            if (p.peer_node_id == scenario_link.node_b) side_a = &p;
        for (const auto& p : reports_.at(scenario_link.node_b).ports)
            if (p.peer_node_id == scenario_link.node_a) side_b = &p;
        if (!side_a || !side_b)
            return "inconsistent-report: link " + std::to_string(scenario_link.link_id) +
                   " missing from an endpoint's report";
        if (side_a->length_dm != side_b->length_dm ||
            side_a->key_rate_bps != side_b->key_rate_bps || side_a->protocol != side_b->protocol)
            return "inconsistent-report: link " + std::to_string(scenario_link.link_id) +
                   " endpoints disagree on length/rate/protocol";

        QkdLink link;
        link.link_id = scenario_link.link_id;
        link.node_a = scenario_link.node_a;
        link.node_b = scenario_link.node_b;
        link.length_km = side_a->length_dm / 10000.0;
        link.protocol = static_cast<ProtocolKind>(side_a->protocol);
        link.key_rate_kbps = side_a->key_rate_bps / 1000.0;
        assembled.links.push_back(link);
    }

    auto violations = validate_topology(assembled);
    if (!violations.empty()) return "reported topology invalid: " + violations.front();

    physical_ = std::move(assembled);
    abstracted_ = abstract_topology(physical_);
    resource_view_ = make_resource_view(physical_);
    note_event("topology assembled");
    return std::nullopt;
}

std::optional<std::string> Controller::wait_initialized(std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (initialized_.load()) return std::nullopt;
        {
            std::lock_guard lock(state_mutex_);
            if (!init_error_.empty()) return init_error_;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    std::lock_guard lock(state_mutex_);
    for (const auto& [node, kind] : config_.scenario.topology.nodes)
        if (!reports_.count(node)) return "agent-unreachable: node " + std::to_string(node);
    return "initialization timed out";
}

Controller::PendingConfig Controller::build_config(NodeId node, ChainId chain,
                                                   std::uint32_t input_port,
                                                   std::uint32_t output_port,
                                                   const ResourceBitmap& bitmap) {
    wire::ChainConfigRequestMsg msg;
    {
        std::lock_guard lock(state_mutex_);
        msg.xid = ++sessions_.at(node).last_xid;
    }
    msg.chain_id = chain;
    msg.node_id = node;
    msg.input_port = input_port;
    msg.output_port = output_port;
    msg.resource_units = bitmap;
    return PendingConfig{node, msg.xid, wire::encode(wire::AnyMsg{msg})};
}

void Controller::send_config(const PendingConfig& config) {
    if (config_.trace)
        config_.trace->record(TraceDirection::controller_to_agent, config.frame);
    if (config_.log_frames)
        std::fputs(("controller sent\n" + wire::hex_dump(config.frame)).c_str(), stderr);
    std::lock_guard lock(state_mutex_);
    sessions_.at(config.node_id).stream.write_frame(config.frame);
}

std::optional<ChainResponse> Controller::await_responses(std::vector<PendingConfig> pending,
                                                         ChainId chain_id) {
    auto deadline = std::chrono::steady_clock::now() + config_.response_timeout;
    for (const auto& p : pending) {
        for (;;) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                ChainResponse fail;
                fail.error = OrchestrationError::timeout;
                fail.reason = "timeout: node " + std::to_string(p.node_id) +
                              " did not respond within " +
                              std::to_string(config_.response_timeout.count()) + " ms";
                return fail;
            }
            net::TcpStream* stream = nullptr;
            {
                std::lock_guard lock(state_mutex_);
                auto it = sessions_.find(p.node_id);
                if (it != sessions_.end() && it->second.stream.valid())
                    stream = &it->second.stream;
            }
            if (!stream) {
                ChainResponse fail;
                fail.error = OrchestrationError::timeout;
                fail.reason = "session lost: node " + std::to_string(p.node_id);
                return fail;
            }
            auto frame = stream->read_frame(left);
            if (!frame) continue;
            if (config_.trace)
                config_.trace->record(TraceDirection::agent_to_controller, *frame);
            if (config_.log_frames)
                std::fputs(("controller received\n" + wire::hex_dump(*frame)).c_str(), stderr);
            auto decoded = wire::decode(*frame);
            if (!std::holds_alternative<wire::AnyMsg>(decoded)) continue;
            const auto* resp =
                std::get_if<wire::ChainConfigResponseMsg>(&std::get<wire::AnyMsg>(decoded));
            if (!resp || resp->xid != p.xid || resp->chain_id != chain_id) continue;
            if (resp->status != wire::status_ok) {
                ChainResponse fail;
                fail.error = OrchestrationError::node_config_failed;
                fail.reason = "node-config-failed: node " + std::to_string(resp->node_id) +
                              " status " + std::to_string(resp->status);
                return fail;
            }
            break;  // this pending config is acknowledged
        }
    }
    return std::nullopt;
}

void Controller::teardown_nodes(const std::vector<NodeId>& nodes, ChainId chain_id) {
    std::vector<PendingConfig> pending;
    for (NodeId node : nodes) {
        try {
            auto cfg = build_config(node, chain_id, 0, 0, ResourceBitmap{});
            send_config(cfg);
            pending.push_back(std::move(cfg));
        } catch (const std::exception&) {
            // best effort; a dead session has nothing to tear down
        }
    }
    await_responses(std::move(pending), chain_id);
}

ChainResponse Controller::orchestrate(const ChainRequest& request) {
    std::lock_guard serialize(orchestrate_mutex_);
    note_event("orchestrate request " + std::to_string(request.request_id) + " begin");

    auto finish = [this, &request](ChainResponse resp) {
        note_event("orchestrate request " + std::to_string(request.request_id) + " end");
        return resp;
    };

    ChainResponse resp;
    if (!initialized_.load()) {
        resp.error = OrchestrationError::internal;
        resp.reason = "controller not initialized";
        return finish(resp);
    }

    PhysicalTopology physical;
    AbstractedTopology abstracted;
    {
        std::lock_guard lock(state_mutex_);
        physical = physical_;
        abstracted = abstracted_;
    }

    if (request.source == request.destination) {
        resp.error = OrchestrationError::invalid_request;
        resp.reason = "source equals destination";
        return finish(resp);
    }
    for (NodeId endpoint : {request.source, request.destination}) {
        if (physical.kind_of(endpoint) != NodeKind::qkd_node) {
            resp.error = OrchestrationError::invalid_request;
            resp.reason = "node " + std::to_string(endpoint) + " is not a QKD node";
            return finish(resp);
        }
    }

    // Conventional chains use BB84 links only; pair-backed edges are exactly
    // the TF traversals, so drop them from the routing graph.
    AbstractedTopology routing_graph = abstracted;
    if (request.protocol == ProtocolRequirement::conventional) {
        std::erase_if(routing_graph.edges,
                      [](const AbstractEdge& e) { return e.collapsed_relay.has_value(); });
    }

    auto path = compute_path(request.source, request.destination, routing_graph);
    if (!path || path->empty()) {
        resp.error = OrchestrationError::no_path;
        resp.reason = "no path from " + std::to_string(request.source) + " to " +
                      std::to_string(request.destination);
        return finish(resp);
    }

    RelaySearch relays = locate_relays(*path, request.source, physical);

    std::vector<SlotAllocation> allocations;
    {
        std::lock_guard lock(state_mutex_);
        auto alloc = allocate_resources(relays.physical_path, request.required_rate_kbps,
                                        resource_view_, physical);
        if (const auto* failure = std::get_if<AllocFailure>(&alloc)) {
            resp.error = failure->kind == AllocFailureKind::insufficient_rate
                             ? OrchestrationError::insufficient_rate
                             : OrchestrationError::no_free_slot;
            resp.reason = failure->detail;
            return finish(resp);
        }
        allocations = std::get<std::vector<SlotAllocation>>(alloc);
    }

    ChainId chain_id;
    {
        std::lock_guard lock(state_mutex_);
        chain_id = next_chain_id_++;
    }

    auto slot_of = [&](NodeId a, NodeId b) {
        const QkdLink* link = physical.find_link(a, b);
        for (const auto& alloc : allocations)
            if (alloc.link_id == link->link_id) return alloc.slot;
        return std::size_t{0};
    };
    auto port_of = [&](NodeId node, NodeId peer) -> std::uint32_t {
        std::lock_guard lock(state_mutex_);
        const auto& towards = sessions_.at(node).port_towards;
        auto it = towards.find(peer);
        return it == towards.end() ? 0 : it->second;
    };

    const auto& nodes = relays.physical_path;
    std::optional<ChainResponse> failure;
    std::vector<NodeId> configured;

    try {
        if (request.protocol == ProtocolRequirement::heterogeneous) {
            // Batched: every node config goes out before any response is awaited.
            std::vector<PendingConfig> pending;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                std::uint32_t in = i == 0 ? 0 : port_of(nodes[i], nodes[i - 1]);
                std::uint32_t out = i + 1 == nodes.size() ? 0 : port_of(nodes[i], nodes[i + 1]);
                ResourceBitmap bitmap;
                if (i + 1 < nodes.size())
                    bitmap = ResourceBitmap::single(slot_of(nodes[i], nodes[i + 1]));
                pending.push_back(build_config(nodes[i], chain_id, in, out, bitmap));
            }
            for (const auto& cfg : pending) {
                send_config(cfg);
                configured.push_back(cfg.node_id);
            }
            failure = await_responses(std::move(pending), chain_id);
        } else {
            // Sequential: each link's node pair is configured independently
            // and acknowledged before the next link.
            for (std::size_t i = 0; i + 1 < nodes.size() && !failure; ++i) {
                std::vector<PendingConfig> pending;
                pending.push_back(build_config(nodes[i], chain_id, 0,
                                               port_of(nodes[i], nodes[i + 1]),
                                               ResourceBitmap::single(
                                                   slot_of(nodes[i], nodes[i + 1]))));
                pending.push_back(build_config(nodes[i + 1], chain_id,
                                               port_of(nodes[i + 1], nodes[i]), 0,
                                               ResourceBitmap{}));
                for (const auto& cfg : pending) {
                    send_config(cfg);
                    configured.push_back(cfg.node_id);
                }
                failure = await_responses(std::move(pending), chain_id);
            }
        }
    } catch (const std::exception& e) {
        ChainResponse fail;
        fail.error = OrchestrationError::internal;
        fail.reason = e.what();
        failure = fail;
    }

    if (failure) {
        // Roll back: free the slots and tear down whatever was configured.
        {
            std::lock_guard lock(state_mutex_);
            release_allocations(allocations, resource_view_);
        }
        std::sort(configured.begin(), configured.end());
        configured.erase(std::unique(configured.begin(), configured.end()), configured.end());
        teardown_nodes(configured, chain_id);

        ChainRecord record;
        record.chain_id = chain_id;
        record.request_id = request.request_id;
        record.physical_path = relays.physical_path;
        record.status = ChainStatus::failed;
        record.failure_reason = failure->reason;
        {
            std::lock_guard lock(state_mutex_);
            chains_[chain_id] = std::move(record);
        }
        failure->chain_id = chain_id;
        failure->path = relays.physical_path;
        return finish(*failure);
    }

    ChainRecord record;
    record.chain_id = chain_id;
    record.request_id = request.request_id;
    record.physical_path = relays.physical_path;
    record.trusted_relays = relays.trusted;
    record.untrusted_relays = relays.untrusted;
    record.allocations = allocations;
    record.status = ChainStatus::established;

    resp.established = true;
    resp.chain_id = chain_id;
    resp.path = relays.physical_path;
    resp.metrics = chain_metrics(record, physical);
    {
        std::lock_guard lock(state_mutex_);
        chains_[chain_id] = std::move(record);
    }
    return finish(resp);
}

bool Controller::release_chain(ChainId chain_id) {
    std::lock_guard serialize(orchestrate_mutex_);
    ChainRecord record;
    {
        std::lock_guard lock(state_mutex_);
        auto it = chains_.find(chain_id);
        if (it == chains_.end()) return false;
        record = it->second;
    }
    if (record.status == ChainStatus::established) teardown_nodes(record.physical_path, chain_id);
    {
        std::lock_guard lock(state_mutex_);
        release_allocations(record.allocations, resource_view_);
        chains_.erase(chain_id);
    }
    note_event("chain " + std::to_string(chain_id) + " released");
    return true;
}

void Controller::note_event(const std::string& event) {
    std::lock_guard lock(events_mutex_);
    events_.push_back(event);
}

PhysicalTopology Controller::physical_topology() const {
    std::lock_guard lock(state_mutex_);
    return physical_;
}

AbstractedTopology Controller::abstracted_topology() const {
    std::lock_guard lock(state_mutex_);
    return abstracted_;
}

ResourceView Controller::resource_view() const {
    std::lock_guard lock(state_mutex_);
    return resource_view_;
}

std::vector<ChainRecord> Controller::chains() const {
    std::lock_guard lock(state_mutex_);
    std::vector<ChainRecord> out;
    for (const auto& [_, record] : chains_) out.push_back(record);
    return out;
}

std::optional<ChainRecord> Controller::chain(ChainId chain_id) const {
    std::lock_guard lock(state_mutex_);
    auto it = chains_.find(chain_id);
    if (it == chains_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Controller::event_log() const {
    std::lock_guard lock(events_mutex_);
    return events_;
}

std::vector<SessionState> Controller::session_states() const {
    std::lock_guard lock(state_mutex_);
    std::vector<SessionState> out;
    for (const auto& [_, s] : sessions_) out.push_back(s.state);
    return out;
}

std::string Controller::init_error() const {
    std::lock_guard lock(state_mutex_);
    return init_error_;
}

}  // namespace qkdo
