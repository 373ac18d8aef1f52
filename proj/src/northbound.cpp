#include "qkdo/northbound.hpp"

#include <algorithm>
#include <array>
#include <chrono>

#include <httplib.h>
#include <json.hpp>

namespace qkdo {

using nlohmann::json;

std::string NorthboundRequestDoc::to_json() const {
    json j;
    j["source"] = source;
    j["destination"] = destination;
    j["required_rate_kbps"] = required_rate_kbps;
    j["protocol"] = protocol == ProtocolRequirement::conventional ? "BB84" : "BB84+TF";
    return j.dump();
}

std::variant<NorthboundRequestDoc, DocError> parse_request_doc(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return DocError{"malformed-document", "body is not a JSON object"};

    static const std::array<std::string, 4> known = {"source", "destination",
                                                     "required_rate_kbps", "protocol"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            return DocError{"malformed-document", "unknown field '" + key + "'"};
    for (const auto& key : known)
        if (!j.contains(key))
            return DocError{"malformed-document", "missing field '" + key + "'"};

    if (!j["source"].is_number_unsigned() || !j["destination"].is_number_unsigned())
        return DocError{"malformed-document", "source/destination must be unsigned integers"};
    if (!j["required_rate_kbps"].is_number())
        return DocError{"malformed-document", "required_rate_kbps must be a number"};
    if (!j["protocol"].is_string())
        return DocError{"malformed-document", "protocol must be a string"};

    NorthboundRequestDoc doc;
    doc.source = j["source"].get<NodeId>();
    doc.destination = j["destination"].get<NodeId>();
    doc.required_rate_kbps = j["required_rate_kbps"].get<double>();
    std::string protocol = j["protocol"].get<std::string>();
    if (protocol == "BB84")
        doc.protocol = ProtocolRequirement::conventional;
    else if (protocol == "BB84+TF")
        doc.protocol = ProtocolRequirement::heterogeneous;
    else
        return DocError{"malformed-document", "unsupported protocol '" + protocol + "'"};

    if (doc.source == doc.destination)
        return DocError{"malformed-document", "source equals destination"};
    if (doc.required_rate_kbps < 0)
        return DocError{"malformed-document", "required_rate_kbps must be non-negative"};
    return doc;
}

namespace {

json metrics_doc(const ChainMetrics& m) {
    json j;
    j["total_length_km"] = m.total_length_km;
    j["skc_kbps"] = m.skc_kbps;
    j["security_level"] = m.security.value;
    j["no_trusted_relay"] = m.security.no_trusted_relay;
    j["trusted_relay_count"] = m.trusted_relay_count;
    return j;
}

json response_doc(const ChainResponse& resp) {
    json j;
    j["path"] = resp.path;
    if (resp.established) {
        j["status"] = "established";
        j["chain_id"] = resp.chain_id;
        j["metrics"] = metrics_doc(resp.metrics);
    } else {
        j["status"] = "failed";
        j["reason_code"] = to_string(resp.error);
        j["reason"] = resp.reason;
    }
    return j;
}

}  // namespace

struct NorthboundServer::Impl {
    httplib::Server server;
    std::uint32_t next_request_id = 1;
};

NorthboundServer::NorthboundServer(Controller& controller, std::string host, std::uint16_t port)
    : controller_(controller), host_(std::move(host)), port_(port), impl_(new Impl) {
    impl_->server.Post("/qkd-chains", [this](const httplib::Request& req,
                                             httplib::Response& res) {
        res.set_header("Content-Type", "application/json");
        if (req.get_header_value("Content-Type").find("application/json") == std::string::npos) {
            res.status = 415;
            res.body = json{{"reason_code", "malformed-document"},
                            {"reason", "Content-Type must be application/json"}}
                           .dump();
            return;
        }
        auto parsed = parse_request_doc(req.body);
        if (const auto* err = std::get_if<DocError>(&parsed)) {
            res.status = 400;
            res.body = json{{"reason_code", err->reason_code}, {"reason", err->detail}}.dump();
            return;
        }
        const auto& doc = std::get<NorthboundRequestDoc>(parsed);

        if (!controller_.physical_topology().nodes.count(doc.source) ||
            !controller_.physical_topology().nodes.count(doc.destination)) {
            res.status = 400;
            res.body = json{{"reason_code", "unknown-node"},
                            {"reason", "source or destination not in topology"}}
                           .dump();
            return;
        }

        ChainRequest request;
        request.request_id = impl_->next_request_id++;
        request.source = doc.source;
        request.destination = doc.destination;
        request.required_rate_kbps = doc.required_rate_kbps;
        request.protocol = doc.protocol;

        ChainResponse chain_resp = controller_.orchestrate(request);
        res.status = 200;
        res.body = response_doc(chain_resp).dump();
    });

    impl_->server.Get("/qkd-chains", [this](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& record : controller_.chains()) {
            json j;
            j["chain_id"] = record.chain_id;
            j["status"] = record.status == ChainStatus::established ? "established"
                          : record.status == ChainStatus::failed    ? "failed"
                                                                    : "pending";
            j["path"] = record.physical_path;
            out.push_back(j);
        }
        res.set_header("Content-Type", "application/json");
        res.body = out.dump();
    });

    impl_->server.Delete(R"(/qkd-chains/(\d+))", [this](const httplib::Request& req,
                                                        httplib::Response& res) {
        ChainId id = static_cast<ChainId>(std::stoul(req.matches[1]));
        res.set_header("Content-Type", "application/json");
        if (controller_.release_chain(id)) {
            res.status = 200;
            res.body = json{{"status", "released"}, {"chain_id", id}}.dump();
        } else {
            res.status = 404;
            res.body = json{{"reason_code", "unknown-chain"},
                            {"reason", "no chain with id " + std::to_string(id)}}
                           .dump();
        }
    });
}

NorthboundServer::~NorthboundServer() { stop(); }

bool NorthboundServer::start() {
    if (port_ == 0) {
        int bound = impl_->server.bind_to_any_port(host_);
        if (bound <= 0) return false;
        port_ = static_cast<std::uint16_t>(bound);
    } else if (!impl_->server.bind_to_port(host_, port_)) {
        return false;
    }
    server_thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return true;
}

void NorthboundServer::stop() {
    impl_->server.stop();
    if (server_thread_.joinable()) server_thread_.join();
}

std::optional<OperatorResult> operator_submit(const NorthboundRequestDoc& doc,
                                              const std::string& host, std::uint16_t port) {
    httplib::Client client(host, port);
    client.set_read_timeout(30, 0);

    auto t0 = std::chrono::steady_clock::now();
    auto res = client.Post("/qkd-chains", doc.to_json(), "application/json");
    auto t1 = std::chrono::steady_clock::now();
    if (!res) return std::nullopt;

    OperatorResult out;
    out.http_status = res->status;
    out.body = res->body;
    out.control_delay_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
    return out;
}

}  // namespace qkdo
