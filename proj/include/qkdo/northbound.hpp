#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include "qkdo/controller.hpp"
#include "qkdo/model.hpp"

namespace qkdo {

// Operator-facing JSON document for POST /qkd-chains. Unknown fields and
// unknown protocol strings are rejected.
struct NorthboundRequestDoc {
    NodeId source = 0;
    NodeId destination = 0;
    double required_rate_kbps = 0.0;
    ProtocolRequirement protocol = ProtocolRequirement::heterogeneous;

    std::string to_json() const;
};

struct DocError {
    std::string reason_code;  // machine-readable, e.g. "malformed-document"
    std::string detail;
};

std::variant<NorthboundRequestDoc, DocError> parse_request_doc(const std::string& body);

// HTTP front of the controller. POSTs are answered synchronously once the
// orchestration completes; the controller serializes them one by one.
class NorthboundServer {
public:
    NorthboundServer(Controller& controller, std::string host, std::uint16_t port);
    ~NorthboundServer();

    bool start();  // returns false when the bind fails
    void stop();
    std::uint16_t port() const { return port_; }

private:
    struct Impl;
    Controller& controller_;
    std::string host_;
    std::uint16_t port_;
    std::unique_ptr<Impl> impl_;
    std::thread server_thread_;
};

struct OperatorResult {
    int http_status = 0;
    std::string body;
    double control_delay_ms = 0.0;  // monotonic clock at the operator
};

// Sends the request doc via POST and stamps the request/response interval.
// nullopt on transport failure.
std::optional<OperatorResult> operator_submit(const NorthboundRequestDoc& doc,
                                              const std::string& host, std::uint16_t port);

}  // namespace qkdo
