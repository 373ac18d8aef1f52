#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkdo/model.hpp"

namespace qkdo {

struct SecurityLevel {
    double value = 1.0;
    bool no_trusted_relay = false;  // set when the ratio's denominator was zero
};

struct ChainMetrics {
    double total_length_km = 0.0;
    double skc_kbps = 0.0;
    std::optional<double> control_delay_ms;  // measured at the operator
    SecurityLevel security;
    std::size_t trusted_relay_count = 0;
};

// Sum of physical link lengths along the path.
double total_length(const std::vector<NodeId>& physical_path, const PhysicalTopology& topo);

// Minimal link key rate along the path; a TF pair counts once at its pair rate.
double skc(const std::vector<NodeId>& physical_path, const PhysicalTopology& topo);

// 1/n_trusted, clamped to 1.0 with a flag when there is no trusted relay.
SecurityLevel security_level(std::size_t n_trusted);

struct ClockMisorder {
    double delta_ms;
};

// Operator-side request/response interval; both stamps from the same clock.
std::variant<double, ClockMisorder> control_delay_ms(double request_sent_at_ms,
                                                     double response_received_at_ms);

ChainMetrics chain_metrics(const ChainRecord& chain, const PhysicalTopology& topo);

struct ComparisonRow {
    std::string label;
    ChainMetrics metrics;
};

// Four-column comparison table, aligned text.
std::string render_comparison(const std::vector<ComparisonRow>& rows);

}  // namespace qkdo
