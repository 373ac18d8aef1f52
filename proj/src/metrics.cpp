#include "qkdo/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace qkdo {

namespace {

const QkdLink& link_between(NodeId a, NodeId b, const PhysicalTopology& topo) {
    const QkdLink* link = topo.find_link(a, b);
    if (!link)
        throw std::invalid_argument("metrics: nodes " + std::to_string(a) + " and " +
                                    std::to_string(b) + " share no link");
    return *link;
}

}  // namespace

double total_length(const std::vector<NodeId>& physical_path, const PhysicalTopology& topo) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < physical_path.size(); ++i)
        sum += link_between(physical_path[i], physical_path[i + 1], topo).length_km;
    return sum;
}

double skc(const std::vector<NodeId>& physical_path, const PhysicalTopology& topo) {
    double min_rate = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i + 1 < physical_path.size()) {
        if (topo.kind_of(physical_path[i + 1]) == NodeKind::untrusted_relay &&
            i + 2 < physical_path.size()) {
            // TF pair spans the untrusted relay; counts once at the pair rate.
            const auto& first = link_between(physical_path[i], physical_path[i + 1], topo);
            const auto& second = link_between(physical_path[i + 1], physical_path[i + 2], topo);
            min_rate = std::min(min_rate, std::min(first.key_rate_kbps, second.key_rate_kbps));
            i += 2;
        } else {
            min_rate = std::min(min_rate,
                                link_between(physical_path[i], physical_path[i + 1], topo)
                                    .key_rate_kbps);
            i += 1;
        }
    }
    return min_rate;
}

SecurityLevel security_level(std::size_t n_trusted) {
    if (n_trusted == 0) return {1.0, true};
    return {1.0 / static_cast<double>(n_trusted), false};
}

std::variant<double, ClockMisorder> control_delay_ms(double request_sent_at_ms,
                                                     double response_received_at_ms) {
    double delta = response_received_at_ms - request_sent_at_ms;
    if (delta < 0.0) return ClockMisorder{delta};
    return delta;
}

ChainMetrics chain_metrics(const ChainRecord& chain, const PhysicalTopology& topo) {
    ChainMetrics m;
    m.total_length_km = total_length(chain.physical_path, topo);
    m.skc_kbps = skc(chain.physical_path, topo);
    m.trusted_relay_count = chain.trusted_relays.size();
    m.security = security_level(m.trusted_relay_count);
    return m;
}

std::string render_comparison(const std::vector<ComparisonRow>& rows) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s %14s %12s %16s %16s\n", "QKD Chain", "Total Length",
                  "SKC", "Control Delay", "Security Level");
    out += line;
    out.append(90, '-');
    out += "\n";
    for (const auto& row : rows) {
        char delay[32];
        if (row.metrics.control_delay_ms)
            std::snprintf(delay, sizeof(delay), "%.2f ms", *row.metrics.control_delay_ms);
        else
            std::snprintf(delay, sizeof(delay), "n/a");
        char level[32];
        std::snprintf(level, sizeof(level), "%.2g%s", row.metrics.security.value,
                      row.metrics.security.no_trusted_relay ? " (no TR)" : "");
        std::snprintf(line, sizeof(line), "%-28s %11.6g km %7.6g kbps %16s %16s\n",
                      row.label.c_str(), row.metrics.total_length_km, row.metrics.skc_kbps, delay,
                      level);
        out += line;
    }
    return out;
}

}  // namespace qkdo
