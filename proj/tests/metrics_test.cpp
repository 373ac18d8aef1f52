#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "qkdo/metrics.hpp"

using namespace qkdo;

namespace {

ChainRecord make_chain(std::vector<NodeId> path, std::vector<NodeId> trusted,
                       std::vector<NodeId> untrusted = {}) {
    ChainRecord chain;
    chain.chain_id = 1;
    chain.physical_path = std::move(path);
    chain.trusted_relays = std::move(trusted);
    chain.untrusted_relays = std::move(untrusted);
    chain.status = ChainStatus::established;
    return chain;
}

}  // namespace

TEST_CASE("total length sums the physical links of both demo paths") {
    auto topo = test::default_topology();
    CHECK(total_length({2, 6, 5, 1}, topo) == doctest::Approx(234.0));
    CHECK(total_length({2, 6, 8, 3}, topo) == doctest::Approx(231.0));
    CHECK(total_length({2, 6}, topo) == doctest::Approx(78.0));
}

TEST_CASE("secret key capacity is the bottleneck rate; a TF pair counts once") {
    auto topo = test::default_topology();
    CHECK(skc({2, 6, 5, 1}, topo) == doctest::Approx(28.1));
    CHECK(skc({2, 6, 8, 3}, topo) == doctest::Approx(14.2));

    PhysicalTopology small;
    small.nodes = {{1, NodeKind::qkd_node}, {2, NodeKind::qkd_node}};
    small.links.push_back({1, 1, 2, 10.0, ProtocolKind::bb84, 5.0});
    CHECK(skc({1, 2}, small) == doctest::Approx(5.0));
}

TEST_CASE("security level is 1/n with a clamp-and-flag at zero trusted relays") {
    auto two = security_level(2);
    CHECK(two.value == doctest::Approx(0.5));
    CHECK(!two.no_trusted_relay);

    auto one = security_level(1);
    CHECK(one.value == doctest::Approx(1.0));
    CHECK(!one.no_trusted_relay);

    auto none = security_level(0);
    CHECK(none.value == doctest::Approx(1.0));
    CHECK(none.no_trusted_relay);

    CHECK(security_level(4).value == doctest::Approx(0.25));
}

TEST_CASE("control delay is the response-request interval; misordered stamps are flagged") {
    auto ok = control_delay_ms(100.0, 162.5);
    REQUIRE(std::holds_alternative<double>(ok));
    CHECK(std::get<double>(ok) == doctest::Approx(62.5));

    auto zero = control_delay_ms(10.0, 10.0);
    REQUIRE(std::holds_alternative<double>(zero));
    CHECK(std::get<double>(zero) == 0.0);

    auto bad = control_delay_ms(50.0, 20.0);
    REQUIRE(std::holds_alternative<ClockMisorder>(bad));
    CHECK(std::get<ClockMisorder>(bad).delta_ms == doctest::Approx(-30.0));
}

TEST_CASE("chain metrics reproduce the comparison figures for both demo chains") {
    auto topo = test::default_topology();

    auto conv = chain_metrics(make_chain({2, 6, 5, 1}, {6, 5}), topo);
    CHECK(conv.total_length_km == doctest::Approx(234.0));
    CHECK(conv.skc_kbps == doctest::Approx(28.1));
    CHECK(conv.security.value == doctest::Approx(0.5));
    CHECK(conv.trusted_relay_count == 2);

    auto het = chain_metrics(make_chain({2, 6, 8, 3}, {6}, {8}), topo);
    CHECK(het.total_length_km == doctest::Approx(231.0));
    CHECK(het.skc_kbps == doctest::Approx(14.2));
    CHECK(het.security.value == doctest::Approx(1.0));
    CHECK(het.trusted_relay_count == 1);
}

TEST_CASE("length is additive and capacity is the exact minimum over random paths") {
    std::mt19937 rng(41);
    auto topo = test::default_topology();
    const std::vector<std::vector<NodeId>> paths = {
        {2, 6, 5, 1}, {2, 6, 8, 3}, {4, 7, 5, 1}, {4, 7, 6, 8, 3}, {1, 5, 6, 2}};
    for (const auto& path : paths) {
        double sum = 0.0;
        double minimum = 1e18;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const QkdLink* link = topo.find_link(path[i], path[i + 1]);
            REQUIRE(link != nullptr);
            sum += link->length_km;
            minimum = std::min(minimum, link->key_rate_kbps);
        }
        CHECK(total_length(path, topo) == doctest::Approx(sum));
        // physical min never exceeds skc; equality unless a TF pair is split
        CHECK(skc(path, topo) >= minimum - 1e-9);

        // prefixes never shrink in length
        for (std::size_t cut = 2; cut < path.size(); ++cut) {
            std::vector<NodeId> prefix(path.begin(), path.begin() + cut);
            CHECK(total_length(prefix, topo) <= total_length(path, topo) + 1e-9);
            CHECK(skc(prefix, topo) >= skc(path, topo) - 1e-9);
        }
    }
    (void)rng;
}

TEST_CASE("security level is antitone in the trusted relay count") {
    double prev = 2.0;
    for (std::size_t n = 1; n <= 16; ++n) {
        double v = security_level(n).value;
        CHECK(v <= prev);
        CHECK(v == doctest::Approx(1.0 / static_cast<double>(n)));
        prev = v;
    }
}

TEST_CASE("comparison table renders one aligned row per chain") {
    ChainMetrics conv{234.0, 28.1, 61.0, {0.5, false}, 2};
    ChainMetrics het{231.0, 14.2, 22.0, {1.0, false}, 1};
    auto text = render_comparison({{"conventional", conv}, {"heterogeneous", het}});
    CHECK(text.find("conventional") != std::string::npos);
    CHECK(text.find("heterogeneous") != std::string::npos);
    CHECK(text.find("234") != std::string::npos);
    CHECK(text.find("14.2") != std::string::npos);
    CHECK(text.find("0.5") != std::string::npos);
}
