#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "qkdo/orchestration.hpp"

using namespace qkdo;

namespace {

std::vector<NodeId> node_sequence(NodeId src, const std::vector<AbstractEdge>& path) {
    std::vector<NodeId> seq{src};
    NodeId cur = src;
    for (const auto& e : path) {
        cur = e.other(cur);
        seq.push_back(cur);
    }
    return seq;
}

}  // namespace

TEST_CASE("demo paths route as in the testbed demonstration") {
    auto topo = test::default_topology();
    auto abstracted = abstract_topology(topo);

    auto conventional = compute_path(2, 1, abstracted);
    REQUIRE(conventional.has_value());
    CHECK(node_sequence(2, *conventional) == std::vector<NodeId>{2, 6, 5, 1});

    auto heterogeneous = compute_path(2, 3, abstracted);
    REQUIRE(heterogeneous.has_value());
    CHECK(node_sequence(2, *heterogeneous) == std::vector<NodeId>{2, 6, 3});
    CHECK(heterogeneous->back().collapsed_relay == NodeId{8});
}

TEST_CASE("adjacent nodes get a single-edge path; disconnected nodes get none") {
    AbstractedTopology graph;
    graph.nodes = {{1, NodeKind::qkd_node}, {2, NodeKind::qkd_node}, {3, NodeKind::qkd_node}};
    graph.edges.push_back({1, 1, 2, 1.0, 1.0, {1}, std::nullopt});
    auto path = compute_path(1, 2, graph);
    REQUIRE(path.has_value());
    CHECK(path->size() == 1);
    CHECK(!compute_path(1, 3, graph).has_value());
}

TEST_CASE("hop count matches the BFS oracle on random connected graphs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        auto graph = test::random_abstract_graph(rng);
        std::uniform_int_distribution<NodeId> any(1, static_cast<NodeId>(graph.nodes.size()));
        NodeId src = any(rng), dst = any(rng);
        if (src == dst) continue;
        auto path = compute_path(src, dst, graph);
        auto oracle = test::bfs_hops(src, dst, graph);
        REQUIRE(path.has_value() == oracle.has_value());
        if (path) CHECK(path->size() == *oracle);
    }
}

TEST_CASE("tie-breaking is deterministic and lexicographically smallest") {
    // two equal-hop routes 1-2-4 and 1-3-4; node 2 < node 3
    AbstractedTopology graph;
    for (NodeId n : {1, 2, 3, 4}) graph.nodes.emplace(n, NodeKind::qkd_node);
    graph.edges.push_back({1, 1, 2, 1, 1, {1}, std::nullopt});
    graph.edges.push_back({2, 1, 3, 1, 1, {2}, std::nullopt});
    graph.edges.push_back({3, 2, 4, 1, 1, {3}, std::nullopt});
    graph.edges.push_back({4, 3, 4, 1, 1, {4}, std::nullopt});
    for (int i = 0; i < 10; ++i) {
        auto path = compute_path(1, 4, graph);
        REQUIRE(path.has_value());
        CHECK(node_sequence(1, *path) == std::vector<NodeId>{1, 2, 4});
    }
}

TEST_CASE("locate_relays expands the untrusted relay and orders relays along the path") {
    auto topo = test::default_topology();
    auto abstracted = abstract_topology(topo);

    auto het = compute_path(2, 3, abstracted);
    auto relays = locate_relays(*het, 2, topo);
    CHECK(relays.physical_path == std::vector<NodeId>{2, 6, 8, 3});
    CHECK(relays.trusted == std::vector<NodeId>{6});
    CHECK(relays.untrusted == std::vector<NodeId>{8});

    auto conv = compute_path(2, 1, abstracted);
    relays = locate_relays(*conv, 2, topo);
    CHECK(relays.physical_path == std::vector<NodeId>{2, 6, 5, 1});
    CHECK(relays.trusted == std::vector<NodeId>{6, 5});
    CHECK(relays.untrusted.empty());

    // single-edge path between adjacent nodes has no interior relays
    AbstractedTopology small;
    small.nodes = {{1, NodeKind::qkd_node}, {2, NodeKind::qkd_node}};
    small.edges.push_back({1, 1, 2, 1, 1, {1}, std::nullopt});
    PhysicalTopology small_phys;
    small_phys.nodes = small.nodes;
    small_phys.links.push_back({1, 1, 2, 1.0, ProtocolKind::bb84, 1.0});
    auto one = compute_path(1, 2, small);
    relays = locate_relays(*one, 1, small_phys);
    CHECK(relays.trusted.empty());
    CHECK(relays.untrusted.empty());
    CHECK(relays.physical_path == std::vector<NodeId>{1, 2});
}

TEST_CASE("relay expansion collapses back to the abstract path") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        auto topo = test::random_physical_topology(rng);
        if (!validate_topology(topo).empty()) continue;
        auto abstracted = abstract_topology(topo);
        auto path = compute_path(1, 2, abstracted);
        if (!path || path->empty()) continue;
        auto relays = locate_relays(*path, 1, topo);

        // every consecutive pair shares a physical link
        for (std::size_t i = 0; i + 1 < relays.physical_path.size(); ++i)
            CHECK(topo.find_link(relays.physical_path[i], relays.physical_path[i + 1]) !=
                  nullptr);

        // dropping the reinserted URs yields the abstract node sequence
        std::vector<NodeId> collapsed;
        for (NodeId n : relays.physical_path)
            if (topo.kind_of(n) != NodeKind::untrusted_relay) collapsed.push_back(n);
        CHECK(collapsed == node_sequence(1, *path));
    }
}

TEST_CASE("first-fit picks slot 0 on empty maps and the lowest clear index otherwise") {
    auto topo = test::default_topology();
    auto view = make_resource_view(topo);

    auto result = allocate_resources({2, 6, 5}, 10.0, view, topo);
    REQUIRE(std::holds_alternative<std::vector<SlotAllocation>>(result));
    auto allocs = std::get<std::vector<SlotAllocation>>(result);
    CHECK(allocs == std::vector<SlotAllocation>{{1, 0}, {2, 0}});

    view = make_resource_view(topo);
    view.at(1).set(0);
    view.at(1).set(1);
    view.at(1).set(2);
    result = allocate_resources({2, 6}, 10.0, view, topo);
    REQUIRE(std::holds_alternative<std::vector<SlotAllocation>>(result));
    CHECK(std::get<std::vector<SlotAllocation>>(result) ==
          std::vector<SlotAllocation>{{1, 3}});
}

TEST_CASE("rate failure names the offending link and commits nothing") {
    auto topo = test::default_topology();
    auto view = make_resource_view(topo);
    auto baseline = view;

    // 20 kbps over the heterogeneous path exceeds the 14.2 kbps TF segments
    auto result = allocate_resources({2, 6, 8, 3}, 20.0, view, topo);
    REQUIRE(std::holds_alternative<AllocFailure>(result));
    const auto& failure = std::get<AllocFailure>(result);
    CHECK(failure.kind == AllocFailureKind::insufficient_rate);
    CHECK(failure.link_id == 4);  // first TF segment on the path
    CHECK(view == baseline);
}

TEST_CASE("no-free-slot failure is atomic even when earlier links could be satisfied") {
    auto topo = test::default_topology();
    auto view = make_resource_view(topo);
    for (std::size_t s = 0; s < ResourceBitmap::slot_count; ++s) view.at(2).set(s);
    auto baseline = view;

    auto result = allocate_resources({2, 6, 5}, 10.0, view, topo);
    REQUIRE(std::holds_alternative<AllocFailure>(result));
    CHECK(std::get<AllocFailure>(result).kind == AllocFailureKind::no_free_slot);
    CHECK(std::get<AllocFailure>(result).link_id == 2);
    CHECK(view == baseline);
}

TEST_CASE("first-fit minimality and release restoration on randomized occupancy") {
    auto topo = test::default_topology();
    std::mt19937 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        auto view = make_resource_view(topo);
        for (auto& [_, bitmap] : view)
            for (std::size_t s = 0; s < ResourceBitmap::slot_count; ++s)
                if (rng() % 3 == 0) bitmap.set(s);
        auto baseline = view;

        auto result = allocate_resources({2, 6, 5, 1}, 10.0, view, topo);
        if (const auto* allocs = std::get_if<std::vector<SlotAllocation>>(&result)) {
            for (const auto& a : *allocs) {
                CHECK(!baseline.at(a.link_id).test(a.slot));
                for (std::size_t s = 0; s < a.slot; ++s) CHECK(baseline.at(a.link_id).test(s));
            }
            release_allocations(*allocs, view);
        }
        CHECK(view == baseline);
    }
}
