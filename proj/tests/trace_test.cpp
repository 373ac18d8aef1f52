#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qkdo/codec.hpp"
#include "qkdo/trace.hpp"

using namespace qkdo;

namespace {

std::string temp_path(const char* stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("trace capture round trips frames with direction markers") {
    auto path = temp_path("qkdo_trace_roundtrip.bin");
    auto hello = wire::encode(wire::AnyMsg{wire::HelloMsg{1}});
    wire::ChainConfigRequestMsg req;
    req.xid = 2;
    req.chain_id = 1;
    req.node_id = 6;
    req.input_port = 1;
    req.output_port = 3;
    req.resource_units.set(0);
    auto config = wire::encode(wire::AnyMsg{req});

    {
        TraceRecorder recorder(path);
        REQUIRE(recorder.enabled());
        recorder.record(TraceDirection::agent_to_controller, hello);
        recorder.record(TraceDirection::controller_to_agent, config);
    }

    std::string error;
    auto entries = read_trace(path, &error);
    CHECK(error.empty());
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].direction == TraceDirection::agent_to_controller);
    CHECK(entries[0].frame == hello);
    CHECK(entries[1].direction == TraceDirection::controller_to_agent);
    CHECK(entries[1].frame == config);

    auto rendered = render_trace(entries);
    CHECK(rendered.find("HELLO") != std::string::npos);
    CHECK(rendered.find("chain") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("a truncated final record is reported alongside the complete entries") {
    auto path = temp_path("qkdo_trace_truncated.bin");
    auto hello = wire::encode(wire::AnyMsg{wire::HelloMsg{7}});
    {
        TraceRecorder recorder(path);
        recorder.record(TraceDirection::agent_to_controller, hello);
        recorder.record(TraceDirection::controller_to_agent, hello);
    }
    // chop three bytes off the second record's frame
    auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 3);

    std::string error;
    auto entries = read_trace(path, &error);
    CHECK(!error.empty());
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].frame == hello);
    std::remove(path.c_str());
}

TEST_CASE("an empty capture reads back as no entries and no error") {
    auto path = temp_path("qkdo_trace_empty.bin");
    { std::ofstream touch(path, std::ios::binary); }
    std::string error;
    auto entries = read_trace(path, &error);
    CHECK(error.empty());
    CHECK(entries.empty());
    std::remove(path.c_str());
}

TEST_CASE("a missing capture file is an error, not an empty capture") {
    std::string error;
    CHECK_THROWS_AS((void)read_trace(temp_path("qkdo_trace_nonexistent.bin"), &error),
                    std::runtime_error);
}
