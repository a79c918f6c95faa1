#include "vodsim/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace vodsim {
namespace {

ScenarioConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "nothing thrown";
    return ErrorCode::ParseError;
}

const char* kMinimal = R"(
[graph]
3
0 1
1 2
[streams]
stream 0 1000000
watch_all 0
[gop]
width 64
frame 2 4.0
frame 1 1.0 0
[run]
probing off
)";

TEST(ParseScenario, MinimalFile) {
    const auto cfg = parse(kMinimal);
    cfg.validate();
    EXPECT_EQ(cfg.topology().node_count(), 3u);
    EXPECT_EQ(cfg.gop.total_packets(), 3u);
    EXPECT_EQ(cfg.gop.frames[1].reference, std::optional<std::size_t>(0));
    EXPECT_EQ(cfg.streams.resolved_watchers(3, 0), (std::map<NodeId, StreamId>{{1, 0}, {2, 0}}));
    EXPECT_EQ(cfg.run.flood, FloodMode::Rrdbfsf);
    EXPECT_FALSE(cfg.run.probing);
}

TEST(ParseScenario, AllSections) {
    const auto cfg = parse(R"(
# comment line
[graph]
random 30 3.5 99
[links]
capacity 1000 100
cap 0 1 5000   # inline comment
loss 0.25
source_loss 0.5
source_loss 4 1.0
[streams]
total 3
stream 0 2000
stream 2 1000
watch_all 0
watch 5 2
[gop]
width 1000
epoch 0.25
frame 3 9.5
[cpr]
slots 4
order random
gateway_priority on
[run]
seed 18446744073709551615
gops 7
source 2
flood blind
clustering off
probe_count 5
probe_size 8000
safety 0.8
sweep_trials 3
sweep_degree 6
)");
    ASSERT_TRUE(cfg.random_graph);
    EXPECT_EQ(cfg.random_graph->nodes, 30u);
    EXPECT_EQ(cfg.random_graph->seed, std::optional<std::uint64_t>(99));
    EXPECT_EQ(cfg.capacities.at(0, 1).capacity_bps, 5000u);
    EXPECT_EQ(cfg.capacities.at(7, 9).cross_bps, 100u);
    EXPECT_EQ(cfg.loss.peer_link(3, 8), 0.25);
    EXPECT_EQ(cfg.loss.source_link(4), 1.0);
    EXPECT_EQ(cfg.loss.source_link(6), 0.5);
    EXPECT_EQ(cfg.streams.total, 3u);
    EXPECT_EQ(cfg.streams.resolved_watchers(30, 2).at(5), 2u);
    EXPECT_EQ(cfg.streams.resolved_watchers(30, 2).size(), 29u);
    EXPECT_EQ(cfg.streams.audience_streams(30, 2), (std::set<StreamId>{0, 2}));
    EXPECT_EQ(cfg.gop.repair_epoch_seconds, 0.25);
    EXPECT_EQ(cfg.cpr.slots, 4u);
    EXPECT_EQ(cfg.cpr.order, PeerOrder::Random);
    EXPECT_TRUE(cfg.cpr.gateway_priority);
    EXPECT_EQ(cfg.run.seed, 18446744073709551615ULL);
    EXPECT_EQ(cfg.run.gops, 7u);
    EXPECT_EQ(cfg.run.source, 2u);
    EXPECT_EQ(cfg.run.flood, FloodMode::Blind);
    EXPECT_FALSE(cfg.run.clustering);
    EXPECT_EQ(cfg.run.probe.probe_count, 5u);
    EXPECT_EQ(cfg.run.probe.safety, 0.8);
    EXPECT_EQ(cfg.mean_degree(), 6.0);
    cfg.validate();
}

TEST(ParseScenario, RandomGraphIsReproducible) {
    const auto cfg = parse("[graph]\nrandom 40 4\n[streams]\nstream 0 1\nwatch_all 0\n[gop]\nwidth 8\nframe 1 1\n");
    EXPECT_EQ(cfg.topology().edges(), cfg.topology().edges());
    EXPECT_EQ(cfg.topology().node_count(), 40u);
}

TEST(ParseScenario, SyntaxErrorsCarryLineNumbers) {
    try {
        parse("[graph]\n3\n0 1\n1 2\n[run]\nseed -4\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
    }
    EXPECT_EQ(code_of([] { parse("[nope]\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("seed 4\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("[run]\nflood sideways\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("[run]\nclustering maybe\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("[gop]\nwidth 8 9\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse("[graph]\nrandom 5 2\n3\n0 1\n"); }), ErrorCode::ParseError);
}

TEST(ParseScenario, GraphErrorsSurface) {
    EXPECT_EQ(code_of([] { parse("[graph]\n3\n0 1\n"); }), ErrorCode::DisconnectedGraph);
    EXPECT_EQ(code_of([] { parse("[graph]\n2\n0 1\n1 1\n"); }), ErrorCode::SelfLoop);
}

TEST(ValidateScenario, RejectsInconsistentSettings) {
    auto with = [](auto&& tweak) {
        auto cfg = parse(kMinimal);
        tweak(cfg);
        return code_of([&] { cfg.validate(); });
    };
    using C = ScenarioConfig;
    EXPECT_EQ(with([](C& c) { c.loss.peer_default = 1.0; }), ErrorCode::InvalidConfig);
    EXPECT_EQ(with([](C& c) { c.loss.source_default = 1.5; }), ErrorCode::InvalidConfig);
    EXPECT_EQ(with([](C& c) { c.loss.peer_links[{0, 2}] = 0.1; }), ErrorCode::InvalidConfig);  // not an edge
    EXPECT_EQ(with([](C& c) { c.streams.watchers[0] = 0; }), ErrorCode::InvalidConfig);        // source watching
    EXPECT_EQ(with([](C& c) { c.streams.watchers[1] = 3; }), ErrorCode::InvalidConfig);        // undeclared
    EXPECT_EQ(with([](C& c) { c.run.probing = true; }), ErrorCode::InvalidConfig);             // no capacities
    EXPECT_EQ(with([](C& c) { c.run.gops = 0; }), ErrorCode::InvalidConfig);
    EXPECT_EQ(with([](C& c) { c.run.source = 9; }), ErrorCode::InvalidConfig);
    EXPECT_EQ(with([](C& c) { c.gop.frames[1].reference = 5; }), ErrorCode::InvalidGop);
    // A source link may drop everything; peer links may not.
    auto dropped = parse(kMinimal);
    dropped.loss.source_default = 1.0;
    EXPECT_NO_THROW(dropped.validate());
}

TEST(LoadScenario, MissingFile) {
    EXPECT_EQ(code_of([] { load_scenario("/nonexistent/x.scn"); }), ErrorCode::InvalidConfig);
}

}  // namespace
}  // namespace vodsim
