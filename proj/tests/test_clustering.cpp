#include "vodsim/clustering.hpp"

#include <gtest/gtest.h>

#include <vector>

namespace vodsim {
namespace {

ClusterInfo info(NodeId id, ClusterState s) { return {id, s, std::nullopt}; }

TEST(ClusterNode, InitialHearsNonHeadBecomesChReady) {
    ClusterNode n(0, NodeSet{1, 2});
    EXPECT_EQ(n.on_receive(info(1, ClusterState::Initial)), ClusterState::ChReady);
}

TEST(ClusterNode, ChReadyHearingHeadBecomesMember) {
    ClusterNode n(0, NodeSet{1, 2});
    n.on_receive(info(1, ClusterState::Initial));
    const auto s = n.on_receive(info(2, ClusterState::ClusterHead));
    EXPECT_NE(s, ClusterState::ChReady);
    EXPECT_NE(s, ClusterState::ClusterHead);
    EXPECT_EQ(s, ClusterState::OrdinaryNode);  // one known CH, nothing to bridge
    // Sending afterwards never declares a cluster head.
    EXPECT_EQ(n.on_send().state, ClusterState::OrdinaryNode);
}

TEST(ClusterNode, GatewayAdvertisementSettlesCandidate) {
    // Three messages: CH A, CH B, then a gateway bridging (A, B).
    ClusterNode x(0, NodeSet{1, 2, 3});
    EXPECT_EQ(x.on_receive(info(1, ClusterState::ClusterHead)), ClusterState::OrdinaryNode);
    EXPECT_EQ(x.on_receive(info(2, ClusterState::ClusterHead)), ClusterState::GwReady);
    EXPECT_EQ(x.on_receive({3, ClusterState::Gateway, ChPair{1, 2}}), ClusterState::OrdinaryNode);
}

TEST(ClusterNode, SendDeclarations) {
    ClusterNode ch(0, NodeSet{1});
    ch.on_receive(info(1, ClusterState::Initial));
    const auto declared = ch.on_send();
    EXPECT_EQ(declared.state, ClusterState::ClusterHead);
    EXPECT_EQ(ch.state(), ClusterState::ClusterHead);
    EXPECT_FALSE(declared.ch_pair);

    ClusterNode gw(5, NodeSet{1, 2});
    gw.on_receive(info(1, ClusterState::ClusterHead));
    gw.on_receive(info(2, ClusterState::ClusterHead));
    ASSERT_EQ(gw.state(), ClusterState::GwReady);
    const auto g = gw.on_send();
    EXPECT_EQ(g.state, ClusterState::Gateway);
    EXPECT_EQ(g.ch_pair, (ChPair{1, 2}));
    EXPECT_EQ(g.node_id, 5u);

    ClusterNode ord(7, NodeSet{1});
    ord.on_receive(info(1, ClusterState::ClusterHead));
    EXPECT_EQ(ord.on_send(), info(7, ClusterState::OrdinaryNode));
}

TEST(ClusterNode, InitialSendsAsInitial) {
    ClusterNode n(3, NodeSet{1});
    EXPECT_EQ(n.on_send(), info(3, ClusterState::Initial));
}

TEST(ClusterNode, TagLearnedHeadsCountAsKnown) {
    ClusterNode x(0, NodeSet{1, 9});
    x.on_receive(info(1, ClusterState::ClusterHead));
    // Gateway 9 bridges 1 with a head x cannot hear; the pair is already bridged.
    EXPECT_EQ(x.on_receive({9, ClusterState::Gateway, ChPair{1, 4}}), ClusterState::OrdinaryNode);
    EXPECT_EQ(x.known_cluster_heads(), (std::set<NodeId>{1, 4}));
    EXPECT_EQ(x.heard_cluster_heads(), (std::set<NodeId>{1}));
}

TEST(ClusterNode, TagLearnedHeadsCreateNoBridgingDuty) {
    ClusterNode x(0, NodeSet{1, 9});
    x.on_receive(info(1, ClusterState::ClusterHead));
    EXPECT_EQ(x.on_receive({9, ClusterState::Gateway, ChPair{4, 5}}), ClusterState::OrdinaryNode);
    EXPECT_EQ(x.on_send().state, ClusterState::OrdinaryNode);
}

TEST(ClusterNode, NotANeighbor) {
    ClusterNode n(0, NodeSet{1});
    try {
        n.on_receive(info(2, ClusterState::Initial));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotANeighbor);
    }
}

TEST(ClusterNode, ViewKeepsLatestPerNeighbor) {
    ClusterNode n(0, NodeSet{1});
    n.on_receive(info(1, ClusterState::Initial), 3);
    n.on_receive(info(1, ClusterState::ClusterHead), 8);
    ASSERT_EQ(n.view().size(), 1u);
    EXPECT_EQ(n.view().at(1).info.state, ClusterState::ClusterHead);
    EXPECT_EQ(n.view().at(1).received_at, 8u);
}

TEST(ClusterWire, Layout) {
    const auto plain = encode_cluster_info(info(0x01020304, ClusterState::OrdinaryNode));
    EXPECT_EQ(plain, (std::vector<std::uint8_t>{6, 1, 2, 3, 4}));
    const auto gw = encode_cluster_info({7, ClusterState::Gateway, ChPair{0x0A, 0x0B0C}});
    EXPECT_EQ(gw, (std::vector<std::uint8_t>{4, 0, 0, 0, 7, 0, 0, 0, 0x0A, 0, 0, 0x0B, 0x0C}));
    EXPECT_EQ(decode_cluster_info(gw), (ClusterInfo{7, ClusterState::Gateway, ChPair{0x0A, 0x0B0C}}));
}

TEST(ClusterWire, RoundTripAllStates) {
    for (std::uint8_t code = 0; code <= 6; ++code) {
        const auto s = static_cast<ClusterState>(code);
        ClusterInfo in{0xDEADBEEF, s, std::nullopt};
        if (s == ClusterState::Gateway) in.ch_pair = ChPair{3, 9};
        EXPECT_EQ(decode_cluster_info(encode_cluster_info(in)), in);
    }
}

TEST(ClusterWire, Malformed) {
    EXPECT_THROW(decode_cluster_info(std::vector<std::uint8_t>{9, 0, 0, 0, 0}), Error);
    EXPECT_THROW(decode_cluster_info(std::vector<std::uint8_t>{4, 0, 0, 0, 0}), Error);
    EXPECT_THROW(decode_cluster_info(std::vector<std::uint8_t>{4, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1}), Error);
    EXPECT_THROW(encode_cluster_info({1, ClusterState::Gateway, std::nullopt}), Error);
    EXPECT_THROW(encode_cluster_info({1, ClusterState::ClusterHead, ChPair{1, 2}}), Error);
}

TEST(ClusterSummary, Counts) {
    const std::vector<ClusterState> initial(7, ClusterState::Initial);
    EXPECT_EQ(cluster_summary(initial).floating_count, 7u);
    const std::vector<ClusterState> mixed{ClusterState::ClusterHead, ClusterState::Gateway, ClusterState::OrdinaryNode,
                                          ClusterState::GwReady, ClusterState::ChReady};
    EXPECT_EQ(cluster_summary(mixed), (ClusterSummary{1, 1, 1, 2}));
}

TEST(ClusterNetwork, TwoNodeSchedule) {
    // A sends, B sends, A sends.
    const Graph g = Graph::build(2, {{0, 1}});
    ClusterNetwork net(g);
    net.transmit(0, NodeSet{1});
    EXPECT_EQ(net.node(1).state(), ClusterState::ChReady);
    net.transmit(1, NodeSet{0});
    EXPECT_EQ(net.node(1).state(), ClusterState::ClusterHead);
    EXPECT_EQ(net.node(0).state(), ClusterState::OrdinaryNode);
    net.transmit(0, NodeSet{1});
    EXPECT_EQ(net.summary(), (ClusterSummary{1, 0, 1, 0}));
}

TEST(ClusterNetwork, ConvergesAndNeverDeclaresLateHeads) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + rng.below(60);
        const Graph g = random_connected_graph(n, 2.0 + static_cast<double>(rng.below(4)), rng);
        ClusterNetwork net(g);
        std::vector<bool> heard_head(n, false);
        for (int round = 0; round < 3; ++round) {
            for (NodeId v = 0; v < n; ++v) {
                const bool was_head = net.node(v).state() == ClusterState::ClusterHead;
                const auto sent = net.transmit(v, g.neighbors(v));
                if (heard_head[v] && !was_head) {
                    EXPECT_NE(sent.state, ClusterState::ClusterHead);
                }
                if (sent.state == ClusterState::Gateway) {
                    const auto& known = net.node(v).heard_cluster_heads();
                    EXPECT_TRUE(known.contains(sent.ch_pair->first) && known.contains(sent.ch_pair->second));
                }
                for (NodeId y = 0; y < n; ++y) heard_head[y] = heard_head[y] || net.node(y).heard_cluster_head();
                for (NodeId y = 0; y < n; ++y) {
                    if (heard_head[y]) {
                        EXPECT_NE(net.node(y).state(), ClusterState::ChReady);
                    }
                }
            }
        }
        EXPECT_EQ(net.summary().floating_count, 0u) << "seed " << seed << " n " << n;
        EXPECT_GE(net.summary().ch_count, 1u);
    }
}

TEST(ClusterNetwork, Deterministic) {
    Rng rng(3);
    const Graph g = random_connected_graph(40, 4.0, rng);
    ClusterNetwork a(g), b(g);
    for (int r = 0; r < 3; ++r) {
        a.round_robin(g);
        b.round_robin(g);
    }
    EXPECT_EQ(a.states(), b.states());
}

}  // namespace
}  // namespace vodsim
