#pragma once

// Passive clustering: every node piggybacks its cluster state on outgoing
// packets and updates its role from what it overhears. Roles are only ever
// declared (CLUSTER_HEAD, GATEWAY) when the node itself sends.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vodsim/error.hpp"
#include "vodsim/graph.hpp"

namespace vodsim {

/// Wire codes are the enumerator values.
enum class ClusterState : std::uint8_t {
    Initial = 0,
    ChReady = 1,
    ClusterHead = 2,
    GwReady = 3,
    Gateway = 4,
    DistGw = 5,  // named by the protocol, never entered
    OrdinaryNode = 6,
};

constexpr std::string_view to_string(ClusterState s) {
    switch (s) {
    case ClusterState::Initial: return "INITIAL";
    case ClusterState::ChReady: return "CH_READY";
    case ClusterState::ClusterHead: return "CLUSTER_HEAD";
    case ClusterState::GwReady: return "GW_READY";
    case ClusterState::Gateway: return "GATEWAY";
    case ClusterState::DistGw: return "DIST_GW";
    case ClusterState::OrdinaryNode: return "ORDINARY_NODE";
    }
    return "?";
}

constexpr bool is_floating(ClusterState s) {
    return s == ClusterState::Initial || s == ClusterState::ChReady || s == ClusterState::GwReady;
}

using ChPair = std::pair<NodeId, NodeId>;

inline ChPair make_ch_pair(NodeId a, NodeId b) { return a < b ? ChPair{a, b} : ChPair{b, a}; }

/// Cluster information carried in the simulated IP option field.
struct ClusterInfo {
    NodeId node_id = 0;
    ClusterState state = ClusterState::Initial;
    std::optional<ChPair> ch_pair;  // present iff state == Gateway

    friend bool operator==(const ClusterInfo&, const ClusterInfo&) = default;
};

/// Layout: state code (1 byte), sender id (4 bytes), then the two CH ids
/// (4 bytes each) for gateways. Big-endian.
inline std::vector<std::uint8_t> encode_cluster_info(const ClusterInfo& info) {
    if (info.ch_pair.has_value() != (info.state == ClusterState::Gateway)) {
        throw Error(ErrorCode::MalformedClusterInfo, "ch_pair must be present exactly for gateways");
    }
    std::vector<std::uint8_t> out;
    out.reserve(13);
    auto put32 = [&](std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
    };
    out.push_back(static_cast<std::uint8_t>(info.state));
    put32(info.node_id);
    if (info.ch_pair) {
        put32(info.ch_pair->first);
        put32(info.ch_pair->second);
    }
    return out;
}

inline ClusterInfo decode_cluster_info(std::span<const std::uint8_t> bytes) {
    if (bytes.empty() || bytes[0] > static_cast<std::uint8_t>(ClusterState::OrdinaryNode)) {
        throw Error(ErrorCode::MalformedClusterInfo, "bad state code");
    }
    ClusterInfo info;
    info.state = static_cast<ClusterState>(bytes[0]);
    const std::size_t expected = info.state == ClusterState::Gateway ? 13 : 5;
    if (bytes.size() != expected) {
        throw Error(ErrorCode::MalformedClusterInfo,
                    "expected " + std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));
    }
    auto get32 = [&](std::size_t at) {
        std::uint32_t v = 0;
        for (std::size_t k = 0; k < 4; ++k) v = (v << 8) | bytes[at + k];
        return v;
    };
    info.node_id = get32(1);
    if (info.state == ClusterState::Gateway) {
        const NodeId a = get32(5);
        const NodeId b = get32(9);
        if (a == b) throw Error(ErrorCode::MalformedClusterInfo, "gateway ch_pair ids must differ");
        info.ch_pair = ChPair{a, b};
    }
    return info;
}

/// One node's passive-clustering state machine.
///
/// Member rule: a node that has heard a cluster head settles as
/// ORDINARY_NODE once every pair of CHs it knows is bridged by a gateway it
/// has overheard; otherwise it is a candidate gateway (GW_READY). A node
/// that knows a single CH has nothing to bridge and is ordinary at once.
/// CH knowledge includes ids learned from gateway ch_pair tags.
class ClusterNode {
public:
    struct ViewEntry {
        ClusterInfo info;
        std::uint64_t received_at = 0;
    };

    ClusterNode(NodeId id, NodeSet neighbors) : id_(id), neighbors_(std::move(neighbors)) {}

    NodeId id() const { return id_; }
    ClusterState state() const { return state_; }
    bool heard_cluster_head() const { return heard_ch_; }
    const std::set<NodeId>& known_cluster_heads() const { return known_chs_; }
    const std::set<NodeId>& heard_cluster_heads() const { return heard_chs_; }
    const std::set<ChPair>& bridged_pairs() const { return bridged_; }
    const std::map<NodeId, ViewEntry>& view() const { return view_; }
    std::optional<ChPair> gateway_pair() const { return gateway_pair_; }

    ClusterState on_receive(const ClusterInfo& info, std::uint64_t now = 0) {
        if (!neighbors_.contains(info.node_id)) {
            throw Error(ErrorCode::NotANeighbor,
                        "node " + std::to_string(id_) + " got info from non-neighbor " + std::to_string(info.node_id));
        }
        view_[info.node_id] = ViewEntry{info, now};

        const bool from_ch = info.state == ClusterState::ClusterHead;
        if (from_ch) {
            heard_ch_ = true;
            heard_chs_.insert(info.node_id);
            known_chs_.insert(info.node_id);
        }
        if (info.state == ClusterState::Gateway && info.ch_pair) {
            known_chs_.insert(info.ch_pair->first);
            known_chs_.insert(info.ch_pair->second);
            bridged_.insert(make_ch_pair(info.ch_pair->first, info.ch_pair->second));
        }

        switch (state_) {
        case ClusterState::ClusterHead:
        case ClusterState::Gateway:
        case ClusterState::DistGw:
            break;
        case ClusterState::Initial:
            if (heard_ch_) {
                state_ = member_state();
            } else if (!from_ch) {
                state_ = ClusterState::ChReady;
            }
            break;
        case ClusterState::ChReady:
        case ClusterState::GwReady:
        case ClusterState::OrdinaryNode:
            if (heard_ch_) state_ = member_state();
            break;
        }
        return state_;
    }

    /// Applies the send-time declaration and returns the info to piggyback.
    ClusterInfo on_send() {
        if (state_ == ClusterState::ChReady) {
            state_ = ClusterState::ClusterHead;
        } else if (state_ == ClusterState::GwReady) {
            gateway_pair_ = first_unbridged_pair();
            state_ = gateway_pair_ ? ClusterState::Gateway : ClusterState::OrdinaryNode;
        }
        ClusterInfo info{id_, state_, std::nullopt};
        if (state_ == ClusterState::Gateway) info.ch_pair = gateway_pair_;
        return info;
    }

private:
    // Only heads heard directly create an obligation to bridge; ids learned
    // from gateway tags just mark pairs as already served.
    std::optional<ChPair> first_unbridged_pair() const {
        for (auto a = heard_chs_.begin(); a != heard_chs_.end(); ++a) {
            for (auto b = std::next(a); b != heard_chs_.end(); ++b) {
                if (!bridged_.contains(ChPair{*a, *b})) return ChPair{*a, *b};
            }
        }
        return std::nullopt;
    }

    ClusterState member_state() const {
        return first_unbridged_pair() ? ClusterState::GwReady : ClusterState::OrdinaryNode;
    }

    NodeId id_;
    NodeSet neighbors_;
    ClusterState state_ = ClusterState::Initial;
    bool heard_ch_ = false;
    std::set<NodeId> heard_chs_;
    std::set<NodeId> known_chs_;
    std::set<ChPair> bridged_;
    std::map<NodeId, ViewEntry> view_;
    std::optional<ChPair> gateway_pair_;
};

struct ClusterSummary {
    std::size_t ch_count = 0;
    std::size_t gateway_count = 0;
    std::size_t ordinary_count = 0;
    std::size_t floating_count = 0;

    friend bool operator==(const ClusterSummary&, const ClusterSummary&) = default;
};

inline ClusterSummary cluster_summary(std::span<const ClusterState> states) {
    ClusterSummary s;
    for (ClusterState st : states) {
        switch (st) {
        case ClusterState::ClusterHead: ++s.ch_count; break;
        case ClusterState::Gateway:
        case ClusterState::DistGw: ++s.gateway_count; break;
        case ClusterState::OrdinaryNode: ++s.ordinary_count; break;
        default: ++s.floating_count; break;
        }
    }
    return s;
}

/// All node machines of a topology. A transmission is one on_send at the
/// sender followed by on_receive at every neighbor that hears it.
class ClusterNetwork {
public:
    explicit ClusterNetwork(const Graph& g) {
        nodes_.reserve(g.node_count());
        for (NodeId v = 0; v < g.node_count(); ++v) nodes_.emplace_back(v, g.neighbors(v));
    }

    ClusterInfo transmit(NodeId sender, const NodeSet& hearers) {
        const ClusterInfo info = nodes_.at(sender).on_send();
        ++clock_;
        for (NodeId h : hearers) nodes_.at(h).on_receive(info, clock_);
        return info;
    }

    /// Every node sends once, in ascending id order, heard by all neighbors.
    void round_robin(const Graph& g) {
        for (NodeId v = 0; v < g.node_count(); ++v) transmit(v, g.neighbors(v));
    }

    std::vector<ClusterState> states() const {
        std::vector<ClusterState> out;
        out.reserve(nodes_.size());
        for (const auto& n : nodes_) out.push_back(n.state());
        return out;
    }

    ClusterSummary summary() const {
        const auto s = states();
        return cluster_summary(s);
    }

    const ClusterNode& node(NodeId v) const { return nodes_.at(v); }
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<ClusterNode> nodes_;
    std::uint64_t clock_ = 0;
};

}  // namespace vodsim
