#pragma once

// Radius-restrained distributed BFS flooding (RRDBFSF).
//
// Each node knows the radius-3 neighborhood of each direct neighbor (its
// neighbor table) and picks a small set of forwarding neighbors whose
// radius-2 reach takes in every node two or three hops away. Each target is
// charged to the nearest forwarder; a forwarder charged with targets two
// hops past it gets a row of next forwarders.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vodsim/error.hpp"
#include "vodsim/graph.hpp"

namespace vodsim {

inline constexpr std::uint32_t kFloodRadius = 3;

/// NT(v): direct neighbor -> that neighbor's nodes within radius 3.
struct NeighborTable {
    NodeId owner = 0;
    std::map<NodeId, NodeSet> rows;
};

/// RT(v): chosen forwarder -> its next forwarders on behalf of the owner.
struct ForwardingTable {
    NodeId owner = 0;
    std::map<NodeId, NodeSet> rows;

    /// R(v), also exposed as the relative neighbor set RN(v).
    NodeSet forwarders() const {
        std::vector<NodeId> keys;
        keys.reserve(rows.size());
        for (const auto& [id, row] : rows) keys.push_back(id);
        return NodeSet(std::move(keys));
    }

    /// RTL(v): nodes that forward the owner's message the second time.
    NodeSet second_tier() const {
        NodeSet out;
        for (const auto& [id, row] : rows) out = set_union(out, row);
        return out;
    }

    const NodeSet* row(NodeId forwarder) const {
        auto it = rows.find(forwarder);
        return it == rows.end() ? nullptr : &it->second;
    }
};

inline NeighborTable build_neighbor_table(const Graph& g, NodeId v) {
    NeighborTable nt{v, {}};
    for (NodeId n : g.neighbors(v)) nt.rows.emplace(n, g.nodes_within_radius(n, kFloodRadius));
    return nt;
}

namespace detail {

/// Greedy set cover: repeatedly take the candidate covering the most
/// uncovered targets, smallest id on ties. Returns picks in pick order.
inline std::vector<NodeId> greedy_cover(const std::map<NodeId, NodeSet>& covers, NodeSet uncovered) {
    std::vector<NodeId> picks;
    while (!uncovered.empty()) {
        std::optional<NodeId> best;
        std::size_t best_gain = 0;
        for (const auto& [candidate, covered] : covers) {
            const std::size_t gain = set_intersection(covered, uncovered).size();
            if (gain > best_gain) {
                best = candidate;
                best_gain = gain;
            }
        }
        if (!best) break;  // remaining targets not coverable
        uncovered = set_difference(uncovered, covers.at(*best));
        picks.push_back(*best);
    }
    return picks;
}

}  // namespace detail

/// Nodes at distance 2 or 3 from v: the targets the forwarders must reach.
inline NodeSet forwarding_targets(const Graph& g, NodeId v) {
    const auto dist = g.distances_from(v, kFloodRadius);
    std::vector<NodeId> out;
    for (std::size_t t = 0; t < dist.size(); ++t) {
        if (dist[t] >= 2 && dist[t] <= kFloodRadius) out.push_back(static_cast<NodeId>(t));
    }
    return NodeSet(std::move(out));
}

/// Targets inside r's radius-2 reach.
inline NodeSet radius_two_cover(const Graph& g, NodeId v, NodeId r) {
    return set_intersection(g.nodes_within_radius(r, kFloodRadius - 1), forwarding_targets(g, v));
}

/// Computes RT(v). nt must be v's neighbor table; its key set is the
/// candidate forwarder set.
inline ForwardingTable select_forwarding_nodes(const Graph& g, NodeId v, const NeighborTable& nt) {
    ForwardingTable rt{v, {}};
    const NodeSet targets = forwarding_targets(g, v);

    std::map<NodeId, NodeSet> covers;
    for (const auto& [r, reach] : nt.rows) covers.emplace(r, radius_two_cover(g, v, r));
    const auto picks = detail::greedy_cover(covers, targets);

    // Each target goes to the pick closest to it; earlier picks win ties.
    std::map<NodeId, std::vector<std::uint32_t>> from_pick;
    for (NodeId i : picks) from_pick.emplace(i, g.distances_from(i, kFloodRadius - 1));
    std::map<NodeId, std::vector<NodeId>> two_hop_assigned;
    for (NodeId t : targets) {
        NodeId owner = picks.front();
        for (NodeId i : picks) {
            if (from_pick.at(i)[t] < from_pick.at(owner)[t]) owner = i;
        }
        if (from_pick.at(owner)[t] == 2) two_hop_assigned[owner].push_back(t);
    }

    for (NodeId i : picks) {
        // Targets two hops past i need one more relay next to them.
        auto far = two_hop_assigned.find(i);
        if (far != two_hop_assigned.end()) {
            const NodeSet far_set(std::move(far->second));
            std::map<NodeId, NodeSet> next_covers;
            for (NodeId u : g.neighbors(i)) {
                if (u == v) continue;
                std::vector<NodeId> reached;
                for (NodeId t : far_set) {
                    if (g.adjacent(u, t)) reached.push_back(t);
                }
                if (!reached.empty()) next_covers.emplace(u, NodeSet(std::move(reached)));
            }
            const auto next = detail::greedy_cover(next_covers, far_set);
            rt.rows.emplace(i, NodeSet(std::vector<NodeId>(next.begin(), next.end())));
        } else {
            rt.rows.emplace(i, NodeSet{});
        }
    }
    return rt;
}

inline ForwardingTable select_forwarding_nodes(const Graph& g, NodeId v) {
    return select_forwarding_nodes(g, v, build_neighbor_table(g, v));
}

enum class FloodMode { Rrdbfsf, Blind };

constexpr std::string_view to_string(FloodMode mode) {
    return mode == FloodMode::Blind ? "blind" : "rrdbfsf";
}

inline FloodMode parse_flood_mode(std::string_view text) {
    if (text == "blind") return FloodMode::Blind;
    if (text == "rrdbfsf") return FloodMode::Rrdbfsf;
    throw Error(ErrorCode::InvalidConfig, "unknown flood mode '" + std::string(text) + "'");
}

struct Transmission {
    NodeId sender = 0;
    NodeSet recipients;

    friend bool operator==(const Transmission&, const Transmission&) = default;
};

struct FloodTrace {
    NodeId source = 0;
    FloodMode mode = FloodMode::Rrdbfsf;
    std::vector<Transmission> transmissions;
    /// Indexed by node id. The source's entry counts echoes it overheard.
    std::vector<std::uint32_t> receptions;

    std::size_t node_count() const { return receptions.size(); }

    friend bool operator==(const FloodTrace&, const FloodTrace&) = default;
};

/// Synchronous-round flood. Round 0 is the source's transmission; a node
/// scheduled in round k transmits once, to all of its neighbors, in round
/// k + 1 (ascending id within a round).
///
/// Blind: every node retransmits once on first reception.
/// Rrdbfsf: a transmission carries the sender's RT plus the next forwarders
/// it inherited; a node retransmits once if it is named as a forwarder in
/// any transmission it hears.
inline FloodTrace flood(const Graph& g, NodeId source, FloodMode mode) {
    if (!g.contains(source)) throw Error(ErrorCode::UnknownNode, "flood source " + std::to_string(source));
    const std::size_t n = g.node_count();

    FloodTrace trace;
    trace.source = source;
    trace.mode = mode;
    trace.receptions.assign(n, 0);

    std::vector<std::optional<ForwardingTable>> tables(n);
    auto table_of = [&](NodeId x) -> const ForwardingTable& {
        if (!tables[x]) tables[x] = select_forwarding_nodes(g, x);
        return *tables[x];
    };

    std::vector<bool> scheduled(n, false);
    std::vector<NodeSet> inherited(n);
    std::vector<NodeId> round{source};
    scheduled[source] = true;

    while (!round.empty()) {
        std::vector<NodeId> next;
        for (NodeId x : round) {
            const NodeSet recipients = g.neighbors(x);
            trace.transmissions.push_back({x, recipients});

            NodeSet named;
            const ForwardingTable* rt = nullptr;
            if (mode == FloodMode::Rrdbfsf) {
                rt = &table_of(x);
                named = set_union(rt->forwarders(), inherited[x]);
            }
            for (NodeId y : recipients) {
                ++trace.receptions[y];
                if (mode == FloodMode::Rrdbfsf) {
                    if (const NodeSet* row = rt->row(y)) inherited[y] = set_union(inherited[y], *row);
                    if (!named.contains(y)) continue;
                }
                if (!scheduled[y]) {
                    scheduled[y] = true;
                    next.push_back(y);
                }
            }
        }
        std::sort(next.begin(), next.end());
        round = std::move(next);
    }
    return trace;
}

struct RedundancyMetrics {
    double coverage = 0.0;
    double repeated = 0.0;
};

/// coverage = covered non-source nodes / (n - 1);
/// repeated = mean over covered non-source nodes of (receptions - 1).
inline RedundancyMetrics redundancy_metrics(const FloodTrace& trace) {
    if (trace.node_count() < 2 || trace.transmissions.empty()) {
        throw Error(ErrorCode::EmptyTrace, "trace has no transmissions or fewer than two nodes");
    }
    std::size_t covered = 0;
    std::uint64_t extra = 0;
    for (std::size_t y = 0; y < trace.node_count(); ++y) {
        if (y == trace.source || trace.receptions[y] == 0) continue;
        ++covered;
        extra += trace.receptions[y] - 1;
    }
    RedundancyMetrics m;
    m.coverage = static_cast<double>(covered) / static_cast<double>(trace.node_count() - 1);
    m.repeated = covered == 0 ? 0.0 : static_cast<double>(extra) / static_cast<double>(covered);
    return m;
}

/// One "TX <sender> -> <recipients...>" line per transmission.
inline void write_trace_log(std::ostream& os, const FloodTrace& trace) {
    for (const auto& tx : trace.transmissions) {
        os << "TX " << tx.sender << " ->";
        for (NodeId r : tx.recipients) os << ' ' << r;
        os << '\n';
    }
}

inline std::string trace_log(const FloodTrace& trace) {
    std::ostringstream os;
    write_trace_log(os, trace);
    return os.str();
}

}  // namespace vodsim
