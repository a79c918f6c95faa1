#pragma once

// Static undirected topology and the neighbor-set queries used by flooding,
// clustering and probing.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <istream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vodsim/error.hpp"
#include "vodsim/rng.hpp"

namespace vodsim {

using NodeId = std::uint32_t;

inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

/// Sorted, duplicate-free set of node ids.
class NodeSet {
public:
    using const_iterator = std::vector<NodeId>::const_iterator;

    NodeSet() = default;
    NodeSet(std::initializer_list<NodeId> ids) : ids_(ids) { normalize(); }
    explicit NodeSet(std::vector<NodeId> ids) : ids_(std::move(ids)) { normalize(); }

    bool contains(NodeId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

    void insert(NodeId id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) ids_.insert(it, id);
    }

    void erase(NodeId id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it != ids_.end() && *it == id) ids_.erase(it);
    }

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const_iterator begin() const { return ids_.begin(); }
    const_iterator end() const { return ids_.end(); }
    const std::vector<NodeId>& ids() const { return ids_; }

    bool is_subset_of(const NodeSet& other) const {
        return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
    }

    friend NodeSet set_union(const NodeSet& a, const NodeSet& b) {
        NodeSet out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.ids_));
        return out;
    }

    friend NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
        NodeSet out;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.ids_));
        return out;
    }

    friend NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
        NodeSet out;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.ids_));
        return out;
    }

    friend bool operator==(const NodeSet&, const NodeSet&) = default;

private:
    void normalize() {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }

    std::vector<NodeId> ids_;
};

inline std::ostream& operator<<(std::ostream& os, const NodeSet& s) {
    os << '{';
    bool first = true;
    for (NodeId id : s) {
        if (!first) os << ',';
        os << id;
        first = false;
    }
    return os << '}';
}

using Edge = std::pair<NodeId, NodeId>;

/// Immutable, connected, simple undirected graph over nodes 0..n-1.
class Graph {
public:
    /// Validates and builds. Throws SelfLoop, DuplicateEdge, UnknownNode or
    /// DisconnectedGraph.
    static Graph build(std::size_t node_count, const std::vector<Edge>& edges) {
        if (node_count == 0) throw Error(ErrorCode::InvalidConfig, "graph needs at least one node");
        Graph g;
        g.adjacency_.resize(node_count);
        for (auto [u, v] : edges) {
            if (u >= node_count || v >= node_count) {
                throw Error(ErrorCode::UnknownNode, "edge (" + std::to_string(u) + "," +
                                                        std::to_string(v) + ") references a node >= " +
                                                        std::to_string(node_count));
            }
            if (u == v) throw Error(ErrorCode::SelfLoop, "self-loop at node " + std::to_string(u));
            g.adjacency_[u].push_back(v);
            g.adjacency_[v].push_back(u);
            g.edges_.emplace_back(std::min(u, v), std::max(u, v));
        }
        for (auto& row : g.adjacency_) {
            std::sort(row.begin(), row.end());
            auto dup = std::adjacent_find(row.begin(), row.end());
            if (dup != row.end()) {
                throw Error(ErrorCode::DuplicateEdge, "edge to node " + std::to_string(*dup) + " repeated");
            }
        }
        std::sort(g.edges_.begin(), g.edges_.end());

        const auto dist = g.distances_from(0);
        for (std::size_t i = 0; i < node_count; ++i) {
            if (dist[i] == kUnreachable) {
                throw Error(ErrorCode::DisconnectedGraph,
                            "node " + std::to_string(i) + " is unreachable from node 0");
            }
        }
        return g;
    }

    std::size_t node_count() const { return adjacency_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    bool contains(NodeId x) const { return x < adjacency_.size(); }

    bool adjacent(NodeId u, NodeId v) const {
        require(u);
        require(v);
        return std::binary_search(adjacency_[u].begin(), adjacency_[u].end(), v);
    }

    std::size_t degree(NodeId x) const {
        require(x);
        return adjacency_[x].size();
    }

    /// N(x).
    NodeSet neighbors(NodeId x) const {
        require(x);
        return NodeSet(adjacency_[x]);
    }

    /// Hop distances from x; kUnreachable never appears on a validated graph.
    std::vector<std::uint32_t> distances_from(NodeId x, std::uint32_t max_depth = kUnreachable) const {
        require(x);
        std::vector<std::uint32_t> dist(adjacency_.size(), kUnreachable);
        std::deque<NodeId> queue{x};
        dist[x] = 0;
        while (!queue.empty()) {
            NodeId u = queue.front();
            queue.pop_front();
            if (dist[u] >= max_depth) continue;
            for (NodeId w : adjacency_[u]) {
                if (dist[w] == kUnreachable) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        return dist;
    }

    /// All y != x with dist(x, y) <= r. r = 3 gives TLen(x); r = 1 gives N(x).
    NodeSet nodes_within_radius(NodeId x, std::uint32_t r) const {
        const auto dist = distances_from(x, r);
        std::vector<NodeId> out;
        for (std::size_t y = 0; y < dist.size(); ++y) {
            if (y != x && dist[y] <= r) out.push_back(static_cast<NodeId>(y));
        }
        return NodeSet(std::move(out));
    }

    /// Shortest hop path from src to dst. Among equal-length paths the one
    /// found by BFS over ascending neighbor ids wins.
    std::vector<NodeId> shortest_path(NodeId src, NodeId dst) const {
        require(src);
        require(dst);
        std::vector<NodeId> parent(adjacency_.size(), kUnreachable);
        std::deque<NodeId> queue{src};
        parent[src] = src;
        while (!queue.empty() && parent[dst] == kUnreachable) {
            NodeId u = queue.front();
            queue.pop_front();
            for (NodeId w : adjacency_[u]) {
                if (parent[w] == kUnreachable) {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if (parent[dst] == kUnreachable) {
            throw Error(ErrorCode::NoPath, "no path " + std::to_string(src) + " -> " + std::to_string(dst));
        }
        std::vector<NodeId> path{dst};
        while (path.back() != src) path.push_back(parent[path.back()]);
        std::reverse(path.begin(), path.end());
        return path;
    }

private:
    void require(NodeId x) const {
        if (!contains(x)) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(x) + " not in graph");
    }

    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<Edge> edges_;
};

/// Parses the plain-text graph format: first significant line is the node
/// count, then one "u v" pair per line. '#' starts a comment.
inline Graph parse_graph(std::istream& in) {
    std::optional<std::size_t> count;
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first)) continue;
        auto bad = [&](const std::string& why) {
            return Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + why);
        };
        std::istringstream first_field(first);
        unsigned long long a = 0;
        if (!(first_field >> a) || !first_field.eof()) throw bad("expected a decimal id, got '" + first + "'");
        if (!count) {
            std::string extra;
            if (fields >> extra) throw bad("node count line has trailing data");
            count = static_cast<std::size_t>(a);
            continue;
        }
        unsigned long long b = 0;
        std::string extra;
        if (!(fields >> b)) throw bad("edge line needs two ids");
        if (fields >> extra) throw bad("edge line has trailing data");
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
    if (!count) throw Error(ErrorCode::ParseError, "missing node count");
    return Graph::build(*count, edges);
}

inline std::string format_graph(const Graph& g) {
    std::ostringstream os;
    os << g.node_count() << '\n';
    for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
    return os.str();
}

/// Random connected graph: a uniformly attached random tree plus extra
/// random edges until the mean degree reaches mean_degree (capped by the
/// complete graph).
inline Graph random_connected_graph(std::size_t node_count, double mean_degree, Rng& rng) {
    std::vector<Edge> edges;
    std::vector<std::vector<bool>> present(node_count, std::vector<bool>(node_count, false));
    auto add = [&](NodeId u, NodeId v) {
        edges.emplace_back(u, v);
        present[u][v] = present[v][u] = true;
    };
    for (std::size_t i = 1; i < node_count; ++i) {
        add(static_cast<NodeId>(rng.below(i)), static_cast<NodeId>(i));
    }
    const std::size_t max_edges = node_count * (node_count - 1) / 2;
    auto target = static_cast<std::size_t>(mean_degree * static_cast<double>(node_count) / 2.0 + 0.5);
    target = std::min(std::max(target, edges.size()), max_edges);
    while (edges.size() < target) {
        auto u = static_cast<NodeId>(rng.below(node_count));
        auto v = static_cast<NodeId>(rng.below(node_count));
        if (u != v && !present[u][v]) add(u, v);
    }
    return Graph::build(node_count, edges);
}

}  // namespace vodsim
