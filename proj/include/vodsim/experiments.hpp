#pragma once

// Flood-redundancy experiments over seeded random topologies at several
// network scales.

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "vodsim/graph.hpp"
#include "vodsim/rng.hpp"
#include "vodsim/rrdbfsf.hpp"
#include "vodsim/sim.hpp"

namespace vodsim {

inline constexpr std::size_t kDefaultScales[] = {10, 50, 100};

/// Trial t at a given scale always yields the same graph for a given seed,
/// whatever the mode, so both modes see identical topologies.
inline Graph corpus_graph(std::size_t nodes, double mean_degree, std::uint64_t seed, std::uint32_t trial) {
    Rng rng(mix_seed(seed, (static_cast<std::uint64_t>(nodes) << 32) | trial));
    return random_connected_graph(nodes, mean_degree, rng);
}

/// Averages coverage and repeated receptions over `trials` corpus graphs,
/// flooding from node 0.
inline FloodRow flood_experiment(std::size_t nodes, FloodMode mode, double mean_degree, std::uint32_t trials,
                                 std::uint64_t seed) {
    FloodRow row{mode, nodes, 0.0, 0.0};
    for (std::uint32_t t = 0; t < trials; ++t) {
        const auto m = redundancy_metrics(flood(corpus_graph(nodes, mean_degree, seed, t), 0, mode));
        row.coverage += m.coverage;
        row.avg_repeated += m.repeated;
    }
    if (trials > 0) {
        row.coverage /= trials;
        row.avg_repeated /= trials;
    }
    return row;
}

/// One row per (scale, mode), sorted by scale then mode name.
inline std::vector<FloodRow> flood_sweep(const std::vector<std::size_t>& scales, const std::vector<FloodMode>& modes,
                                         double mean_degree, std::uint32_t trials, std::uint64_t seed) {
    std::vector<FloodRow> rows;
    for (std::size_t n : scales) {
        for (FloodMode m : modes) rows.push_back(flood_experiment(n, m, mean_degree, trials, seed));
    }
    std::sort(rows.begin(), rows.end(), [](const FloodRow& a, const FloodRow& b) {
        return std::tuple(a.nodes, to_string(a.mode)) < std::tuple(b.nodes, to_string(b.mode));
    });
    return rows;
}

}  // namespace vodsim
