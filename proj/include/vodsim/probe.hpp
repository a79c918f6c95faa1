#pragma once

// Packet-pair bandwidth probing and stream rate adaptation.
//
// Probes travel a deterministic fluid network: on each hop the pair is
// served at the link's residual rate (capacity minus cross traffic), so the
// gap between the two packets can only widen. The receiver turns the final
// gap back into a rate. Dispersions are kept as exact rationals, which makes
// the estimate equal the bottleneck residual with no rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vodsim/error.hpp"
#include "vodsim/graph.hpp"

namespace vodsim {

struct LinkCapacity {
    std::uint64_t capacity_bps = 0;
    std::uint64_t cross_bps = 0;

    std::uint64_t residual_bps() const { return capacity_bps - cross_bps; }
};

class CapacityMap {
public:
    CapacityMap() = default;
    explicit CapacityMap(std::optional<LinkCapacity> fallback) : fallback_(fallback) {
        if (fallback_) validate(*fallback_, "default");
    }

    void set(NodeId u, NodeId v, LinkCapacity cap) {
        validate(cap, std::to_string(u) + "-" + std::to_string(v));
        links_[key(u, v)] = cap;
    }

    void set_default(LinkCapacity cap) {
        validate(cap, "default");
        fallback_ = cap;
    }

    const LinkCapacity& at(NodeId u, NodeId v) const {
        if (auto it = links_.find(key(u, v)); it != links_.end()) return it->second;
        if (fallback_) return *fallback_;
        throw Error(ErrorCode::InvalidConfig,
                    "no capacity for link " + std::to_string(u) + "-" + std::to_string(v));
    }

    const std::map<Edge, LinkCapacity>& links() const { return links_; }
    const std::optional<LinkCapacity>& fallback() const { return fallback_; }

private:
    static Edge key(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

    static void validate(const LinkCapacity& cap, const std::string& where) {
        if (cap.capacity_bps == 0 || cap.cross_bps >= cap.capacity_bps) {
            throw Error(ErrorCode::InvalidConfig, "link " + where + ": need 0 <= cross < capacity");
        }
    }

    std::map<Edge, LinkCapacity> links_;
    std::optional<LinkCapacity> fallback_;
};

struct ProbeConfig {
    std::size_t probe_count = 8;
    std::uint64_t probe_size_bits = 12000;
    double safety = 0.9;
};

struct ProbeResult {
    std::vector<NodeId> path;
    double estimate_bps = 0.0;
    /// Per-pair dispersion measured at the requester, in seconds.
    std::vector<double> samples;
};

namespace detail {

/// bits / rate seconds, compared exactly.
struct Gap {
    std::uint64_t bits = 0;
    std::uint64_t rate = 1;

    bool operator<(const Gap& o) const {
        return static_cast<unsigned __int128>(bits) * o.rate < static_cast<unsigned __int128>(o.bits) * rate;
    }
    double seconds() const { return static_cast<double>(bits) / static_cast<double>(rate); }
};

}  // namespace detail

inline ProbeResult probe_path(const Graph& g, const CapacityMap& caps, NodeId src, NodeId dst,
                              std::size_t probe_count, std::uint64_t probe_size_bits) {
    if (probe_count < 2 || probe_size_bits == 0) {
        throw Error(ErrorCode::BadProbeConfig, "need probe_count >= 2 and probe_size > 0");
    }
    if (src == dst) throw Error(ErrorCode::BadProbeConfig, "probe source equals destination");
    ProbeResult result;
    result.path = g.shortest_path(src, dst);

    std::vector<double> rates;
    for (std::size_t k = 0; k < probe_count; ++k) {
        detail::Gap gap{0, 1};  // back-to-back at the sender
        for (std::size_t h = 0; h + 1 < result.path.size(); ++h) {
            const detail::Gap hop{probe_size_bits, caps.at(result.path[h], result.path[h + 1]).residual_bps()};
            gap = std::max(gap, hop);
        }
        result.samples.push_back(gap.seconds());
        // probe_size / (bits / rate); bits == probe_size for every hop gap.
        const auto num = static_cast<unsigned __int128>(probe_size_bits) * gap.rate;
        rates.push_back(static_cast<double>(num / gap.bits) +
                        static_cast<double>(num % gap.bits) / static_cast<double>(gap.bits));
    }
    std::sort(rates.begin(), rates.end());
    const std::size_t mid = rates.size() / 2;
    result.estimate_bps = rates.size() % 2 == 1 ? rates[mid] : (rates[mid - 1] + rates[mid]) / 2.0;
    return result;
}

inline ProbeResult probe_path(const Graph& g, const CapacityMap& caps, NodeId src, NodeId dst,
                              const ProbeConfig& cfg = {}) {
    return probe_path(g, caps, src, dst, cfg.probe_count, cfg.probe_size_bits);
}

inline double adapt_rate(double nominal_bps, const ProbeResult& probe, double safety) {
    if (!(safety > 0.0 && safety <= 1.0)) throw Error(ErrorCode::BadProbeConfig, "safety must be in (0, 1]");
    return std::min(nominal_bps, safety * probe.estimate_bps);
}

/// Packet count of a frame after rate scaling: ceil(count * adapted / nominal),
/// never below one.
inline std::uint32_t scaled_packet_count(std::uint32_t count, double nominal_bps, double adapted_bps) {
    if (nominal_bps <= 0.0 || adapted_bps >= nominal_bps) return count;
    const double scaled = std::ceil(static_cast<double>(count) * adapted_bps / nominal_bps);
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(scaled));
}

}  // namespace vodsim
