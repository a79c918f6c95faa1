#pragma once

// Deterministic slotted simulation of broadcast delivery plus cooperative
// peer repair.
//
// Epoch e: the source broadcasts GOP e of every watched stream over
// per-peer erasure channels, then peers spend the epoch's repair slots on
// GOP e - 1. Repair for the last GOP happens in one extra trailing epoch.
// A routing-message flood over the topology is measured once per run.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vodsim/clustering.hpp"
#include "vodsim/error.hpp"
#include "vodsim/graph.hpp"
#include "vodsim/netcode.hpp"
#include "vodsim/probe.hpp"
#include "vodsim/rng.hpp"
#include "vodsim/rrdbfsf.hpp"
#include "vodsim/scenario.hpp"

namespace vodsim {

struct FloodRow {
    FloodMode mode = FloodMode::Rrdbfsf;
    std::size_t nodes = 0;
    double coverage = 0.0;
    double avg_repeated = 0.0;
};

struct ProbeRow {
    NodeId src = 0;
    NodeId dst = 0;
    double estimate_bps = 0.0;
};

struct PeerRow {
    NodeId peer = 0;
    StreamId stream = 0;
    std::size_t gops = 0;
    double pre_decode_ratio = 0.0;
    double post_decode_ratio = 0.0;
    double pre_distortion = 0.0;
    double post_distortion = 0.0;
};

struct MetricsReport {
    std::uint64_t seed = 0;
    std::vector<FloodRow> flood;
    std::vector<ProbeRow> probes;
    std::vector<PeerRow> peers;
    std::optional<ClusterSummary> cluster;
    FloodTrace flood_trace;

    double mean_pre_decode_ratio() const { return mean(&PeerRow::pre_decode_ratio); }
    double mean_post_decode_ratio() const { return mean(&PeerRow::post_decode_ratio); }

private:
    double mean(double PeerRow::*field) const {
        if (peers.empty()) return 0.0;
        double sum = 0.0;
        for (const auto& p : peers) sum += p.*field;
        return sum / static_cast<double>(peers.size());
    }
};

/// Picks the stream a peer repairs in its slot.
///
/// The peer's own stream wins while a neighbor watching it still lacks it; otherwise
/// the other streams in A_n are served round-robin through `cursor`. The
/// own stream is the fallback when it is all the peer holds.
inline StreamId stream_selection(const PeerState& peer, std::span<const StreamId> repairable, bool own_stream_needed,
                                 std::size_t& cursor) {
    if (repairable.empty()) {
        throw Error(ErrorCode::NothingToRepair, "peer " + std::to_string(peer.id()) + " holds nothing to repair");
    }
    const bool holds_own = std::find(repairable.begin(), repairable.end(), peer.watched()) != repairable.end();
    if (holds_own && own_stream_needed) return peer.watched();
    std::vector<StreamId> others;
    for (StreamId s : repairable) {
        if (s != peer.watched()) others.push_back(s);
    }
    if (others.empty()) return peer.watched();
    return others[cursor++ % others.size()];
}

namespace detail {

inline std::vector<FrameBlob> random_frames(const Gop& gop, Rng& rng) {
    std::vector<FrameBlob> blobs;
    const std::size_t w = gop.packet_width_bits;
    for (const auto& f : gop.frames) {
        // Any length in ((B - 1) W, B W] packs into exactly B packets.
        const std::size_t bits = (f.packet_count - 1) * w + 1 + rng.below(w);
        FrameBlob blob{Bytes((bits + 7) / 8), bits};
        for (auto& b : blob.bytes) b = rng.byte();
        blobs.push_back(std::move(blob));
    }
    return blobs;
}

inline Gop scaled_gop(const Gop& base, double nominal_bps, double adapted_bps) {
    Gop g = base;
    for (auto& f : g.frames) f.packet_count = scaled_packet_count(f.packet_count, nominal_bps, adapted_bps);
    return g;
}

}  // namespace detail

inline MetricsReport run(const ScenarioConfig& config) {
    config.validate();
    const Graph g = config.topology();
    const std::uint64_t seed = config.run.seed;
    const NodeId source = config.run.source;

    Rng payload_rng(mix_seed(seed, 1));
    Rng loss_rng(mix_seed(seed, 2));
    Rng coef_rng(mix_seed(seed, 3));
    Rng order_rng(mix_seed(seed, 4));

    MetricsReport report;
    report.seed = seed;

    std::optional<ClusterNetwork> clusters;
    if (config.run.clustering) clusters.emplace(g);

    // Routing-message flood; its transmissions also carry cluster info.
    report.flood_trace = flood(g, source, config.run.flood);
    const auto fm = redundancy_metrics(report.flood_trace);
    report.flood.push_back({config.run.flood, g.node_count(), fm.coverage, fm.repeated});
    if (clusters) {
        for (const auto& tx : report.flood_trace.transmissions) clusters->transmit(tx.sender, tx.recipients);
    }

    const auto watchers = config.streams.resolved_watchers(g.node_count(), source);
    std::map<StreamId, std::vector<NodeId>> audience;
    for (auto [node, stream] : watchers) audience[stream].push_back(node);

    // Probe each requester and compress each stream to its weakest viewer.
    std::map<StreamId, Gop> layouts;
    for (const auto& [stream, viewers] : audience) {
        const double nominal = config.streams.nominal_bps.at(stream);
        double adapted = nominal;
        if (config.run.probing) {
            for (NodeId peer : viewers) {
                const auto probe = probe_path(g, config.capacities, source, peer, config.run.probe);
                report.probes.push_back({source, peer, probe.estimate_bps});
                adapted = std::min(adapted, adapt_rate(nominal, probe, config.run.probe.safety));
            }
        }
        layouts.emplace(stream, detail::scaled_gop(config.gop, nominal, adapted));
    }

    std::map<NodeId, PeerState> peers;
    for (auto [node, stream] : watchers) peers.emplace(node, PeerState(node, stream));
    std::map<NodeId, PeerRow> rows;
    for (auto [node, stream] : watchers) rows[node] = PeerRow{node, stream, 0, 0, 0, 0, 0};

    std::map<NodeId, std::size_t> cursors;
    const std::uint32_t gops = config.run.gops;

    for (std::uint32_t epoch = 0; epoch <= gops; ++epoch) {
        if (epoch < gops) {
            const GopId gop_id = epoch;
            for (const auto& [stream, layout] : layouts) {
                for (auto& [node, peer] : peers) {
                    peer.track(stream, gop_id, layout.total_packets(), layout.packet_width_bits);
                }
                const auto natives = packetize(layout, detail::random_frames(layout, payload_rng));
                for (NodeId node : audience.at(stream)) {
                    PeerState& peer = peers.at(node);
                    const double p = config.loss.source_link(node);
                    for (std::size_t pos = 0; pos < natives.size(); ++pos) {
                        if (!loss_rng.bernoulli(p)) peer.receive_native(gop_id, pos, natives[pos].payload);
                    }
                    const auto pre = decode_gop(peer, stream, gop_id, layout);
                    rows[node].pre_decode_ratio += pre.decode_ratio(layout.total_packets());
                    rows[node].pre_distortion += pre.distortion_reduction_total;
                }
            }
        }
        if (epoch == 0) continue;

        const GopId repair_gop = epoch - 1;
        std::map<StreamId, GopId> under_repair;
        for (const auto& [stream, layout] : layouts) under_repair[stream] = repair_gop;

        for (std::uint32_t slot = 0; slot < config.cpr.slots; ++slot) {
            std::vector<NodeId> order;
            for (const auto& [node, peer] : peers) order.push_back(node);
            if (config.cpr.order == PeerOrder::Random) {
                for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng.below(i)]);
            }
            if (clusters && config.cpr.gateway_priority) {
                std::stable_partition(order.begin(), order.end(), [&](NodeId v) {
                    return clusters->node(v).state() == ClusterState::Gateway;
                });
            }
            for (NodeId node : order) {
                PeerState& sender = peers.at(node);
                const auto repairable = sender.repairable_streams(under_repair);
                if (repairable.empty()) continue;

                const NodeSet neighbors = g.neighbors(node);
                bool own_needed = false;
                for (NodeId q : neighbors) {
                    auto it = peers.find(q);
                    if (it == peers.end() || it->second.watched() != sender.watched()) continue;
                    if (!it->second.buffer(sender.watched(), repair_gop).decoder.full_rank()) own_needed = true;
                }
                const StreamId stream = stream_selection(sender, repairable, own_needed, cursors[node]);

                NcPacket pkt;
                try {
                    pkt = stream == sender.watched() ? encode_watching(sender, repair_gop, coef_rng)
                                                     : encode_relay(sender, stream, repair_gop, coef_rng);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NothingToEncode) throw;
                    continue;
                }

                NodeSet hearers;
                for (NodeId q : neighbors) {
                    if (loss_rng.bernoulli(config.loss.peer_link(node, q))) continue;
                    hearers.insert(q);
                    if (auto it = peers.find(q); it != peers.end()) it->second.receive_nc(pkt);
                }
                if (clusters) clusters->transmit(node, hearers);
            }
        }

        for (auto& [node, peer] : peers) {
            const StreamId stream = peer.watched();
            const Gop& layout = layouts.at(stream);
            const auto post = decode_gop(peer, stream, repair_gop, layout);
            PeerRow& row = rows[node];
            row.post_decode_ratio += post.decode_ratio(layout.total_packets());
            row.post_distortion += post.distortion_reduction_total;
            ++row.gops;
            for (const auto& [s, l] : layouts) peer.drop(s, repair_gop);
        }
    }

    for (auto& [node, row] : rows) {
        if (row.gops > 0) {
            row.pre_decode_ratio /= static_cast<double>(row.gops);
            row.post_decode_ratio /= static_cast<double>(row.gops);
        }
        report.peers.push_back(row);
    }
    if (clusters) report.cluster = clusters->summary();
    return report;
}

namespace detail {

inline std::ostream& fixed6(std::ostream& os) { return os << std::fixed << std::setprecision(6); }

}  // namespace detail

inline void write_flood_csv(std::ostream& os, std::span<const FloodRow> rows) {
    os << "mode,nodes,coverage,avg_repeated\n";
    for (const auto& r : rows) {
        os << to_string(r.mode) << ',' << r.nodes << ',' << detail::fixed6 << r.coverage << ',' << r.avg_repeated
           << '\n';
    }
}

/// Report layout: a "# seed=" comment, then blank-line separated blocks,
/// each with its own header row.
inline void write_report_csv(std::ostream& out, const MetricsReport& report) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "# seed=" << report.seed << '\n';
    write_flood_csv(os, report.flood);

    os << "\nprobe,src,dst,estimate_bps\n";
    for (const auto& p : report.probes) os << "probe," << p.src << ',' << p.dst << ',' << p.estimate_bps << '\n';

    os << "\npeer,id,stream,gops,pre_decode_ratio,post_decode_ratio,pre_distortion,post_distortion\n";
    for (const auto& p : report.peers) {
        os << "peer," << p.peer << ',' << p.stream << ',' << p.gops << ',' << p.pre_decode_ratio << ','
           << p.post_decode_ratio << ',' << p.pre_distortion << ',' << p.post_distortion << '\n';
    }

    os << "\ncluster,ch_count,gateway_count,ordinary_count,floating_count\n";
    if (report.cluster) {
        const auto& c = *report.cluster;
        os << "cluster," << c.ch_count << ',' << c.gateway_count << ',' << c.ordinary_count << ','
           << c.floating_count << '\n';
    }

    os << "\nsummary,mean_pre_decode_ratio,mean_post_decode_ratio\n";
    os << "summary," << report.mean_pre_decode_ratio() << ',' << report.mean_post_decode_ratio() << '\n';
    out << os.str();
}

inline std::string report_csv(const MetricsReport& report) {
    std::ostringstream os;
    write_report_csv(os, report);
    return os.str();
}

}  // namespace vodsim
