#pragma once

// Scenario files: line-oriented "key value..." entries grouped in sections.
//
//   [graph]    either the plain graph format (node count line, then "u v"
//              lines), or "random <nodes> <mean_degree> [graph_seed]",
//              or "file <path>" (resolved relative to the scenario file)
//   [links]    capacity <bps> [cross_bps]      default for every edge
//              cap <u> <v> <bps> [cross_bps]
//              loss <p> | loss <u> <v> <p>     peer-to-peer erasure, p < 1
//              source_loss <p> | source_loss <node> <p>   broadcast erasure, p <= 1
//   [streams]  total <S_all>
//              stream <id> <nominal_bps>
//              watch <node> <stream> | watch_all <stream>
//   [gop]      width <bits>
//              epoch <seconds>
//              frame <packets> <distortion> [reference_index]
//   [cpr]      slots <per peer per epoch>
//              order round_robin|random
//              gateway_priority on|off
//   [run]      seed <u64>  gops <n>  source <node>  flood blind|rrdbfsf
//              clustering on|off  probing on|off  probe_count <n>
//              probe_size <bits>  safety <fraction>
//              sweep_trials <n>  sweep_degree <mean degree>
//
// '#' starts a comment.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <locale>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "vodsim/error.hpp"
#include "vodsim/graph.hpp"
#include "vodsim/netcode.hpp"
#include "vodsim/probe.hpp"
#include "vodsim/rrdbfsf.hpp"

namespace vodsim {

struct RandomGraphSpec {
    std::size_t nodes = 0;
    double mean_degree = 4.0;
    std::optional<std::uint64_t> seed;
};

struct LossModel {
    double peer_default = 0.0;
    std::map<Edge, double> peer_links;
    double source_default = 0.0;
    std::map<NodeId, double> source_links;

    double peer_link(NodeId u, NodeId v) const {
        auto it = peer_links.find(u < v ? Edge{u, v} : Edge{v, u});
        return it == peer_links.end() ? peer_default : it->second;
    }

    double source_link(NodeId peer) const {
        auto it = source_links.find(peer);
        return it == source_links.end() ? source_default : it->second;
    }
};

struct StreamCatalog {
    std::uint32_t total = 1;  // S_all
    std::map<StreamId, double> nominal_bps;
    std::map<NodeId, StreamId> watchers;
    std::optional<StreamId> watch_all;

    /// S(n) for every peer; the source never watches.
    std::map<NodeId, StreamId> resolved_watchers(std::size_t node_count, NodeId source) const {
        std::map<NodeId, StreamId> out;
        if (watch_all) {
            for (NodeId v = 0; v < node_count; ++v) {
                if (v != source) out[v] = *watch_all;
            }
        }
        for (auto [node, stream] : watchers) out[node] = stream;
        return out;
    }

    /// S*: streams that have an audience.
    std::set<StreamId> audience_streams(std::size_t node_count, NodeId source) const {
        std::set<StreamId> out;
        for (auto [node, stream] : resolved_watchers(node_count, source)) out.insert(stream);
        return out;
    }
};

enum class PeerOrder { RoundRobin, Random };

struct CprConfig {
    std::uint32_t slots = 0;
    PeerOrder order = PeerOrder::RoundRobin;
    bool gateway_priority = false;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::uint32_t gops = 1;
    NodeId source = 0;
    FloodMode flood = FloodMode::Rrdbfsf;
    bool clustering = true;
    bool probing = true;
    ProbeConfig probe;
    std::uint32_t sweep_trials = 20;
    std::optional<double> sweep_degree;
};

struct ScenarioConfig {
    std::optional<Graph> graph;
    std::optional<RandomGraphSpec> random_graph;
    CapacityMap capacities;
    LossModel loss;
    StreamCatalog streams;
    Gop gop;
    CprConfig cpr;
    RunConfig run;

    Graph topology() const {
        if (graph) return *graph;
        if (!random_graph) throw Error(ErrorCode::InvalidConfig, "scenario has no [graph]");
        Rng rng(random_graph->seed.value_or(mix_seed(run.seed, 0)));
        return random_connected_graph(random_graph->nodes, random_graph->mean_degree, rng);
    }

    double mean_degree() const {
        if (run.sweep_degree) return *run.sweep_degree;
        if (random_graph) return random_graph->mean_degree;
        return 4.0;
    }

    /// Throws InvalidConfig (or the graph's own error) on the first problem.
    void validate() const {
        const Graph g = topology();
        auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidConfig, why); };
        if (!g.contains(run.source)) throw bad("source node " + std::to_string(run.source) + " not in graph");
        if (run.gops == 0) throw bad("gops must be >= 1");
        if (run.gops > 0xFFFF) throw bad("gops must fit a 16-bit GOP id");
        if (!(run.probe.safety > 0.0 && run.probe.safety <= 1.0)) throw bad("safety must be in (0, 1]");
        if (run.probe.probe_count < 2 || run.probe.probe_size_bits == 0) throw bad("bad probe settings");
        gop.validate();

        if (!(loss.peer_default >= 0.0 && loss.peer_default < 1.0)) throw bad("peer loss must be in [0, 1)");
        for (auto [edge, p] : loss.peer_links) {
            if (!(p >= 0.0 && p < 1.0)) throw bad("peer loss must be in [0, 1)");
            if (!g.contains(edge.first) || !g.contains(edge.second) || !g.adjacent(edge.first, edge.second)) {
                throw bad("loss given for a link that is not in the graph");
            }
        }
        if (!(loss.source_default >= 0.0 && loss.source_default <= 1.0)) throw bad("source loss must be in [0, 1]");
        for (auto [node, p] : loss.source_links) {
            if (!(p >= 0.0 && p <= 1.0)) throw bad("source loss must be in [0, 1]");
            if (!g.contains(node)) throw bad("source_loss for unknown node");
        }

        if (streams.total == 0 || streams.total > 256) throw bad("total streams must be in 1..256");
        for (auto [id, rate] : streams.nominal_bps) {
            if (id >= streams.total) throw bad("stream id " + std::to_string(id) + " >= total");
            if (!(rate > 0.0)) throw bad("stream nominal rate must be positive");
        }
        const auto watchers = streams.resolved_watchers(g.node_count(), run.source);
        if (watchers.empty()) throw bad("no peer watches any stream");
        for (auto [node, stream] : watchers) {
            if (!g.contains(node)) throw bad("watcher " + std::to_string(node) + " not in graph");
            if (node == run.source) throw bad("the source node cannot watch a stream");
            if (!streams.nominal_bps.contains(stream)) throw bad("stream " + std::to_string(stream) + " undeclared");
        }

        if (run.probing) {
            for (auto [u, v] : g.edges()) (void)capacities.at(u, v);
        }
        for (const auto& [edge, cap] : capacities.links()) {
            if (!g.contains(edge.first) || !g.contains(edge.second) || !g.adjacent(edge.first, edge.second)) {
                throw bad("capacity given for a link that is not in the graph");
            }
        }
    }
};

namespace detail {

class LineReader {
public:
    LineReader(std::size_t line_no, const std::string& text) : line_no_(line_no), in_(text) {}

    Error error(const std::string& why) const {
        return Error(ErrorCode::ParseError, "line " + std::to_string(line_no_) + ": " + why);
    }

    template <class T>
    T next(const char* what) {
        std::string tok;
        if (!(in_ >> tok)) throw error(std::string("missing ") + what);
        std::istringstream conv(tok);
        conv.imbue(std::locale::classic());
        T value{};
        if (!(conv >> value) || !conv.eof()) throw error(std::string("bad ") + what + " '" + tok + "'");
        if constexpr (std::is_unsigned_v<T>) {
            if (tok.front() == '-') throw error(std::string("negative ") + what);
        }
        return value;
    }

    template <class T>
    std::optional<T> maybe(const char* what) {
        if (done()) return std::nullopt;
        return next<T>(what);
    }

    bool flag(const char* what) {
        const auto word = next<std::string>(what);
        if (word == "on" || word == "true" || word == "yes") return true;
        if (word == "off" || word == "false" || word == "no") return false;
        throw error(std::string("expected on/off for ") + what);
    }

    bool done() {
        in_ >> std::ws;
        return in_.eof();
    }

    void finish() {
        if (!done()) throw error("trailing data");
    }

private:
    std::size_t line_no_;
    std::istringstream in_;
};

}  // namespace detail

inline ScenarioConfig parse_scenario(std::istream& in, const std::filesystem::path& base_dir = {}) {
    ScenarioConfig cfg;
    std::string section;
    std::string graph_text;
    std::optional<std::filesystem::path> graph_file;
    std::set<std::string> seen_sections;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        detail::LineReader r(line_no, line);
        if (r.done()) continue;

        const auto first = line.find_first_not_of(" \t\r");
        if (line[first] == '[') {
            const auto close = line.find(']', first);
            if (close == std::string::npos) throw r.error("unterminated section header");
            section = line.substr(first + 1, close - first - 1);
            static const std::set<std::string> known{"graph", "links", "streams", "gop", "cpr", "run"};
            if (!known.contains(section)) throw r.error("unknown section [" + section + "]");
            if (!seen_sections.insert(section).second) throw r.error("duplicate section [" + section + "]");
            continue;
        }
        if (section.empty()) throw r.error("entry outside of any section");

        if (section == "graph") {
            detail::LineReader peek(line_no, line);
            const auto key = peek.next<std::string>("graph entry");
            if (key == "random") {
                RandomGraphSpec rg;
                rg.nodes = peek.next<std::size_t>("node count");
                rg.mean_degree = peek.next<double>("mean degree");
                rg.seed = peek.maybe<std::uint64_t>("graph seed");
                peek.finish();
                if (rg.nodes == 0) throw peek.error("random graph needs nodes");
                cfg.random_graph = rg;
            } else if (key == "file") {
                graph_file = base_dir / peek.next<std::string>("graph path");
                peek.finish();
            } else {
                graph_text += line + '\n';
            }
            continue;
        }

        const auto key = r.next<std::string>("key");
        if (section == "links") {
            if (key == "capacity") {
                const auto bps = r.next<std::uint64_t>("capacity");
                const auto cross = r.maybe<std::uint64_t>("cross traffic").value_or(0);
                cfg.capacities.set_default({bps, cross});
            } else if (key == "cap") {
                const auto u = r.next<NodeId>("node");
                const auto v = r.next<NodeId>("node");
                const auto bps = r.next<std::uint64_t>("capacity");
                const auto cross = r.maybe<std::uint64_t>("cross traffic").value_or(0);
                cfg.capacities.set(u, v, {bps, cross});
            } else if (key == "loss") {
                const auto a = r.next<double>("loss");
                if (auto b = r.maybe<NodeId>("node")) {
                    const auto p = r.next<double>("loss");
                    const auto u = static_cast<NodeId>(a);
                    if (static_cast<double>(u) != a) throw r.error("bad node id");
                    cfg.loss.peer_links[u < *b ? Edge{u, *b} : Edge{*b, u}] = p;
                } else {
                    cfg.loss.peer_default = a;
                }
            } else if (key == "source_loss") {
                const auto a = r.next<double>("loss");
                if (auto p = r.maybe<double>("loss")) {
                    const auto node = static_cast<NodeId>(a);
                    if (static_cast<double>(node) != a) throw r.error("bad node id");
                    cfg.loss.source_links[node] = *p;
                } else {
                    cfg.loss.source_default = a;
                }
            } else {
                throw r.error("unknown [links] key '" + key + "'");
            }
        } else if (section == "streams") {
            if (key == "total") {
                cfg.streams.total = r.next<std::uint32_t>("total");
            } else if (key == "stream") {
                const auto id = r.next<StreamId>("stream id");
                cfg.streams.nominal_bps[id] = r.next<double>("nominal rate");
            } else if (key == "watch") {
                const auto node = r.next<NodeId>("node");
                cfg.streams.watchers[node] = r.next<StreamId>("stream id");
            } else if (key == "watch_all") {
                cfg.streams.watch_all = r.next<StreamId>("stream id");
            } else {
                throw r.error("unknown [streams] key '" + key + "'");
            }
        } else if (section == "gop") {
            if (key == "width") {
                cfg.gop.packet_width_bits = r.next<std::uint32_t>("width");
            } else if (key == "epoch") {
                cfg.gop.repair_epoch_seconds = r.next<double>("epoch");
            } else if (key == "frame") {
                Frame f;
                f.packet_count = r.next<std::uint32_t>("packet count");
                f.distortion_reduction = r.next<double>("distortion reduction");
                if (auto ref = r.maybe<std::size_t>("reference")) f.reference = *ref;
                cfg.gop.frames.push_back(f);
            } else {
                throw r.error("unknown [gop] key '" + key + "'");
            }
        } else if (section == "cpr") {
            if (key == "slots") {
                cfg.cpr.slots = r.next<std::uint32_t>("slots");
            } else if (key == "order") {
                const auto v = r.next<std::string>("order");
                if (v == "round_robin") cfg.cpr.order = PeerOrder::RoundRobin;
                else if (v == "random") cfg.cpr.order = PeerOrder::Random;
                else throw r.error("order must be round_robin or random");
            } else if (key == "gateway_priority") {
                cfg.cpr.gateway_priority = r.flag("gateway_priority");
            } else {
                throw r.error("unknown [cpr] key '" + key + "'");
            }
        } else if (section == "run") {
            if (key == "seed") cfg.run.seed = r.next<std::uint64_t>("seed");
            else if (key == "gops") cfg.run.gops = r.next<std::uint32_t>("gops");
            else if (key == "source") cfg.run.source = r.next<NodeId>("source");
            else if (key == "flood") {
                const auto v = r.next<std::string>("flood mode");
                if (v != "blind" && v != "rrdbfsf") throw r.error("flood must be blind or rrdbfsf");
                cfg.run.flood = parse_flood_mode(v);
            } else if (key == "clustering") cfg.run.clustering = r.flag("clustering");
            else if (key == "probing") cfg.run.probing = r.flag("probing");
            else if (key == "probe_count") cfg.run.probe.probe_count = r.next<std::size_t>("probe count");
            else if (key == "probe_size") cfg.run.probe.probe_size_bits = r.next<std::uint64_t>("probe size");
            else if (key == "safety") cfg.run.probe.safety = r.next<double>("safety");
            else if (key == "sweep_trials") cfg.run.sweep_trials = r.next<std::uint32_t>("sweep trials");
            else if (key == "sweep_degree") cfg.run.sweep_degree = r.next<double>("sweep degree");
            else throw r.error("unknown [run] key '" + key + "'");
        }
        r.finish();
    }

    const int graph_sources = (graph_text.empty() ? 0 : 1) + (graph_file ? 1 : 0) + (cfg.random_graph ? 1 : 0);
    if (graph_sources > 1) throw Error(ErrorCode::ParseError, "[graph] mixes inline, file and random forms");
    if (!graph_text.empty()) {
        std::istringstream gin(graph_text);
        cfg.graph = parse_graph(gin);
    } else if (graph_file) {
        std::ifstream gin(*graph_file);
        if (!gin) throw Error(ErrorCode::InvalidConfig, "cannot open graph file " + graph_file->string());
        cfg.graph = parse_graph(gin);
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open scenario " + path.string());
    return parse_scenario(in, path.parent_path());
}

}  // namespace vodsim
