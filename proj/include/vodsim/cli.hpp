#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage or scenario
// error, 2 internal error.

#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vodsim/error.hpp"
#include "vodsim/experiments.hpp"
#include "vodsim/rrdbfsf.hpp"
#include "vodsim/scenario.hpp"
#include "vodsim/sim.hpp"

namespace vodsim::cli {

inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kInternalError = 2;

struct Invocation {
    std::string subcommand;
    std::string scenario;
    std::string output;
    std::string log;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::vector<std::size_t> scales{std::begin(kDefaultScales), std::end(kDefaultScales)};
    bool no_clustering = false;
    bool no_probe = false;
};

namespace detail {

inline void emit(const Invocation& inv, const std::string& text, std::ostream& out) {
    if (inv.output.empty()) {
        out << text;
        return;
    }
    std::ofstream file(inv.output, std::ios::binary);
    if (!file) throw Error(ErrorCode::InvalidConfig, "cannot write " + inv.output);
    file << text;
}

inline void write_log(const std::string& path, const FloodTrace& trace) {
    if (path.empty()) return;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
    write_trace_log(file, trace);
}

inline std::vector<FloodMode> modes_of(const Invocation& inv) {
    if (inv.mode) return {parse_flood_mode(*inv.mode)};
    return {FloodMode::Blind, FloodMode::Rrdbfsf};
}

inline ScenarioConfig load(const Invocation& inv) {
    ScenarioConfig cfg = load_scenario(inv.scenario);
    if (inv.seed) cfg.run.seed = *inv.seed;
    if (inv.mode) cfg.run.flood = parse_flood_mode(*inv.mode);
    if (inv.no_clustering) cfg.run.clustering = false;
    if (inv.no_probe) cfg.run.probing = false;
    cfg.validate();
    return cfg;
}

inline std::ostringstream csv_stream(std::uint64_t seed) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "# seed=" << seed << '\n';
    return os;
}

inline int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = load(inv);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    if (inv.subcommand == "validate") {
        const Graph g = cfg.topology();
        out << "ok: " << g.node_count() << " nodes, " << g.edges().size() << " edges, "
            << cfg.streams.resolved_watchers(g.node_count(), cfg.run.source).size() << " peers\n";
        return kOk;
    }
    if (inv.subcommand == "run") {
        const MetricsReport report = run(cfg);
        write_log(inv.log, report.flood_trace);
        emit(inv, report_csv(report), out);
        return kOk;
    }
    if (inv.subcommand == "flood-bench") {
        const Graph g = cfg.topology();
        std::vector<FloodRow> rows;
        for (FloodMode m : modes_of(inv)) {
            const FloodTrace trace = flood(g, cfg.run.source, m);
            const auto metrics = redundancy_metrics(trace);
            rows.push_back({m, g.node_count(), metrics.coverage, metrics.repeated});
            if (inv.mode) write_log(inv.log, trace);
        }
        auto os = csv_stream(cfg.run.seed);
        write_flood_csv(os, rows);
        emit(inv, os.str(), out);
        return kOk;
    }
    if (inv.subcommand == "sweep") {
        const auto rows = flood_sweep(inv.scales, modes_of(inv), cfg.mean_degree(), cfg.run.sweep_trials, cfg.run.seed);
        auto os = csv_stream(cfg.run.seed);
        write_flood_csv(os, rows);
        emit(inv, os.str(), out);
        return kOk;
    }
    err << "error: unknown subcommand " << inv.subcommand << '\n';
    return kConfigError;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Wireless video-on-demand broadcast simulator"};
    app.require_subcommand(1);
    Invocation inv;

    const std::vector<std::string> modes{"blind", "rrdbfsf"};
    auto add_common = [&](CLI::App* sub, bool writes_output) {
        sub->add_option("scenario", inv.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", inv.seed, "Override the scenario seed");
        if (writes_output) sub->add_option("-o,--output", inv.output, "Write CSV here instead of stdout");
    };

    auto* run_cmd = app.add_subcommand("run", "Run one scenario and print the metrics report");
    add_common(run_cmd, true);
    run_cmd->add_option("--mode", inv.mode, "Flood mode")->check(CLI::IsMember(modes));
    run_cmd->add_flag("--no-clustering", inv.no_clustering, "Disable passive clustering");
    run_cmd->add_flag("--no-probe", inv.no_probe, "Disable bandwidth probing");
    run_cmd->add_option("--log", inv.log, "Write the flood trace log here");

    auto* sweep_cmd = app.add_subcommand("sweep", "Flood redundancy across network scales and modes");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--mode", inv.mode, "Restrict to one flood mode")->check(CLI::IsMember(modes));
    sweep_cmd->add_option("--scales", inv.scales, "Comma separated node counts")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);

    auto* bench_cmd = app.add_subcommand("flood-bench", "Flood the scenario graph only");
    add_common(bench_cmd, true);
    bench_cmd->add_option("--mode", inv.mode, "Restrict to one flood mode")->check(CLI::IsMember(modes));
    bench_cmd->add_option("--log", inv.log, "Write the flood trace log here (needs --mode)");

    auto* validate_cmd = app.add_subcommand("validate", "Parse and check a scenario");
    add_common(validate_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }
    inv.subcommand = app.get_subcommands().front()->get_name();

    try {
        return detail::execute(inv, out, err);
    } catch (const Error& e) {
        err << "internal error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
    }
    return kInternalError;
}

}  // namespace vodsim::cli
