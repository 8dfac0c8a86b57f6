#include <cstdio>
#include <filesystem>

#include <CLI11.hpp>

#include "commands.hpp"
#include "rydcz/errors.hpp"

namespace rydcz::cli {

namespace {

void add_common(CLI::App& app, CommonOptions& common, bool seeded) {
    app.add_option("-c,--config", common.config, "JSON config file (a run manifest also works)")->check(CLI::ExistingFile);
    app.add_option("-o,--out-dir", common.out_dir, "Output directory (default: $RYDCZ_OUTPUT_DIR or .)");
    app.add_option("--steps", common.steps, "Integration steps")->check(CLI::PositiveNumber);
    app.add_option("-j,--jobs", common.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    app.add_flag("-q,--quiet", common.quiet, "Suppress the console summary");
    if (seeded) app.add_option("--seed", common.seed, "Master seed; overrides the config");
}

void add_physics(CLI::App& app, PhysicsOverrides& p, bool many) {
    if (many) {
        app.add_option("-p,--preset", p.presets, "Preset ids or pulse JSON files")->delimiter(',');
    } else {
        app.add_option("-p,--preset", p.presets, "Preset id or pulse JSON file")->expected(1);
    }
    app.add_option("--scheme", p.scheme, "single-photon | two-photon")
        ->check(CLI::IsMember({"single-photon", "two-photon"}));
    app.add_option("--tb", p.blockade_tb, "Blockade strength as T*B");
    app.add_option("--tdp", p.intermediate_detuning_t, "T*Delta_P/(2 pi) for two-photon runs");
    app.add_option("--integrator", p.integrator, "magnus4 | midpoint")->check(CLI::IsMember({"magnus4", "midpoint"}));
}

}  // namespace

int main_entry(int argc, const char* const* argv) {
    CLI::App app{"Rydberg-blockade CZ gate simulator and pulse optimizer", "rydcz"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rydcz " RYDCZ_CLI_VERSION);

    CommonOptions common;
    SimulateOverrides sim;
    ScanOverrides scan;
    OptimizeOverrides opt;

    auto* simulate = app.add_subcommand("simulate", "Propagate one pulse and report the CZ fidelity");
    add_common(*simulate, common, false);
    add_physics(*simulate, sim.physics, false);
    simulate->add_option("--epsilon", sim.epsilon, "Common Rabi error: both atoms scaled by 1+eps");
    simulate->add_option("--alpha", sim.alpha, "Atom 2 additionally scaled by 1+alpha");
    simulate->add_option("--ramp", sim.ramp, "Linear Rabi ramp 1 + r (t - T/2)/T");

    auto* scan_cmd = app.add_subcommand("scan", "Robustness or intermediate-detuning scans");
    add_common(*scan_cmd, common, false);
    add_physics(*scan_cmd, scan.physics, true);
    scan_cmd->add_option("--axis", scan.axis, "epsilon | alpha | ramp | deltap")
        ->check(CLI::IsMember({"epsilon", "alpha", "ramp", "deltap"}));
    scan_cmd->add_option("--values", scan.values, "Explicit axis values")->delimiter(',');
    scan_cmd->add_option("--range", scan.range, "lo:hi:count");
    scan_cmd->add_option("--lifetime-preset", scan.lifetime_presets, "Intermediate states for deltap (rb-5p3/2, ...)")
        ->delimiter(',');
    scan_cmd->add_option("--gate-duration", scan.gate_duration, "Physical gate duration in seconds (deltap)");

    auto* optimize = app.add_subcommand("optimize", "Staged robust pulse optimization");
    add_common(*optimize, common, true);
    optimize->add_flag("--resume", opt.resume, "Continue from the checkpoint when it matches the config");
    optimize->add_option("--checkpoint", opt.checkpoint, "Checkpoint path (default: <out>/optimize-checkpoint.json)");
    optimize->add_option("--stop-after", opt.stop_after, "Stop after this many stages")->check(CLI::PositiveNumber);

    auto* montecarlo = app.add_subcommand("montecarlo", "Thermal-motion Monte-Carlo error budget");
    add_common(*montecarlo, common, true);

    auto* presets = app.add_subcommand("presets", "Shipped pulse presets");
    presets->require_subcommand(1);
    auto* presets_list = presets->add_subcommand("list", "List presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(common, sim);
        if (*scan_cmd) return run_scan(common, scan);
        if (*optimize) return run_optimize(common, opt);
        if (*montecarlo) return run_montecarlo(common);
        if (*presets_list) return run_presets_list(common);
    } catch (const PropagationError& e) {
        std::fprintf(stderr, "rydcz: numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "rydcz: %s\n", e.what());
        return kExitUsage;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "rydcz: %s\n", e.what());
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "rydcz: malformed config: %s\n", e.what());
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "rydcz: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace rydcz::cli
