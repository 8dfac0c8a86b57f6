#include <chrono>
#include <cstdio>
#include <optional>

#include "commands.hpp"
#include "rydcz/errors.hpp"
#include "rydcz/fidelity.hpp"
#include "rydcz/io.hpp"
#include "rydcz/montecarlo.hpp"
#include "rydcz/optimizer.hpp"
#include "rydcz/scans.hpp"

namespace rydcz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PropagationOptions propagation_from(const json& doc) {
    const json& p = doc.at("propagation");
    PropagationOptions o;
    o.steps = p.value("steps", o.steps);
    const std::string integrator = p.value("integrator", "magnus4");
    if (integrator == "magnus4") {
        o.integrator = Integrator::Magnus4;
    } else if (integrator == "midpoint") {
        o.integrator = Integrator::Midpoint;
    } else {
        throw ConfigError("integrator must be 'magnus4' or 'midpoint'");
    }
    const std::string method = p.value("method", "blocks");
    if (method == "blocks") {
        o.method = PropagationMethod::Blocks;
    } else if (method == "dense") {
        o.method = PropagationMethod::Dense;
    } else {
        throw ConfigError("method must be 'blocks' or 'dense'");
    }
    if (o.steps < 1) throw ConfigError("steps must be >= 1");
    return o;
}

/// File-name friendly label: preset id, or the stem of a pulse file.
std::string pulse_label(const std::string& pulse_ref) {
    std::string label = fs::path(pulse_ref).extension() == ".json" ? fs::path(pulse_ref).stem().string() : pulse_ref;
    for (char& c : label) {
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    }
    return label;
}

class Clock {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(const fs::path& out, const std::string& command, const json& config, const Clock& clock,
                    const std::vector<fs::path>& outputs) {
    json paths = json::array();
    for (const auto& p : outputs) paths.push_back(p.string());
    json manifest{{"kind", "run-manifest"},
                  {"command", command},
                  {"config", config},
                  {"master_seed", config.contains("master_seed") ? config.at("master_seed") : json()},
                  {"version", std::string(io::version())},
                  {"wall_clock_seconds", clock.seconds()},
                  {"outputs", paths}};
    io::write_json(out / (command + "-manifest.json"), manifest);
}

GateSystem system_for(const json& doc, const PulseProfile& pulse) {
    return dimensionless_system(pulse, parse_level_scheme(doc.at("scheme").get<std::string>()),
                                doc.at("blockade_tb").get<double>(), doc.at("intermediate_detuning_t").get<double>());
}

}  // namespace

int run_simulate(const CommonOptions& common, const SimulateOverrides& flags) {
    const Clock clock;
    const json doc = resolve_simulate(common, flags);
    PulseProfile pulse = resolve_pulse(doc.at("pulse").get<std::string>());
    const double ramp = doc.at("ramp").get<double>();
    pulse.amplitude = ramped_amplitude(pulse.amplitude, ramp);
    const double eps = doc.at("epsilon").get<double>();
    const double alpha = doc.at("alpha").get<double>();
    DriveModifiers modifiers;
    modifiers.atom1.amplitude_scale = 1.0 + eps;
    modifiers.atom2.amplitude_scale = (1.0 + eps) * (1.0 + alpha);
    const FidelityReport r = gate_fidelity(system_for(doc, pulse), pulse, modifiers, propagation_from(doc));

    const fs::path out = resolve_out_dir(common);
    const fs::path report_path = out / ("simulate-" + pulse_label(doc.at("pulse").get<std::string>()) + ".json");
    io::write_json(report_path, {{"fidelity", r.fidelity},
                                 {"infidelity", r.infidelity},
                                 {"theta1", r.theta1},
                                 {"theta2", r.theta2},
                                 {"leakage", r.leakage}});
    write_manifest(out, "simulate", doc, clock, {report_path});
    if (!common.quiet) {
        std::printf("pulse       %s\nfidelity    %.12f\ninfidelity  %.6e\ntheta1      %.9f\ntheta2      %.9f\nleakage     %.6e\n",
                    pulse.name.c_str(), r.fidelity, r.infidelity, r.theta1, r.theta2, r.leakage);
    }
    return kExitOk;
}

int run_scan(const CommonOptions& common, const ScanOverrides& flags) {
    const Clock clock;
    const json doc = resolve_scan(common, flags);
    const std::string axis = doc.at("axis").get<std::string>();
    const auto values = doc.at("values").get<std::vector<double>>();
    ScanOptions options;
    options.propagation = propagation_from(doc);
    options.jobs = common.jobs;

    std::vector<ScanResult> scans;
    std::vector<std::string> labels;
    for (const auto& pulse_ref : doc.at("presets").get<std::vector<std::string>>()) {
        const PulseProfile pulse = resolve_pulse(pulse_ref);
        if (axis == "deltap") {
            for (const auto& state : doc.at("lifetime_presets").get<std::vector<std::string>>()) {
                LifetimeScanConfig lc;
                lc.lifetime_p = intermediate_state_preset(state).lifetime;
                lc.lifetime_r = doc.at("lifetime_r").get<double>();
                lc.gate_duration = doc.at("gate_duration").get<double>();
                lc.blockade_tb = doc.at("blockade_tb").get<double>();
                lc.label = state;
                scans.push_back(scan_intermediate_detuning(pulse, values, lc, options));
                labels.push_back(pulse_label(pulse_ref) + "@" + pulse_label(state));
            }
            continue;
        }
        const GateSystem system = system_for(doc, pulse);
        if (axis == "epsilon") {
            scans.push_back(scan_epsilon(pulse, values, system, options));
        } else if (axis == "alpha") {
            scans.push_back(scan_alpha(pulse, values, system, options));
        } else {
            scans.push_back(scan_ramp(pulse, values, system, options));
        }
        labels.push_back(pulse_label(pulse_ref));
    }

    const fs::path out = resolve_out_dir(common);
    std::vector<fs::path> outputs;
    for (std::size_t i = 0; i < scans.size(); ++i) {
        scans[i].metadata["label"] = labels[i];
        const fs::path path = out / ("scan-" + axis + "-" + labels[i] + ".csv");
        write_scan(scans[i], path);
        outputs.push_back(path);
        outputs.push_back(sidecar_path(path));
    }
    const fs::path combined = out / ("scan-" + axis + "-combined.csv");
    io::atomic_write(combined, combined_csv(scans, labels));
    outputs.push_back(combined);
    write_manifest(out, "scan", doc, clock, outputs);

    if (!common.quiet) {
        for (std::size_t i = 0; i < scans.size(); ++i) {
            double worst = 0.0;
            for (double x : scans[i].infidelities) worst = std::max(worst, x);
            std::printf("%-28s %zu points, max infidelity %.3e\n", labels[i].c_str(), scans[i].values.size(), worst);
        }
        std::printf("wrote %s\n", combined.string().c_str());
    }
    return kExitOk;
}

int run_optimize(const CommonOptions& common, const OptimizeOverrides& flags) {
    const Clock clock;
    const json doc = resolve_optimize(common);
    const fs::path out = resolve_out_dir(common);
    std::vector<fs::path> outputs;

    if (doc.at("mode") == "time-optimal") {
        const TimeOptimalSearch search = time_optimal_search_from_json(doc);
        TimeOptimalResult r = derive_time_optimal(search, common.jobs);
        json probes = json::array();
        for (const auto& p : r.probes) probes.push_back({{"duration", p.duration}, {"infidelity", p.infidelity}});
        r.pulse.provenance = {{"source", "rydcz optimize (time-optimal bisection)"},
                              {"search", time_optimal_search_to_json(search)},
                              {"probes", probes},
                              {"infidelity", r.infidelity}};
        const fs::path path = out / "time-optimal.json";
        save_pulse(r.pulse, path);
        outputs.push_back(path);
        write_manifest(out, "optimize", doc, clock, outputs);
        if (!common.quiet) std::printf("T = %.6f, infidelity %.3e\nwrote %s\n", r.pulse.duration, r.infidelity, path.string().c_str());
        return kExitOk;
    }

    const PipelineConfig config = pipeline_config_from_json(doc);
    PipelineRunOptions options;
    options.jobs = common.jobs;
    options.checkpoint = flags.checkpoint.value_or(out / "optimize-checkpoint.json");
    options.resume = flags.resume;
    options.stop_after = flags.stop_after;
    if (!common.quiet) {
        options.on_stage = [](int stage, const std::vector<PipelineMember>& members) {
            std::printf("stage %d: %zu members, best composite %.9f\n", stage, members.size(),
                        members.front().report.composite);
            std::fflush(stdout);
        };
    }
    const PipelineResult result = multistage_pipeline(config, options);
    outputs.push_back(options.checkpoint);

    const fs::path result_path = out / "optimize-result.json";
    io::write_json(result_path, pipeline_result_to_json(result));
    outputs.push_back(result_path);
    auto save_member = [&](const PipelineMember& m, const std::string& tag) {
        PulseProfile pulse = m.params.to_pulse("optimized-" + tag);
        pulse.provenance = {{"source", "rydcz optimize"},
                            {"master_seed", config.master_seed},
                            {"member", m.member},
                            {"completed_stages", result.completed_stages},
                            {"composite", m.report.composite},
                            {"mean_fidelity", m.report.mean_fidelity}};
        const fs::path path = out / ("optimized-" + tag + ".json");
        save_pulse(pulse, path);
        outputs.push_back(path);
    };
    for (std::size_t i = 0; i < result.ranked.size(); ++i) save_member(result.ranked[i], std::to_string(i + 1));
    if (result.stage1_best) save_member(*result.stage1_best, "stage1");
    write_manifest(out, "optimize", doc, clock, outputs);
    if (!common.quiet) {
        std::printf("completed %d stage(s); best composite %.9f (member %d)\n", result.completed_stages,
                    result.ranked.front().report.composite, result.ranked.front().member);
    }
    return kExitOk;
}

int run_montecarlo(const CommonOptions& common) {
    const Clock clock;
    const json doc = resolve_montecarlo(common);
    const std::string mode = doc.at("mode").get<std::string>();
    const TrapConfig trap = trap_from_json(doc.at("trap"));
    const BeamConfig beams = beams_from_json(doc.at("beams"));
    const fs::path out = resolve_out_dir(common);
    std::vector<fs::path> outputs;

    for (const auto& pulse_ref : doc.at("presets").get<std::vector<std::string>>()) {
        MonteCarloConfig mc;
        mc.pulse = resolve_pulse(pulse_ref);
        mc.shots = doc.at("shots").get<int>();
        mc.master_seed = doc.at("master_seed").get<std::uint64_t>();
        mc.gate_duration = doc.at("gate_duration").get<double>();
        mc.scheme = parse_level_scheme(doc.at("scheme").get<std::string>());
        mc.blockade_tb = doc.at("blockade_tb").get<double>();
        mc.intermediate_detuning_hz = doc.at("intermediate_detuning_hz").get<double>();
        if (!doc.at("lifetime_p").is_null()) mc.lifetime_p = doc.at("lifetime_p").get<double>();
        if (!doc.at("lifetime_r").is_null()) mc.lifetime_r = doc.at("lifetime_r").get<double>();
        mc.temperature_uk = doc.at("temperature_uk").get<double>();
        mc.propagation = propagation_from(doc);
        mc.jobs = common.jobs;

        std::vector<SweepPoint> points;
        if (mode == "temperature") {
            points = temperature_sweep(mc, trap, beams, doc.at("temperatures_uk").get<std::vector<double>>());
        } else {
            points = depth_sweep(mc, trap, beams, doc.at("depths_uk").get<std::vector<double>>());
        }
        const std::string label = pulse_label(pulse_ref);
        const fs::path path = out / ("montecarlo-" + mode + "-" + label + ".csv");
        io::atomic_write(path, sweep_to_csv(points));
        json meta = doc;
        meta.erase("presets");
        meta["pulse"] = mc.pulse.name;
        meta["label"] = label;
        io::write_json(sidecar_path(path), meta);
        outputs.push_back(path);
        outputs.push_back(sidecar_path(path));
        if (!common.quiet) {
            for (const auto& p : points) {
                std::printf("%-16s %s=%-8g mean infidelity %.4e +- %.1e (%d failed)\n", label.c_str(),
                            mode == "temperature" ? "T_a" : "U0", p.coordinate, p.result.mean_infidelity,
                            p.result.standard_error, p.result.failed_shots);
            }
        }
    }
    write_manifest(out, "montecarlo", doc, clock, outputs);
    return kExitOk;
}

int run_presets_list(const CommonOptions& common) {
    (void)common;
    for (PresetName name : kAllPresets) {
        try {
            const PulseProfile p = preset(name);
            std::printf("%-16s T = %-10g %s\n", std::string(preset_id(name)).c_str(), p.duration,
                        p.provenance.value("source", std::string()).c_str());
        } catch (const ConfigError& e) {
            std::printf("%-16s unavailable: %s\n", std::string(preset_id(name)).c_str(), e.what());
        }
    }
    return kExitOk;
}

}  // namespace rydcz::cli
