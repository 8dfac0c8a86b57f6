// Acceptance criteria. One line per criterion: "[PASS] n name: detail" or "[FAIL] ...".
// Usage: rydcz_acceptance [--only N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "rydcz/errors.hpp"
#include "rydcz/fidelity.hpp"
#include "rydcz/montecarlo.hpp"
#include "rydcz/optimizer.hpp"
#include "rydcz/scans.hpp"

using namespace rydcz;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

double infidelity(const PulseProfile& pulse, double tb, const DriveModifiers& m = {}, const PropagationOptions& o = {}) {
    return gate_fidelity(dimensionless_system(pulse, LevelScheme::SinglePhoton, tb), pulse, m, o).infidelity;
}

DriveModifiers asymmetric(double alpha) {
    DriveModifiers m;
    m.atom2.amplitude_scale = 1.0 + alpha;
    return m;
}

// ---------------------------------------------------------------------------

Outcome trap_scalars() {
    constexpr double kTrapTol = 0.05;
    constexpr double kRayleighTol = 0.02;
    const TrapFrequencies f = trap_frequencies(TrapConfig{});
    const double fr = f.radial / constants::kTwoPi;
    const double fz = f.axial / constants::kTwoPi;
    bool ok = std::abs(fr / 31e3 - 1.0) <= kTrapTol && std::abs(fz / 6e3 - 1.0) <= kTrapTol;
    const double lambdas[] = {420e-9, 1013e-9, 780e-9, 480e-9};
    const double expected[] = {7.5e-6, 3.1e-6, 4.0e-6, 6.5e-6};
    std::string zr;
    for (int i = 0; i < 4; ++i) {
        const double z = rayleigh_length(1e-6, lambdas[i]);
        ok = ok && std::abs(z / expected[i] - 1.0) <= kRayleighTol;
        zr += fmt(" %.2f", z * 1e6);
    }
    return {ok, fmt("f_r = %.2f kHz, f_z = %.2f kHz, z_R =", fr / 1e3, fz / 1e3) + zr + " um"};
}

Outcome levine_pichler() {
    constexpr double kLimit = 1e-5;
    const double inf = infidelity(preset(PresetName::LevinePichler), 1e6);
    return {inf < kLimit, fmt("infidelity %.3e at TB = 1e6 (limit %.0e)", inf, kLimit)};
}

Outcome ansatz_oracle() {
    constexpr double kLimit = 1e-2;
    const PulseProfile base = preset(PresetName::RobustRect);
    int winners = 0;
    AnsatzInterpretation winner = AnsatzInterpretation::TimeWarped;
    std::string detail;
    for (AnsatzInterpretation interp : {AnsatzInterpretation::TimeWarped, AnsatzInterpretation::Verbatim}) {
        PulseProfile p = base;
        std::get<PhaseAnsatz>(p.phase).interpretation = interp;
        const double inf = infidelity(p, 1e4);
        detail += fmt("%s %.3e; ", std::string(to_string(interp)).c_str(), inf);
        if (inf < kLimit) {
            ++winners;
            winner = interp;
        }
    }
    if (winners != 1) return {false, detail + fmt("%d interpretations below %.0e", winners, kLimit)};
    PulseProfile p = base;
    std::get<PhaseAnsatz>(p.phase).interpretation = winner;
    double worst = 0.0;
    for (int i = -10; i <= 10; ++i) worst = std::max(worst, infidelity(p, 1e4, DriveModifiers::uniform(1.0 + 0.01 * i)));
    const bool is_default = winner == PhaseAnsatz{}.interpretation &&
                            std::get<PhaseAnsatz>(base.phase).interpretation == winner;
    return {worst < kLimit && is_default,
            detail + fmt("winner %s, max over |eps| <= 0.1: %.3e, default %s", std::string(to_string(winner)).c_str(),
                         worst, is_default ? "yes" : "no")};
}

Outcome epsilon_ordering() {
    constexpr double kFactor = 0.1;
    const PulseProfile rr = preset(PresetName::RobustRect);
    const PulseProfile to = preset(PresetName::TimeOptimal);
    bool ok = true;
    std::string detail;
    for (double eps : {-0.05, 0.05}) {
        const double a = infidelity(rr, 1e4, DriveModifiers::uniform(1.0 + eps));
        const double b = infidelity(to, 1e4, DriveModifiers::uniform(1.0 + eps));
        ok = ok && a <= kFactor * b;
        detail += fmt("eps %+.2f RR %.2e TO %.2e; ", eps, a, b);
    }
    for (double eps : {-0.02, 0.02}) {
        const double a = infidelity(rr, 1e4, DriveModifiers::uniform(1.0 + eps));
        const double b = infidelity(to, 1e4, DriveModifiers::uniform(1.0 + eps));
        ok = ok && a < b;
        detail += fmt("eps %+.2f RR %.2e TO %.2e; ", eps, a, b);
    }
    return {ok, detail};
}

Outcome alpha_ordering() {
    const PulseProfile rr = preset(PresetName::RobustRect);
    const PulseProfile to = preset(PresetName::TimeOptimal);
    const PulseProfile lp = preset(PresetName::LevinePichler);
    bool ok = true;
    std::string detail;
    for (double alpha : {-0.05, 0.05}) {
        const double a = infidelity(rr, 1e4, asymmetric(alpha));
        const double b = infidelity(to, 1e4, asymmetric(alpha));
        const double c = infidelity(lp, 1e4, asymmetric(alpha));
        ok = ok && a < b && a < c;
        detail += fmt("alpha %+.2f RR %.2e TO %.2e LP %.2e; ", alpha, a, b, c);
    }
    return {ok, detail};
}

Outcome ramp_ordering() {
    auto ramped = [](PulseProfile p) {
        p.amplitude = ramped_amplitude(p.amplitude, 0.1);
        return p;
    };
    const double a = infidelity(ramped(preset(PresetName::RobustRect)), 1e4);
    const double b = infidelity(ramped(preset(PresetName::TimeOptimal)), 1e4);
    return {a > b, fmt("ramp 0.1: RR %.3e TO %.3e", a, b)};
}

Outcome adiabatic_elimination() {
    constexpr double kTolerance = 5e-3;
    const PulseProfile rs = preset(PresetName::RobustSmooth);
    const double single = infidelity(rs, 1e4);
    const GateSystem two = dimensionless_system(rs, LevelScheme::TwoPhoton, 1e4, 5000.0);
    const double embedded = gate_fidelity(two, rs).infidelity;
    return {std::abs(embedded - single) < kTolerance,
            fmt("single-photon %.3e, two-photon %.3e, |diff| %.3e (limit %.0e)", single, embedded,
                std::abs(embedded - single), kTolerance)};
}

struct SpreadReport {
    double at_zero = 0.0;
    double spread = 0.0;
};

SpreadReport spread_over_epsilon(const PulseProfile& pulse, double tb) {
    double lo = 1.0;
    double hi = 0.0;
    SpreadReport r;
    for (int i = -5; i <= 5; ++i) {
        const double inf = infidelity(pulse, tb, DriveModifiers::uniform(1.0 + 0.01 * i));
        lo = std::min(lo, inf);
        hi = std::max(hi, inf);
        if (i == 0) r.at_zero = inf;
    }
    r.spread = hi - lo;
    return r;
}

Outcome optimizer_pipeline() {
    constexpr double kSpreadFactor = 5.0;
    constexpr double kZeroLimit = 1e-2;
    const PipelineConfig config = PipelineConfig::default_schedule();
    const PipelineResult result = multistage_pipeline(config);
    if (!result.stage1_best) return {false, "no stage-1 winner recorded"};
    const SpreadReport first = spread_over_epsilon(result.stage1_best->params.to_pulse(), config.blockade_tb);
    std::string detail = fmt("stage-1 spread %.3e (inf0 %.2e); ", first.spread, first.at_zero);
    bool ok = false;
    for (const PipelineMember& m : result.ranked) {
        const SpreadReport s = spread_over_epsilon(m.params.to_pulse(), config.blockade_tb);
        const double ratio = first.spread / s.spread;
        detail += fmt("member %d spread %.3e ratio %.1f inf0 %.2e; ", m.member, s.spread, ratio, s.at_zero);
        ok = ok || (ratio >= kSpreadFactor && s.at_zero < kZeroLimit);
    }
    return {ok, detail};
}

// Monte-Carlo step count: 2048 steps agree with the default grid to well below the shot noise.
constexpr int kMonteCarloSteps = 2048;
constexpr int kMonteCarloShots = 2000;
constexpr std::uint64_t kMonteCarloSeed = 20250101;

MonteCarloConfig mc_config(PresetName name, LevelScheme scheme, double gate_duration) {
    MonteCarloConfig c;
    c.shots = kMonteCarloShots;
    c.master_seed = kMonteCarloSeed;
    c.pulse = preset(name);
    c.scheme = scheme;
    c.gate_duration = gate_duration;
    c.propagation.steps = kMonteCarloSteps;
    return c;
}

Outcome montecarlo_orderings() {
    bool ok = true;
    std::string detail = "(a)";
    {
        const std::vector<double> temps{1.0, 2.0, 5.0, 10.0};
        const auto rr = temperature_sweep(mc_config(PresetName::RobustRect, LevelScheme::SinglePhoton, 100e-9),
                                          TrapConfig{}, single_photon_beams(), temps);
        const auto to = temperature_sweep(mc_config(PresetName::TimeOptimal, LevelScheme::SinglePhoton, 100e-9),
                                          TrapConfig{}, single_photon_beams(), temps);
        for (std::size_t i = 0; i < temps.size(); ++i) {
            ok = ok && rr[i].result.mean_infidelity < to[i].result.mean_infidelity;
            detail += fmt(" %guK RR %.2e TO %.2e;", temps[i], rr[i].result.mean_infidelity, to[i].result.mean_infidelity);
        }
    }
    detail += " (b)";
    for (PresetName name : {PresetName::RobustRect, PresetName::TimeOptimal}) {
        MonteCarloConfig c = mc_config(name, LevelScheme::TwoPhoton, 1e-6);
        c.temperature_uk = 5.0;
        const double red = run_montecarlo(c, TrapConfig{}, beams_780_480()).mean_infidelity;
        const double blue = run_montecarlo(c, TrapConfig{}, beams_420_1013()).mean_infidelity;
        ok = ok && red < blue;
        detail += fmt(" %s 780/480 %.2e 420/1013 %.2e;", std::string(preset_id(name)).c_str(), red, blue);
    }
    detail += " (c)";
    for (PresetName name : {PresetName::RobustRect, PresetName::TimeOptimal}) {
        MonteCarloConfig c = mc_config(name, LevelScheme::TwoPhoton, 1e-6);
        c.temperature_uk = 5.0;
        const std::vector<double> depths{50.0, 100.0, 200.0, 400.0};
        const auto sweep = depth_sweep(c, TrapConfig{}, beams_780_480(), depths);
        detail += fmt(" %s", std::string(preset_id(name)).c_str());
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            if (i > 0) ok = ok && sweep[i].result.mean_infidelity < sweep[i - 1].result.mean_infidelity;
            detail += fmt(" %.2e", sweep[i].result.mean_infidelity);
        }
        detail += ";";
    }
    return {ok, detail};
}

Outcome lifetime_orderings() {
    const PulseProfile rs = preset(PresetName::RobustSmooth);
    std::vector<double> detunings;
    for (int k = 0; k <= 10; ++k) detunings.push_back(0.5e9 * std::pow(2.0, 0.5 * k));  // 0.5 .. 16 GHz
    LifetimeScanConfig p5;
    p5.lifetime_p = 26e-9;
    LifetimeScanConfig p6;
    p6.lifetime_p = 118e-9;
    for (LifetimeScanConfig* c : {&p5, &p6}) {
        c->lifetime_r = 209e-6;
        c->gate_duration = 100e-9;
    }
    const ScanResult a = scan_intermediate_detuning(rs, detunings, p5);
    const ScanResult b = scan_intermediate_detuning(rs, detunings, p6);
    bool ok = true;
    std::string detail = "5P/6P:";
    for (std::size_t i = 0; i < detunings.size(); ++i) {
        ok = ok && b.infidelities[i] < a.infidelities[i];
        detail += fmt(" %.2e/%.2e", a.infidelities[i], b.infidelities[i]);
    }
    const std::size_t half = (detunings.size() + 1) / 2;
    for (std::size_t i = 1; i < half; ++i) {
        ok = ok && a.infidelities[i] < a.infidelities[i - 1] && b.infidelities[i] < b.infidelities[i - 1];
    }
    return {ok, detail};
}

Outcome numerics_invariants() {
    bool ok = true;
    std::string detail;
    const PulseProfile rr = preset(PresetName::RobustRect);
    const GateSystem sys = dimensionless_system(rr, LevelScheme::SinglePhoton, 1e4);

    const Propagator u = propagate(sys, rr, asymmetric(0.03));
    const double unitarity = (u.matrix.adjoint() * u.matrix - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff();
    ok = ok && unitarity <= 1e-9;
    detail += fmt("unitarity %.1e; ", unitarity);

    PropagationOptions half;
    half.steps = kDefaultSteps / 2;
    PropagationOptions full;
    PropagationOptions twice;
    twice.steps = 2 * kDefaultSteps;
    const double f1 = gate_fidelity(sys, rr, {}, half).fidelity;
    const double f2 = gate_fidelity(sys, rr, {}, full).fidelity;
    const double f3 = gate_fidelity(sys, rr, {}, twice).fidelity;
    const bool converging = std::abs(f3 - f2) <= std::abs(f2 - f1) && std::abs(f3 - f2) < 1e-8;
    ok = ok && converging;
    detail += fmt("step doubling %.1e -> %.1e; ", std::abs(f2 - f1), std::abs(f3 - f2));

    const GateMatrix m = computational_block(u);
    GateMatrix gauged = m;
    const Complex z1 = std::polar(1.0, 0.7);
    const Complex z2 = std::polar(1.0, -1.9);
    const Complex global = std::polar(1.0, 2.4);
    const Complex phases[4] = {global, global * z2, global * z1, global * z1 * z2};
    for (int r = 0; r < 4; ++r) gauged.row(r) *= phases[r];
    const double gauge = std::abs(cz_fidelity(gauged).fidelity - cz_fidelity(m).fidelity);
    ok = ok && gauge <= 1e-10;
    detail += fmt("gauge %.1e; ", gauge);

    const ParameterVector v = ParameterVector::from_pulse(rr);
    RobustObjectiveConfig oc;
    oc.epsilon_grid = {-0.05, 0.0, 0.05};
    oc.weight_variation = 10.0;
    oc.weight_slope = 10.0;
    double worst_gradient = 0.0;
    for (int index : {param::kDetuning, param::kChirp, param::crab(0, 1), param::crab(2, 2)}) {
        const GradientCheck g = check_gradient(v, oc, index, 1e-3);
        ok = ok && g.consistent;
        worst_gradient = std::max(worst_gradient, g.relative_difference);
    }
    detail += fmt("gradient h vs h/2 %.1e; ", worst_gradient);

    PipelineConfig pc;
    pc.pool_size = 4;
    pc.master_seed = 77;
    pc.layout.n_terms = 2;
    pc.steps = 256;
    pc.stages = {StageConfig{{0.0}, 0.0, 0.0, 0.05, std::nullopt, 5, 2},
                 StageConfig{{-0.05, 0.0, 0.05}, 10.0, 10.0, 0.02, std::nullopt, 5, 1}};
    PipelineRunOptions jobs1;
    PipelineRunOptions jobs4;
    jobs4.jobs = 4;
    const bool pipeline_same =
        pipeline_result_to_json(multistage_pipeline(pc, jobs1)) == pipeline_result_to_json(multistage_pipeline(pc, jobs4));
    MonteCarloConfig mc = mc_config(PresetName::RobustRect, LevelScheme::SinglePhoton, 100e-9);
    mc.shots = 40;
    mc.propagation.steps = 256;
    mc.keep_records = true;
    const MonteCarloResult r1 = run_montecarlo(mc, TrapConfig{}, single_photon_beams());
    mc.jobs = 4;
    const MonteCarloResult r4 = run_montecarlo(mc, TrapConfig{}, single_photon_beams());
    bool mc_same = r1.mean_infidelity == r4.mean_infidelity && r1.standard_error == r4.standard_error;
    for (std::size_t i = 0; i < r1.records.size(); ++i) mc_same = mc_same && r1.records[i].infidelity == r4.records[i].infidelity;
    ok = ok && pipeline_same && mc_same;
    detail += fmt("jobs 1 vs 4 bit-exact: pipeline %s, montecarlo %s", pipeline_same ? "yes" : "no", mc_same ? "yes" : "no");
    return {ok, detail};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "trap scalars", trap_scalars},
        {2, "levine-pichler fidelity", levine_pichler},
        {3, "ansatz interpretation", ansatz_oracle},
        {4, "epsilon robustness ordering", epsilon_ordering},
        {5, "asymmetry ordering", alpha_ordering},
        {6, "ramp sensitivity ordering", ramp_ordering},
        {7, "adiabatic elimination", adiabatic_elimination},
        {8, "optimizer pipeline spread", optimizer_pipeline},
        {9, "monte-carlo orderings", montecarlo_orderings},
        {10, "lifetime scan orderings", lifetime_orderings},
        {11, "numerics invariants", numerics_invariants},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--only N]...\n", argv[0]);
            return 2;
        }
    }
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
