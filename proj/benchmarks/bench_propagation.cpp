#include <benchmark/benchmark.h>

#include "rydcz/fidelity.hpp"
#include "rydcz/montecarlo.hpp"
#include "rydcz/scans.hpp"

using namespace rydcz;

namespace {

void BM_GateFidelitySymmetric(benchmark::State& state) {
    const PulseProfile p = preset(PresetName::RobustRect);
    const GateSystem s = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    PropagationOptions o;
    o.steps = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gate_fidelity(s, p, {}, o).fidelity);
}
BENCHMARK(BM_GateFidelitySymmetric)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_GateFidelityAsymmetric(benchmark::State& state) {
    const PulseProfile p = preset(PresetName::RobustRect);
    const GateSystem s = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    DriveModifiers m;
    m.atom2.amplitude_scale = 1.03;
    PropagationOptions o;
    o.steps = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gate_fidelity(s, p, m, o).fidelity);
}
BENCHMARK(BM_GateFidelityAsymmetric)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_GateFidelityTwoPhoton(benchmark::State& state) {
    const PulseProfile p = preset(PresetName::RobustSmooth);
    const GateSystem s = dimensionless_system(p, LevelScheme::TwoPhoton, 1e4, 5000.0);
    PropagationOptions o;
    o.steps = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gate_fidelity(s, p, {}, o).fidelity);
}
BENCHMARK(BM_GateFidelityTwoPhoton)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_DenseReference(benchmark::State& state) {
    const PulseProfile p = preset(PresetName::RobustRect);
    const GateSystem s = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    PropagationOptions o;
    o.steps = 1024;
    o.method = PropagationMethod::Dense;
    for (auto _ : state) benchmark::DoNotOptimize(propagate(s, p, {}, o).matrix(0, 0));
}
BENCHMARK(BM_DenseReference)->Unit(benchmark::kMillisecond);

void BM_MonteCarloShots(benchmark::State& state) {
    MonteCarloConfig c;
    c.shots = 16;
    c.master_seed = 1;
    c.pulse = preset(PresetName::RobustRect);
    c.propagation.steps = 2048;
    for (auto _ : state) benchmark::DoNotOptimize(run_montecarlo(c, TrapConfig{}, single_photon_beams()).mean_infidelity);
    state.SetItemsProcessed(state.iterations() * c.shots);
}
BENCHMARK(BM_MonteCarloShots)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
