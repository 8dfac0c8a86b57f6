#include <gtest/gtest.h>

#include <cmath>

#include "rydcz/errors.hpp"
#include "rydcz/montecarlo.hpp"

using namespace rydcz;

namespace {

constexpr double kTwoPi = constants::kTwoPi;

MonteCarloConfig quick_config(int shots) {
    MonteCarloConfig c;
    c.temperature_uk = 5.0;
    c.shots = shots;
    c.master_seed = 11;
    c.pulse = preset(PresetName::RobustRect);
    c.propagation.steps = 256;
    return c;
}

}  // namespace

TEST(Trap, Frequencies) {
    const TrapFrequencies f = trap_frequencies(TrapConfig{});
    EXPECT_NEAR(f.radial / kTwoPi, 31e3, 0.05 * 31e3);
    EXPECT_NEAR(f.axial / kTwoPi, 6e3, 0.05 * 6e3);
    // Independent evaluation of the harmonic expansion of the Gaussian trap.
    const double u = constants::kBoltzmann * 100e-6;
    const double zr = std::numbers::pi * 1e-12 / 850e-9;
    EXPECT_NEAR(f.radial, std::sqrt(4.0 * u / (constants::kRb87Mass * 1e-12)), 1e-9 * f.radial);
    EXPECT_NEAR(f.axial, std::sqrt(2.0 * u / (constants::kRb87Mass * zr * zr)), 1e-9 * f.axial);
}

TEST(Trap, RayleighLengths) {
    EXPECT_NEAR(rayleigh_length(1e-6, 420e-9), 7.5e-6, 0.02 * 7.5e-6);
    EXPECT_NEAR(rayleigh_length(1e-6, 1013e-9), 3.1e-6, 0.02 * 3.1e-6);
    EXPECT_NEAR(rayleigh_length(1e-6, 780e-9), 4.0e-6, 0.02 * 4.0e-6);
    EXPECT_NEAR(rayleigh_length(1e-6, 480e-9), 6.5e-6, 0.02 * 6.5e-6);
}

TEST(Trap, ThermalSigmas) {
    const ThermalSigmas s = thermal_sigmas(TrapConfig{}, 5.0);
    EXPECT_NEAR(s.velocity, 0.0219, 2e-4);
    const TrapFrequencies f = trap_frequencies(TrapConfig{});
    EXPECT_NEAR(s.radial, s.velocity / f.radial, 1e-12 * s.radial);
    EXPECT_NEAR(s.axial, s.velocity / f.axial, 1e-12 * s.axial);
    const ThermalSigmas cold = thermal_sigmas(TrapConfig{}, 0.0);
    EXPECT_EQ(cold.velocity, 0.0);
    EXPECT_THROW(thermal_sigmas(TrapConfig{}, -1.0), ConfigError);
}

TEST(Beams, LocalRabiScale) {
    const BeamStep step{420e-9, 1e-6, 1};
    EXPECT_DOUBLE_EQ(local_rabi_scale(step, {0, 0, 0}), 1.0);
    EXPECT_NEAR(local_rabi_scale(step, {1e-6, 0, 0}), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(local_rabi_scale(step, {0, 1e-6, 0}), std::exp(-1.0), 1e-15);
    const double zr = rayleigh_length(1e-6, 420e-9);
    EXPECT_NEAR(local_rabi_scale(step, {0, 0, zr}), std::exp(-0.5), 1e-15);
}

TEST(Beams, Doppler) {
    EXPECT_NEAR(doppler_shift(single_photon_beams(), {0, 0, 0.022}), 4.65e5, 0.01 * 4.65e5);
    EXPECT_EQ(doppler_shift(single_photon_beams(), {0.5, 0.5, 0.0}), 0.0);
    const double k_blue = std::abs(doppler_shift(beams_420_1013(), {0, 0, 1}));
    const double k_red = std::abs(doppler_shift(beams_780_480(), {0, 0, 1}));
    EXPECT_NEAR(k_blue, kTwoPi * 1.394e6, 1e-3 * kTwoPi * 1.394e6);
    EXPECT_NEAR(k_red, kTwoPi * 0.801e6, 1e-3 * kTwoPi * 0.801e6);
    EXPECT_THROW(beam_preset("532"), ConfigError);
}

TEST(Shots, NormalsAreKeyedByShot) {
    EXPECT_EQ(shot_normals(3, 17), shot_normals(3, 17));
    EXPECT_NE(shot_normals(3, 17), shot_normals(3, 18));
    EXPECT_NE(shot_normals(3, 17), shot_normals(4, 17));
}

TEST(Shots, ModifiersFromSample) {
    ThermalShot shot;
    shot.atoms[0].rabi_scales = {0.9};
    shot.atoms[0].doppler = 2.0e5;
    shot.atoms[1].rabi_scales = {0.8};
    const DriveModifiers m = shot_modifiers(shot, LevelScheme::SinglePhoton, 1e8);
    EXPECT_EQ(m.atom1.amplitude_scale, 0.9);
    EXPECT_EQ(m.atom2.amplitude_scale, 0.8);
    EXPECT_NEAR(m.atom1.detuning_shift, 2e-3, 1e-18);
    EXPECT_EQ(m.atom2.detuning_shift, 0.0);

    ThermalShot two;
    two.atoms[0].rabi_scales = {0.9, 0.7};
    two.atoms[1].rabi_scales = {1.0, 1.0};
    const DriveModifiers t = shot_modifiers(two, LevelScheme::TwoPhoton, 1e8);
    EXPECT_EQ(t.atom1.step_scale_p, 0.9);
    EXPECT_EQ(t.atom1.step_scale_s, 0.7);
}

TEST(MonteCarlo, ColdLimitMatchesStaticGate) {
    MonteCarloConfig c = quick_config(3);
    c.temperature_uk = 1e-12;
    const MonteCarloResult r = run_montecarlo(c, TrapConfig{}, single_photon_beams());
    PropagationOptions o;
    o.steps = 256;
    const double static_inf = gate_fidelity(montecarlo_system(c), c.pulse, {}, o).infidelity;
    EXPECT_NEAR(r.mean_infidelity, static_inf, 1e-9);
    EXPECT_EQ(r.failed_shots, 0);
}

TEST(MonteCarlo, DeterministicAcrossJobs) {
    MonteCarloConfig c = quick_config(24);
    const MonteCarloResult a = run_montecarlo(c, TrapConfig{}, single_photon_beams());
    c.jobs = 3;
    const MonteCarloResult b = run_montecarlo(c, TrapConfig{}, single_photon_beams());
    EXPECT_EQ(a.mean_infidelity, b.mean_infidelity);
    EXPECT_EQ(a.standard_error, b.standard_error);
    EXPECT_EQ(a.shots, 24);
}

TEST(MonteCarlo, RecordsMatchMean) {
    MonteCarloConfig c = quick_config(10);
    c.keep_records = true;
    const MonteCarloResult r = run_montecarlo(c, TrapConfig{}, single_photon_beams());
    ASSERT_EQ(r.records.size(), 10u);
    double sum = 0.0;
    for (const auto& rec : r.records) sum += rec.infidelity;
    EXPECT_NEAR(r.mean_infidelity, sum / 10.0, 1e-15);
    for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].shot, i);
}

TEST(MonteCarlo, StandardErrorShrinksWithShots) {
    const MonteCarloResult small = run_montecarlo(quick_config(100), TrapConfig{}, single_photon_beams());
    const MonteCarloResult large = run_montecarlo(quick_config(400), TrapConfig{}, single_photon_beams());
    const double ratio = small.standard_error / large.standard_error;
    EXPECT_GT(ratio, 1.5);
    EXPECT_LT(ratio, 2.7);
}

TEST(MonteCarlo, WarmerAtomsAreWorse) {
    MonteCarloConfig c = quick_config(60);
    const std::vector<double> temps{1.0, 10.0};
    const auto sweep = temperature_sweep(c, TrapConfig{}, single_photon_beams(), temps);
    ASSERT_EQ(sweep.size(), 2u);
    EXPECT_LT(sweep[0].result.mean_infidelity, sweep[1].result.mean_infidelity);
    const std::string csv = sweep_to_csv(sweep);
    EXPECT_EQ(csv.rfind("temperature_or_depth,mean_infidelity,std_error,shots,failed_shots\n", 0), 0u);
}

TEST(MonteCarlo, ConfigValidation) {
    MonteCarloConfig c = quick_config(10);
    c.temperature_uk = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = quick_config(0);
    EXPECT_THROW(c.validate(), ConfigError);
    c = quick_config(10);
    c.scheme = LevelScheme::TwoPhoton;
    EXPECT_THROW(run_montecarlo(c, TrapConfig{}, single_photon_beams()), ConfigError);
}

TEST(MonteCarlo, JsonRoundTrip) {
    TrapConfig t;
    t.depth_uk = 250.0;
    const TrapConfig back = trap_from_json(trap_to_json(t));
    EXPECT_EQ(back.depth_uk, 250.0);
    EXPECT_EQ(back.waist, t.waist);
    const BeamConfig b = beams_from_json(beams_to_json(beams_780_480()));
    ASSERT_EQ(b.steps.size(), 2u);
    EXPECT_EQ(b.steps[1].propagation_sign, -1);
    EXPECT_EQ(beams_from_json(nlohmann::json("420-1013")).steps[0].wavelength, 420e-9);
}
