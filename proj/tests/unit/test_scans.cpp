#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"
#include "rydcz/scans.hpp"

using namespace rydcz;

namespace {

PropagationOptions coarse() {
    PropagationOptions o;
    o.steps = 512;
    return o;
}

}  // namespace

TEST(Scans, LengthsAndAxes) {
    const PulseProfile p = preset(PresetName::RobustRect);
    const GateSystem s = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    const std::vector<double> values{-0.05, 0.0, 0.05};
    ScanOptions o;
    o.propagation = coarse();
    const ScanResult eps = scan_epsilon(p, values, s, o);
    const ScanResult alpha = scan_alpha(p, values, s, o);
    const ScanResult ramp = scan_ramp(p, values, s, o);
    EXPECT_EQ(eps.axis, "epsilon");
    EXPECT_EQ(alpha.axis, "alpha");
    EXPECT_EQ(ramp.axis, "ramp");
    for (const ScanResult* r : {&eps, &alpha, &ramp}) {
        ASSERT_EQ(r->values.size(), 3u);
        ASSERT_EQ(r->infidelities.size(), 3u);
        for (double x : r->infidelities) EXPECT_TRUE(x >= 0.0 && x <= 1.0);
    }
    // All three axes reduce to the nominal gate at zero.
    EXPECT_NEAR(eps.infidelities[1], alpha.infidelities[1], 1e-14);
    EXPECT_NEAR(eps.infidelities[1], ramp.infidelities[1], 1e-14);
    EXPECT_EQ(eps.metadata.at("pulse"), "robust-rect");
    EXPECT_EQ(eps.metadata.at("steps"), 512);
}

TEST(Scans, JobsDoNotChangeResults) {
    const PulseProfile p = preset(PresetName::TimeOptimal);
    const GateSystem s = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    const std::vector<double> values{-0.1, -0.03, 0.0, 0.02, 0.07};
    ScanOptions one;
    one.propagation = coarse();
    ScanOptions four = one;
    four.jobs = 4;
    EXPECT_EQ(scan_epsilon(p, values, s, one), scan_epsilon(p, values, s, four));
}

TEST(Scans, CsvRoundTrip) {
    ScanResult r;
    r.axis = "epsilon";
    r.values = {-0.1, 0.1 / 3.0, 0.0};
    r.infidelities = {1.234567890123e-7, 0.5, std::numeric_limits<double>::quiet_NaN()};
    const std::string csv = scan_to_csv(r);
    EXPECT_EQ(csv.rfind("axis,value,infidelity\n", 0), 0u);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    const ScanResult back = scan_from_csv(csv);
    EXPECT_EQ(back.axis, r.axis);
    EXPECT_EQ(back.values, r.values);
    EXPECT_EQ(back.infidelities[0], r.infidelities[0]);
    EXPECT_TRUE(std::isnan(back.infidelities[2]));
    EXPECT_THROW(scan_from_csv("a,b\n1,2\n"), ConfigError);
    EXPECT_THROW(scan_from_csv("axis,value,infidelity\nepsilon,0,1\nalpha,0,1\n"), ConfigError);
}

TEST(Scans, FileRoundTripWithSidecar) {
    const auto dir = std::filesystem::temp_directory_path() / "rydcz-test-scan";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ScanResult r;
    r.axis = "alpha";
    r.values = {0.0, 0.05};
    r.infidelities = {1e-6, 2e-4};
    r.metadata = {{"pulse", "x"}};
    const auto path = dir / "scan.csv";
    write_scan(r, path);
    EXPECT_TRUE(std::filesystem::exists(sidecar_path(path)));
    EXPECT_EQ(sidecar_path(path).extension(), ".json");
    EXPECT_EQ(read_scan(path), r);
    std::filesystem::remove_all(dir);
}

TEST(Scans, CombinedCsvKeepsLabels) {
    ScanResult a;
    a.axis = "epsilon";
    a.values = {0.0};
    a.infidelities = {1e-3};
    ScanResult b = a;
    b.infidelities = {2e-3};
    const std::vector<ScanResult> scans{a, b};
    const std::vector<std::string> labels{"rr", "to"};
    const std::string csv = combined_csv(scans, labels);
    EXPECT_EQ(csv, "label,axis,value,infidelity\nrr,epsilon,0,0.001\nto,epsilon,0,0.002\n");
    EXPECT_THROW(combined_csv(scans, std::vector<std::string>{"rr"}), ContractError);
}

TEST(TwoPhoton, EffectiveRabiMatchesPulse) {
    const PulseProfile p = preset(PresetName::RobustSmooth);
    const TwoPhotonDrive d = two_photon_embed(p, 2.0 * std::numbers::pi * 5000.0 / p.duration);
    for (int i = 0; i <= 20; ++i) {
        const double t = p.duration * i / 20.0;
        const double omega = amplitude_at(p, t);
        EXPECT_NEAR(d.effective_rabi(t), omega, 1e-12 * std::max(1.0, omega));
        EXPECT_NEAR(d.step_rabi(t) * d.step_rabi(t) / (2.0 * d.intermediate_detuning), omega, 1e-12);
    }
    const GateSystem s = d.system(3.0, 0.1, 0.2);
    EXPECT_EQ(s.scheme, LevelScheme::TwoPhoton);
    EXPECT_EQ(s.intermediate_detuning, d.intermediate_detuning);
    EXPECT_EQ(s.decay_rate_p, 0.1);
    EXPECT_THROW(two_photon_embed(p, 0.0), ContractError);
    EXPECT_THROW(two_photon_embed(p, -1.0), ContractError);
}

TEST(Scans, DimensionlessSystem) {
    const PulseProfile p = preset(PresetName::RobustRect);
    const GateSystem s = dimensionless_system(p, LevelScheme::TwoPhoton, 1e4, 5000.0);
    EXPECT_NEAR(s.blockade * p.duration, 1e4, 1e-9);
    EXPECT_NEAR(s.intermediate_detuning * p.duration / (2.0 * std::numbers::pi), 5000.0, 1e-9);
    const GateSystem one = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    EXPECT_EQ(one.intermediate_detuning, 0.0);
}

TEST(Lifetimes, Presets) {
    EXPECT_DOUBLE_EQ(intermediate_state_preset("rb-5p3/2").lifetime, 26e-9);
    EXPECT_DOUBLE_EQ(intermediate_state_preset("rb-6p3/2").lifetime, 118e-9);
    EXPECT_DOUBLE_EQ(intermediate_state_preset("cs-7p").lifetime, 155e-9);
    EXPECT_EQ(intermediate_state_presets().size(), 3u);
    EXPECT_THROW(intermediate_state_preset("rb-4d"), ConfigError);
}

TEST(Lifetimes, LongerIntermediateLifetimeHelps) {
    const PulseProfile p = preset(PresetName::RobustSmooth);
    const std::vector<double> detunings{2e9};
    ScanOptions o;
    o.propagation = coarse();
    LifetimeScanConfig short_lived;
    short_lived.lifetime_p = 26e-9;
    LifetimeScanConfig long_lived;
    long_lived.lifetime_p = 118e-9;
    const ScanResult a = scan_intermediate_detuning(p, detunings, short_lived, o);
    const ScanResult b = scan_intermediate_detuning(p, detunings, long_lived, o);
    EXPECT_EQ(a.axis, "deltap_hz");
    EXPECT_LT(b.infidelities[0], a.infidelities[0]);
}

TEST(Refit, RecoversShiftedDetuning) {
    PulseProfile p = preset(PresetName::RobustRect);
    const double nominal = p.detuning;
    const GateSystem s = dimensionless_system(p, LevelScheme::SinglePhoton, 1e4);
    p.detuning = nominal + 0.05;
    const double refit = refit_detuning(p, s, nominal - 0.2, nominal + 0.2, coarse(), 1e-6);
    p.detuning = refit;
    PulseProfile q = p;
    q.detuning = nominal;
    const double f_refit = gate_fidelity(s, p, {}, coarse()).fidelity;
    const double f_nominal = gate_fidelity(s, q, {}, coarse()).fidelity;
    EXPECT_GE(f_refit, f_nominal - 1e-9);
}
