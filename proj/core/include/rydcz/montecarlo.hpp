#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rydcz/fidelity.hpp"
#include "rydcz/units.hpp"

namespace rydcz {

using Vec3 = std::array<double, 3>;

/// Optical tweezer. SI units except the depth, which is U0 / k_B in microkelvin.
struct TrapConfig {
    double wavelength = 850e-9;
    double waist = 1e-6;
    double depth_uk = 100.0;
    double atom_mass = constants::kRb87Mass;
    double separation = 4e-6;  // informational

    void validate() const;
};

struct BeamStep {
    double wavelength = 0.0;
    double waist = 1e-6;
    int propagation_sign = 1;  // +1 or -1 along z
};

/// One (single-photon) or two (two-photon) excitation steps, each focused on its atom.
struct BeamConfig {
    std::vector<BeamStep> steps;
    Vec3 static_offset{0.0, 0.0, 0.0};

    void validate() const;
};

/// 297 nm, 1 um waist.
BeamConfig single_photon_beams();
/// 420 nm along +z, 1013 nm along -z.
BeamConfig beams_420_1013();
/// 780 nm along +z, 480 nm along -z.
BeamConfig beams_780_480();
/// "297", "420-1013", "780-480".
BeamConfig beam_preset(std::string_view name);

double rayleigh_length(double waist, double wavelength);

struct TrapFrequencies {
    double radial = 0.0;  // rad/s
    double axial = 0.0;
};
TrapFrequencies trap_frequencies(const TrapConfig& trap);

struct ThermalSigmas {
    double radial = 0.0;    // m
    double axial = 0.0;     // m
    double velocity = 0.0;  // m/s, per component
};
ThermalSigmas thermal_sigmas(const TrapConfig& trap, double temperature_uk);

/// exp(-r^2 / w0^2) exp(-z^2 / (2 z_R^2)) at `position` (offset already applied).
double local_rabi_scale(const BeamStep& step, const Vec3& position);

/// (sum_i sign_i k_i) v_z in rad/s.
double doppler_shift(const BeamConfig& beams, const Vec3& velocity);

struct AtomSample {
    Vec3 position{};
    Vec3 velocity{};
    std::vector<double> rabi_scales;  // one per beam step
    double doppler = 0.0;             // rad/s
};

struct ThermalShot {
    std::array<AtomSample, 2> atoms;
};

/// Twelve standard normals per shot: (x, y, z, vx, vy, vz) for atom 1 then atom 2.
/// The stream is keyed by the shot index only, so temperatures, depths and pulses share draws.
std::array<double, 12> shot_normals(std::uint64_t master_seed, std::uint64_t shot);

ThermalShot make_shot(const std::array<double, 12>& normals, const ThermalSigmas& sigmas, const BeamConfig& beams);

/// Per-atom drive modifiers in the dimensionless units set by `rabi_unit` (Omega_0 in rad/s).
DriveModifiers shot_modifiers(const ThermalShot& shot, LevelScheme scheme, double rabi_unit);

struct MonteCarloConfig {
    double temperature_uk = 5.0;
    int shots = 5000;
    std::uint64_t master_seed = 0;
    double gate_duration = 100e-9;  // s
    PulseProfile pulse;
    LevelScheme scheme = LevelScheme::SinglePhoton;
    double blockade_tb = 1e4;
    double intermediate_detuning_hz = 5e9;  // Delta_P / 2 pi, TwoPhoton only
    /// Decay off by default; set both to enable lifetimes (seconds).
    std::optional<double> lifetime_p;
    std::optional<double> lifetime_r;
    PropagationOptions propagation;
    int jobs = 1;
    bool keep_records = false;

    void validate() const;
};

struct ShotRecord {
    std::uint64_t shot = 0;
    ThermalShot sample;
    double infidelity = 0.0;
    bool failed = false;
};

struct MonteCarloResult {
    double mean_infidelity = 0.0;
    double standard_error = 0.0;
    int shots = 0;
    int failed_shots = 0;
    std::vector<ShotRecord> records;
};

/// Dimensionless system for the configured pulse at the physical gate duration.
GateSystem montecarlo_system(const MonteCarloConfig& config);

MonteCarloResult run_montecarlo(const MonteCarloConfig& config, const TrapConfig& trap, const BeamConfig& beams);

struct SweepPoint {
    double coordinate = 0.0;  // temperature (uK) or depth (uK)
    MonteCarloResult result;
};

std::vector<SweepPoint> temperature_sweep(MonteCarloConfig config, const TrapConfig& trap, const BeamConfig& beams,
                                          std::span<const double> temperatures_uk);
std::vector<SweepPoint> depth_sweep(const MonteCarloConfig& config, TrapConfig trap, const BeamConfig& beams,
                                    std::span<const double> depths_uk);

/// `temperature_or_depth,mean_infidelity,std_error,shots,failed_shots`.
std::string sweep_to_csv(std::span<const SweepPoint> points);

nlohmann::json trap_to_json(const TrapConfig& trap);
TrapConfig trap_from_json(const nlohmann::json& document);
nlohmann::json beams_to_json(const BeamConfig& beams);
BeamConfig beams_from_json(const nlohmann::json& document);

}  // namespace rydcz
