#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rydcz/fidelity.hpp"
#include "rydcz/units.hpp"

namespace rydcz {

/// One robustness curve. Failed points carry NaN infidelity.
struct ScanResult {
    std::string axis;
    std::vector<double> values;
    std::vector<double> infidelities;
    nlohmann::json metadata = nlohmann::json::object();

    bool operator==(const ScanResult&) const = default;
};

/// Dimensionless system for `pulse`: B = TB / T and, for TwoPhoton, Delta_P = 2 pi (T Delta_P / 2 pi) / T.
GateSystem dimensionless_system(const PulseProfile& pulse, LevelScheme scheme, double blockade_tb,
                                double intermediate_detuning_t = 5000.0);

struct ScanOptions {
    PropagationOptions propagation;
    int jobs = 1;
};

/// Both atoms scaled by (1 + eps).
ScanResult scan_epsilon(const PulseProfile& pulse, std::span<const double> epsilons, const GateSystem& system,
                        const ScanOptions& options = {});

/// Atom 1 nominal, atom 2 scaled by (1 + alpha).
ScanResult scan_alpha(const PulseProfile& pulse, std::span<const double> alphas, const GateSystem& system,
                      const ScanOptions& options = {});

/// Both atoms under the linear ramp 1 + r (t - T/2) / T.
ScanResult scan_ramp(const PulseProfile& pulse, std::span<const double> ramps, const GateSystem& system,
                     const ScanOptions& options = {});

/// Single-photon pulse carried by two equal steps of amplitude sqrt(2 Delta_P Omega(t));
/// the phase rides on the second step only.
struct TwoPhotonDrive {
    PulseProfile pulse;
    double intermediate_detuning = 0.0;

    [[nodiscard]] double step_rabi(double t) const;
    /// Omega_P Omega_S / (2 Delta_P); equals the single-photon Omega(t).
    [[nodiscard]] double effective_rabi(double t) const;
    [[nodiscard]] GateSystem system(double blockade, double decay_rate_p = 0.0, double decay_rate_r = 0.0) const;
};

/// Throws ContractError for Delta_P <= 0.
TwoPhotonDrive two_photon_embed(const PulseProfile& pulse, double intermediate_detuning);

struct IntermediateState {
    std::string name;
    double lifetime = 0.0;  // seconds
};

/// "rb-5p3/2" 26 ns, "rb-6p3/2" 118 ns, "cs-7p" 155 ns.
const std::vector<IntermediateState>& intermediate_state_presets();
IntermediateState intermediate_state_preset(std::string_view name);

/// Room-temperature lifetime of the Rb 80S state.
inline constexpr double kRb80SLifetime = 209e-6;

struct LifetimeScanConfig {
    double lifetime_p = 26e-9;
    double lifetime_r = kRb80SLifetime;
    double gate_duration = 100e-9;
    double blockade_tb = 1e4;
    /// Label copied into the metadata (e.g. the intermediate-state preset).
    std::string label;
};

/// Infidelity versus Delta_P / (2 pi) in Hz with decay of |p> and |r>, in physical units.
ScanResult scan_intermediate_detuning(const PulseProfile& pulse, std::span<const double> detunings_hz,
                                      const LifetimeScanConfig& config, const ScanOptions& options = {});

/// Golden-section maximisation of the eps = 0 fidelity over the Rydberg detuning in [lo, hi].
double refit_detuning(const PulseProfile& pulse, const GateSystem& system, double lo, double hi,
                      const PropagationOptions& options = {}, double tolerance = 1e-10);

/// `axis,value,infidelity` with a header row, LF line endings, shortest round-trip doubles.
std::string scan_to_csv(const ScanResult& scan);
ScanResult scan_from_csv(std::string_view text);

/// Writes <path> (CSV) and <path>.json (metadata) atomically.
void write_scan(const ScanResult& scan, const std::filesystem::path& csv_path);
ScanResult read_scan(const std::filesystem::path& csv_path);

/// Rows of several scans in one CSV, keeping each scan's label in a leading column.
std::string combined_csv(std::span<const ScanResult> scans, std::span<const std::string> labels);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace rydcz
