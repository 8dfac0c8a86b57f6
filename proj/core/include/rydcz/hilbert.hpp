#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rydcz/pulses.hpp"

namespace rydcz {

using Complex = std::complex<double>;

/// Dense complex matrix of at most 16 x 16 (two four-level atoms), stack allocated.
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16>;

/// Computational-subspace action in the ordered basis |00>, |01>, |10>, |11>.
using GateMatrix = Eigen::Matrix4cd;

/// SinglePhoton: levels |0>, |1>, |r>. TwoPhoton: |0>, |1>, |p>, |r>.
enum class LevelScheme { SinglePhoton, TwoPhoton };

int atom_dimension(LevelScheme scheme);
int pair_dimension(LevelScheme scheme);
int rydberg_level(LevelScheme scheme);
inline constexpr int kIntermediateLevel = 2;

std::string_view to_string(LevelScheme scheme);
LevelScheme parse_level_scheme(std::string_view text);

/// Two-atom level scheme plus blockade, intermediate detuning and decay.
///
/// All rates share the unit of the pulse (dimensionless Omega_0 = 1 or rad/s).
struct GateSystem {
    LevelScheme scheme = LevelScheme::SinglePhoton;
    double blockade = 0.0;
    double intermediate_detuning = 0.0;  // TwoPhoton only
    double decay_rate_p = 0.0;           // TwoPhoton only
    double decay_rate_r = 0.0;

    [[nodiscard]] bool has_decay() const { return decay_rate_p > 0.0 || decay_rate_r > 0.0; }
    /// Throws ContractError on negative/non-finite values or fields unused by the scheme.
    void validate() const;
};

/// Instantaneous drive seen by both atoms.
///
/// For TwoPhoton, rabi_1/rabi_2 are the second (|p> -> |r>) step and carry the
/// laser phase; rabi_p_1/rabi_p_2 are the first (|1> -> |p>) step.
struct DriveSample {
    double rabi_1 = 0.0;
    double rabi_2 = 0.0;
    double rabi_p_1 = 0.0;
    double rabi_p_2 = 0.0;
    double phase = 0.0;
    double detuning = 0.0;
    double detuning_shift_1 = 0.0;
    double detuning_shift_2 = 0.0;

    [[nodiscard]] bool finite() const;
};

/// Single-atom Hamiltonian (3x3 or 4x4) for atom 1 or 2, including -i rate/2 decay terms.
CMatrix build_single_atom_hamiltonian(const GateSystem& system, const DriveSample& drive, int atom_index);

/// H_1 (x) I + I (x) H_2 + B |rr><rr| over the two-atom space (9x9 or 16x16).
CMatrix build_two_atom_hamiltonian(const GateSystem& system, const DriveSample& drive);

/// Per-atom perturbation of the nominal pulse.
struct AtomModifier {
    /// Scales the single-photon Rabi frequency Omega(t) (applied before the two-photon embedding).
    double amplitude_scale = 1.0;
    /// Two-photon only: independent scales of the first and second step after embedding.
    double step_scale_p = 1.0;
    double step_scale_s = 1.0;
    /// Added to the Rydberg detuning of this atom (e.g. Doppler shift).
    double detuning_shift = 0.0;

    bool operator==(const AtomModifier&) const = default;
};

struct DriveModifiers {
    AtomModifier atom1;
    AtomModifier atom2;

    [[nodiscard]] bool symmetric() const { return atom1 == atom2; }
    static DriveModifiers uniform(double amplitude_scale) {
        DriveModifiers m;
        m.atom1.amplitude_scale = amplitude_scale;
        m.atom2.amplitude_scale = amplitude_scale;
        return m;
    }
};

/// sqrt(2 Delta_P Omega): equal step amplitudes whose adiabatically eliminated
/// two-photon Rabi frequency is Omega. Throws ContractError for Omega < 0 or Delta_P <= 0.
double two_photon_step_amplitude(double rabi, double intermediate_detuning);

/// Drive at time t for `pulse` under `modifiers`; embeds into two steps for TwoPhoton systems.
DriveSample sample_drive(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers, double t);
DriveSample sample_drive(const GateSystem& system, const PulseSampler& pulse, const DriveModifiers& modifiers, double t);

enum class Integrator {
    Midpoint,  // exp(-i H(t_mid) dt), second order
    Magnus4,   // two-point Gauss-Legendre Magnus with one commutator, fourth order
};

enum class PropagationMethod {
    Blocks,  // invariant-subspace decomposition (and symmetric reduction where exact)
    Dense,   // full 9x9 / 16x16 exponentials; reference path
};

inline constexpr int kDefaultSteps = 8192;

struct PropagationOptions {
    int steps = kDefaultSteps;
    Integrator integrator = Integrator::Magnus4;
    PropagationMethod method = PropagationMethod::Blocks;
};

struct Propagator {
    CMatrix matrix;
    LevelScheme scheme = LevelScheme::SinglePhoton;
    bool trace_preserving = true;
};

/// Grid on [0, T] containing every breakpoint in (0, T) exactly; each
/// breakpoint-delimited segment is uniform and receives steps in proportion to its length.
std::vector<double> time_grid(double duration, std::span<const double> breakpoints, int steps);

using DriveFunction = std::function<DriveSample(double)>;

/// Ordered product of per-interval exponentials over `grid`.
Propagator propagate(const GateSystem& system, const DriveFunction& drive, std::span<const double> grid,
                     Integrator integrator = Integrator::Magnus4,
                     PropagationMethod method = PropagationMethod::Blocks);

Propagator propagate(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers = {},
                     const PropagationOptions& options = {});

/// Propagators U(t_j, 0) at `segments` evenly spaced checkpoints (the last one is U(T, 0)).
std::vector<Propagator> propagate_checkpoints(const GateSystem& system, const PulseProfile& pulse,
                                              const DriveModifiers& modifiers, const PropagationOptions& options,
                                              int segments);

/// Computational block of U(T, 0) without assembling the full propagator.
/// Symmetric drives are evolved in the exchange-symmetric pair subspace.
GateMatrix propagate_computational(const GateSystem& system, const PulseProfile& pulse,
                                   const DriveModifiers& modifiers = {}, const PropagationOptions& options = {});

/// Index of |a b> in the two-atom basis (atom 1 major).
inline int pair_index(LevelScheme scheme, int level_1, int level_2) {
    return level_1 * atom_dimension(scheme) + level_2;
}

}  // namespace rydcz
