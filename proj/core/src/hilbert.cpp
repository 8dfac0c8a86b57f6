#include "rydcz/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hamiltonian_blocks.hpp"
#include "rydcz/errors.hpp"

namespace rydcz {

int atom_dimension(LevelScheme scheme) { return scheme == LevelScheme::SinglePhoton ? 3 : 4; }

int pair_dimension(LevelScheme scheme) {
    const int d = atom_dimension(scheme);
    return d * d;
}

int rydberg_level(LevelScheme scheme) { return atom_dimension(scheme) - 1; }

std::string_view to_string(LevelScheme scheme) {
    return scheme == LevelScheme::SinglePhoton ? "single-photon" : "two-photon";
}

LevelScheme parse_level_scheme(std::string_view text) {
    if (text == "single-photon") return LevelScheme::SinglePhoton;
    if (text == "two-photon") return LevelScheme::TwoPhoton;
    throw ConfigError("unknown level scheme: " + std::string(text));
}

void GateSystem::validate() const {
    auto non_negative = [](double x) { return std::isfinite(x) && x >= 0.0; };
    if (!non_negative(blockade)) throw ContractError("blockade must be finite and >= 0");
    if (!non_negative(decay_rate_p) || !non_negative(decay_rate_r)) {
        throw ContractError("decay rates must be finite and >= 0");
    }
    if (!std::isfinite(intermediate_detuning)) throw ContractError("intermediate detuning must be finite");
    if (scheme == LevelScheme::SinglePhoton && (intermediate_detuning != 0.0 || decay_rate_p != 0.0)) {
        throw ContractError("single-photon system cannot carry an intermediate detuning or decay rate");
    }
}

bool DriveSample::finite() const {
    return std::isfinite(rabi_1) && std::isfinite(rabi_2) && std::isfinite(rabi_p_1) && std::isfinite(rabi_p_2) &&
           std::isfinite(phase) && std::isfinite(detuning) && std::isfinite(detuning_shift_1) &&
           std::isfinite(detuning_shift_2);
}

namespace {

void check_drive(const GateSystem& system, const DriveSample& drive) {
    if (system.scheme == LevelScheme::SinglePhoton && (drive.rabi_p_1 != 0.0 || drive.rabi_p_2 != 0.0)) {
        throw ContractError("single-photon system driven with a first-step Rabi frequency");
    }
}

}  // namespace

CMatrix build_single_atom_hamiltonian(const GateSystem& system, const DriveSample& drive, int atom_index) {
    if (atom_index != 1 && atom_index != 2) throw ContractError("atom index must be 1 or 2");
    system.validate();
    check_drive(system, drive);
    const int d = atom_dimension(system.scheme);
    CMatrix h = CMatrix::Zero(d, d);
    if (system.scheme == LevelScheme::SinglePhoton) {
        detail::Mat<2> active;
        detail::fill_active_block<2>(active, system, drive, atom_index);
        h.bottomRightCorner(2, 2) = active;
    } else {
        detail::Mat<3> active;
        detail::fill_active_block<3>(active, system, drive, atom_index);
        h.bottomRightCorner(3, 3) = active;
    }
    return h;
}

CMatrix build_two_atom_hamiltonian(const GateSystem& system, const DriveSample& drive) {
    const CMatrix h1 = build_single_atom_hamiltonian(system, drive, 1);
    const CMatrix h2 = build_single_atom_hamiltonian(system, drive, 2);
    const int d = atom_dimension(system.scheme);
    CMatrix h = CMatrix::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            for (int c = 0; c < d; ++c) {
                h(a * d + b, c * d + b) += h1(a, c);
                h(a * d + b, a * d + c) += h2(b, c);
            }
        }
    }
    const int rr = pair_index(system.scheme, rydberg_level(system.scheme), rydberg_level(system.scheme));
    h(rr, rr) += system.blockade;
    return h;
}

double two_photon_step_amplitude(double rabi, double intermediate_detuning) {
    if (!(intermediate_detuning > 0.0)) throw ContractError("two-photon embedding needs Delta_P > 0");
    if (rabi < 0.0) throw ContractError("two-photon embedding of a negative amplitude");
    return std::sqrt(2.0 * intermediate_detuning * rabi);
}

DriveSample sample_drive(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers,
                         double t) {
    return sample_drive(system, PulseSampler(pulse), modifiers, t);
}

DriveSample sample_drive(const GateSystem& system, const PulseSampler& pulse, const DriveModifiers& modifiers,
                         double t) {
    const double omega = pulse.amplitude(t);
    DriveSample drive;
    drive.phase = pulse.phase(t);
    drive.detuning = pulse.pulse().detuning;
    drive.detuning_shift_1 = modifiers.atom1.detuning_shift;
    drive.detuning_shift_2 = modifiers.atom2.detuning_shift;
    if (system.scheme == LevelScheme::SinglePhoton) {
        drive.rabi_1 = omega * modifiers.atom1.amplitude_scale;
        drive.rabi_2 = omega * modifiers.atom2.amplitude_scale;
    } else {
        const double step_1 =
            two_photon_step_amplitude(omega * modifiers.atom1.amplitude_scale, system.intermediate_detuning);
        const double step_2 =
            two_photon_step_amplitude(omega * modifiers.atom2.amplitude_scale, system.intermediate_detuning);
        drive.rabi_p_1 = step_1 * modifiers.atom1.step_scale_p;
        drive.rabi_1 = step_1 * modifiers.atom1.step_scale_s;
        drive.rabi_p_2 = step_2 * modifiers.atom2.step_scale_p;
        drive.rabi_2 = step_2 * modifiers.atom2.step_scale_s;
    }
    return drive;
}

std::vector<double> time_grid(double duration, std::span<const double> breakpoints, int steps) {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ContractError("pulse duration must be positive");
    if (steps < 1) throw ContractError("steps must be >= 1");
    std::vector<double> edges{0.0};
    std::vector<double> interior(breakpoints.begin(), breakpoints.end());
    std::sort(interior.begin(), interior.end());
    for (double b : interior) {
        if (b > 0.0 && b < duration && b > edges.back()) edges.push_back(b);
    }
    edges.push_back(duration);

    std::vector<double> grid{0.0};
    grid.reserve(static_cast<std::size_t>(steps) + edges.size());
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double a = edges[s];
        const double b = edges[s + 1];
        const int n = std::max(1, static_cast<int>(std::lround(steps * (b - a) / duration)));
        for (int k = 1; k < n; ++k) grid.push_back(a + (b - a) * static_cast<double>(k) / n);
        grid.push_back(b);
    }
    return grid;
}

}  // namespace rydcz
