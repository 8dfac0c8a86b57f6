#include "rydcz/fidelity.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "rydcz/errors.hpp"

namespace rydcz {

namespace {

constexpr int kGrid = 64;
constexpr int kMaxSweeps = 10000;

double wrap_angle(double theta) {
    double r = std::remainder(theta, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

// Tr(C^dagger M) for a diagonal-phase target.
Complex overlap(const GateMatrix& m, Complex z1, Complex z2) {
    return m(0, 0) + std::conj(z1) * m(1, 1) + std::conj(z2) * m(2, 2) - std::conj(z1 * z2) * m(3, 3);
}

}  // namespace

GateMatrix computational_block(const Propagator& u) {
    const int d = atom_dimension(u.scheme);
    if (u.matrix.rows() != d * d || u.matrix.cols() != d * d) {
        throw ContractError("propagator dimension does not match its level scheme");
    }
    const int index[4] = {0, 1, d, d + 1};
    GateMatrix m;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) m(i, j) = u.matrix(index[i], index[j]);
    }
    return m;
}

double cz_fidelity_at(const GateMatrix& m, double theta1, double theta2) {
    const double norm = m.squaredNorm();
    const double tr = std::norm(overlap(m, std::polar(1.0, theta1), std::polar(1.0, theta2)));
    return (norm + tr) / 20.0;
}

FidelityReport cz_fidelity(const GateMatrix& m) {
    if (!m.allFinite()) throw ContractError("gate matrix has non-finite entries");
    const double spectral = Eigen::JacobiSVD<GateMatrix>(m).singularValues()(0);
    if (spectral > 1.0 + 1e-9) throw ContractError("gate matrix norm exceeds 1");

    static const std::array<Complex, kGrid> conj_phases = [] {
        std::array<Complex, kGrid> z;
        for (int i = 0; i < kGrid; ++i) z[static_cast<std::size_t>(i)] = std::polar(1.0, -2.0 * std::numbers::pi * i / kGrid);
        return z;
    }();
    int best_i = 0;
    int best_j = 0;
    double best_overlap = -1.0;
    for (int i = 0; i < kGrid; ++i) {
        const Complex z1 = conj_phases[static_cast<std::size_t>(i)];
        const Complex a = m(0, 0) + z1 * m(1, 1);
        const Complex b = m(2, 2) - z1 * m(3, 3);
        for (int j = 0; j < kGrid; ++j) {
            const double tr = std::norm(a + conj_phases[static_cast<std::size_t>(j)] * b);
            if (tr > best_overlap) {
                best_overlap = tr;
                best_i = i;
                best_j = j;
            }
        }
    }
    double t1 = 2.0 * std::numbers::pi * best_i / kGrid;
    double t2 = 2.0 * std::numbers::pi * best_j / kGrid;
    double best = cz_fidelity_at(m, t1, t2);

    // Along one axis |Tr| = |a + e^{-i theta} b|, maximal when both terms share a phase.
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        const Complex z2 = std::polar(1.0, t2);
        const Complex a1 = m(0, 0) + std::conj(z2) * m(2, 2);
        const Complex b1 = m(1, 1) - std::conj(z2) * m(3, 3);
        if (std::abs(b1) > 0.0) t1 = std::arg(b1) - std::arg(a1);
        const Complex z1 = std::polar(1.0, t1);
        const Complex a2 = m(0, 0) + std::conj(z1) * m(1, 1);
        const Complex b2 = m(2, 2) - std::conj(z1) * m(3, 3);
        if (std::abs(b2) > 0.0) t2 = std::arg(b2) - std::arg(a2);
        const double f = cz_fidelity_at(m, t1, t2);
        const bool converged = f - best < 1e-15;
        best = std::max(best, f);
        if (converged) break;
    }

    FidelityReport report;
    report.fidelity = std::clamp(best, 0.0, 1.0);
    report.infidelity = 1.0 - report.fidelity;
    report.theta1 = wrap_angle(t1);
    report.theta2 = wrap_angle(t2);
    report.leakage = 1.0 - m.squaredNorm() / 4.0;
    return report;
}

FidelityReport gate_fidelity(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers,
                             const PropagationOptions& options) {
    return cz_fidelity(propagate_computational(system, pulse, modifiers, options));
}

}  // namespace rydcz
