#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "hamiltonian_blocks.hpp"
#include "rydcz/errors.hpp"
#include "rydcz/hilbert.hpp"

namespace rydcz {

namespace {

using detail::Mat;

constexpr double kGaussOffset = std::numbers::sqrt3 / 6.0;
constexpr double kCommutatorWeight = std::numbers::sqrt3 / 12.0;

// exp of a 2 x 2 matrix: with Y = X - tr(X)/2, Y^2 = -det(Y) I, so
// exp(X) = e^{tr/2} (cosh(d) I + sinh(d)/d Y) with d^2 = -det(Y).
template <int N>
Mat<N> matrix_exp(const Mat<N>& x) {
    if constexpr (N == 2) {
        const Complex mu = 0.5 * (x(0, 0) + x(1, 1));
        const Complex y00 = x(0, 0) - mu;
        const Complex d2 = y00 * y00 + x(0, 1) * x(1, 0);
        const Complex d = std::sqrt(d2);
        const Complex c = std::cosh(d);
        const Complex sinhc = std::abs(d2) < 1e-8 ? 1.0 + d2 / 6.0 + d2 * d2 / 120.0 : std::sinh(d) / d;
        const Complex scale = std::exp(mu);
        Mat<2> out;
        out(0, 0) = scale * (c + sinhc * y00);
        out(1, 1) = scale * (c - sinhc * y00);
        out(0, 1) = scale * sinhc * x(0, 1);
        out(1, 0) = scale * sinhc * x(1, 0);
        return out;
    } else {
        return x.exp();
    }
}

template <int N>
Mat<N> midpoint_step(const Mat<N>& h, double dt) {
    const Mat<N> generator = Complex(0.0, -dt) * h;
    return matrix_exp<N>(generator);
}

// Fourth-order Magnus step from the Hamiltonian at the two Gauss-Legendre nodes.
template <int N>
Mat<N> magnus_step(const Mat<N>& h_a, const Mat<N>& h_b, double dt) {
    const Mat<N> commutator = h_b * h_a - h_a * h_b;
    const Mat<N> generator = Complex(0.0, -0.5 * dt) * (h_a + h_b) - (kCommutatorWeight * dt * dt) * commutator;
    return matrix_exp<N>(generator);
}

template <int N>
void require_finite(const Mat<N>& m, double t) {
    if (!m.allFinite()) throw PropagationError("non-finite propagator at t = " + std::to_string(t));
}

void require_finite(const DriveSample& drive, double t) {
    if (!drive.finite()) throw PropagationError("non-finite drive at t = " + std::to_string(t));
}

// Active-block Hamiltonians of both atoms and of the pair at one instant.
template <int A>
struct BlockHamiltonians {
    Mat<A> atom1;
    Mat<A> atom2;
    Mat<A * A> pair;
};

template <int A>
BlockHamiltonians<A> block_hamiltonians(const GateSystem& system, const DriveSample& drive) {
    BlockHamiltonians<A> h;
    detail::fill_active_block<A>(h.atom1, system, drive, 1);
    detail::fill_active_block<A>(h.atom2, system, drive, 2);
    detail::fill_pair_block<A>(h.pair, h.atom1, h.atom2, system.blockade);
    return h;
}

// Evolution operators of the three non-trivial invariant blocks.
// atom1: active (x) |0>, atom2: |0> (x) active, pair: active (x) active.
template <int A>
struct BlockEvolution {
    Mat<A> atom1 = Mat<A>::Identity();
    Mat<A> atom2 = Mat<A>::Identity();
    Mat<A * A> pair = Mat<A * A>::Identity();
};

template <int A>
class BlockStepper {
public:
    BlockStepper(const GateSystem& system, const DriveFunction& drive, Integrator integrator)
        : system_(system), drive_(drive), integrator_(integrator) {}

    void advance(BlockEvolution<A>& u, double t0, double t1) const {
        const double dt = t1 - t0;
        const double mid = 0.5 * (t0 + t1);
        if (integrator_ == Integrator::Midpoint) {
            const auto h = sample(mid);
            apply(u, midpoint_step<A>(h.atom1, dt), midpoint_step<A>(h.atom2, dt), midpoint_step<A * A>(h.pair, dt), mid);
        } else {
            const auto ha = sample(mid - kGaussOffset * dt);
            const auto hb = sample(mid + kGaussOffset * dt);
            apply(u, magnus_step<A>(ha.atom1, hb.atom1, dt), magnus_step<A>(ha.atom2, hb.atom2, dt),
                  magnus_step<A * A>(ha.pair, hb.pair, dt), mid);
        }
    }

private:
    BlockHamiltonians<A> sample(double t) const {
        const DriveSample d = drive_(t);
        require_finite(d, t);
        return block_hamiltonians<A>(system_, d);
    }

    static void apply(BlockEvolution<A>& u, const Mat<A>& s1, const Mat<A>& s2, const Mat<A * A>& sp, double t) {
        require_finite(sp, t);
        require_finite(s1, t);
        require_finite(s2, t);
        u.atom1 = s1 * u.atom1;
        u.atom2 = s2 * u.atom2;
        u.pair = sp * u.pair;
    }

    const GateSystem& system_;
    const DriveFunction& drive_;
    Integrator integrator_;
};

// Both atoms see the same drive: one single-atom block and the exchange-symmetric pair block.
template <int A>
class SymmetricStepper {
public:
    static constexpr int S = detail::symmetric_dimension(A);

    SymmetricStepper(const GateSystem& system, const DriveFunction& drive, Integrator integrator)
        : system_(system), drive_(drive), integrator_(integrator) {}

    void advance(Mat<A>& atom, Mat<S>& pair, double t0, double t1) const {
        const double dt = t1 - t0;
        const double mid = 0.5 * (t0 + t1);
        Mat<A> step_atom;
        Mat<S> step_pair;
        if (integrator_ == Integrator::Midpoint) {
            Mat<A> h;
            Mat<S> hs;
            sample(mid, h, hs);
            step_atom = midpoint_step<A>(h, dt);
            step_pair = midpoint_step<S>(hs, dt);
        } else {
            Mat<A> ha, hb;
            Mat<S> hsa, hsb;
            sample(mid - kGaussOffset * dt, ha, hsa);
            sample(mid + kGaussOffset * dt, hb, hsb);
            step_atom = magnus_step<A>(ha, hb, dt);
            step_pair = magnus_step<S>(hsa, hsb, dt);
        }
        require_finite(step_atom, mid);
        require_finite(step_pair, mid);
        atom = step_atom * atom;
        pair = step_pair * pair;
    }

private:
    void sample(double t, Mat<A>& atom, Mat<S>& pair) const {
        const DriveSample d = drive_(t);
        require_finite(d, t);
        detail::fill_active_block<A>(atom, system_, d, 1);
        detail::fill_symmetric_pair_block<A>(pair, atom, system_.blockade);
    }

    const GateSystem& system_;
    const DriveFunction& drive_;
    Integrator integrator_;
};

template <int A>
CMatrix assemble(LevelScheme scheme, const BlockEvolution<A>& u) {
    const int d = atom_dimension(scheme);
    CMatrix full = CMatrix::Zero(d * d, d * d);
    full(0, 0) = 1.0;
    for (int i = 0; i < A; ++i) {
        for (int j = 0; j < A; ++j) {
            full(pair_index(scheme, i + 1, 0), pair_index(scheme, j + 1, 0)) = u.atom1(i, j);
            full(pair_index(scheme, 0, i + 1), pair_index(scheme, 0, j + 1)) = u.atom2(i, j);
        }
    }
    for (int p = 0; p < A * A; ++p) {
        for (int q = 0; q < A * A; ++q) {
            full(pair_index(scheme, p / A + 1, p % A + 1), pair_index(scheme, q / A + 1, q % A + 1)) = u.pair(p, q);
        }
    }
    return full;
}

template <int A>
std::vector<CMatrix> propagate_blocks(const GateSystem& system, const DriveFunction& drive,
                                      std::span<const double> grid, Integrator integrator,
                                      std::span<const std::size_t> emit_after) {
    BlockStepper<A> stepper(system, drive, integrator);
    BlockEvolution<A> u;
    std::vector<CMatrix> out;
    std::size_t next = 0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        stepper.advance(u, grid[k], grid[k + 1]);
        while (next < emit_after.size() && emit_after[next] == k + 1) {
            out.push_back(assemble<A>(system.scheme, u));
            ++next;
        }
    }
    return out;
}

std::vector<CMatrix> propagate_dense(const GateSystem& system, const DriveFunction& drive,
                                     std::span<const double> grid, Integrator integrator,
                                     std::span<const std::size_t> emit_after) {
    const int n = pair_dimension(system.scheme);
    CMatrix u = CMatrix::Identity(n, n);
    std::vector<CMatrix> out;
    std::size_t next = 0;
    auto hamiltonian = [&](double t) {
        const DriveSample d = drive(t);
        require_finite(d, t);
        return build_two_atom_hamiltonian(system, d);
    };
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double dt = grid[k + 1] - grid[k];
        const double mid = 0.5 * (grid[k] + grid[k + 1]);
        CMatrix generator;
        if (integrator == Integrator::Midpoint) {
            generator = Complex(0.0, -dt) * hamiltonian(mid);
        } else {
            const CMatrix ha = hamiltonian(mid - kGaussOffset * dt);
            const CMatrix hb = hamiltonian(mid + kGaussOffset * dt);
            const CMatrix commutator = hb * ha - ha * hb;
            generator = Complex(0.0, -0.5 * dt) * (ha + hb) - (kCommutatorWeight * dt * dt) * commutator;
        }
        const CMatrix step = generator.exp();
        if (!step.allFinite()) throw PropagationError("non-finite propagator at t = " + std::to_string(mid));
        u = step * u;
        while (next < emit_after.size() && emit_after[next] == k + 1) {
            out.push_back(u);
            ++next;
        }
    }
    return out;
}

std::vector<CMatrix> propagate_impl(const GateSystem& system, const DriveFunction& drive,
                                    std::span<const double> grid, Integrator integrator, PropagationMethod method,
                                    std::span<const std::size_t> emit_after) {
    system.validate();
    if (grid.size() < 2) throw ContractError("time grid needs at least two points");
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (!(grid[k + 1] > grid[k])) throw ContractError("time grid must be strictly increasing");
    }
    if (method == PropagationMethod::Dense) return propagate_dense(system, drive, grid, integrator, emit_after);
    if (system.scheme == LevelScheme::SinglePhoton) {
        return propagate_blocks<2>(system, drive, grid, integrator, emit_after);
    }
    return propagate_blocks<3>(system, drive, grid, integrator, emit_after);
}

DriveFunction pulse_drive(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers) {
    validate(pulse);
    return [&system, sampler = PulseSampler(pulse), modifiers](double t) {
        return sample_drive(system, sampler, modifiers, t);
    };
}

Propagator wrap(const GateSystem& system, CMatrix matrix) {
    return Propagator{std::move(matrix), system.scheme, !system.has_decay()};
}

template <int A>
GateMatrix computational_symmetric(const GateSystem& system, const DriveFunction& drive,
                                   std::span<const double> grid, Integrator integrator) {
    constexpr int S = detail::symmetric_dimension(A);
    SymmetricStepper<A> stepper(system, drive, integrator);
    Mat<A> atom = Mat<A>::Identity();
    Mat<S> pair = Mat<S>::Identity();
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) stepper.advance(atom, pair, grid[k], grid[k + 1]);
    GateMatrix m = GateMatrix::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = atom(0, 0);
    m(2, 2) = atom(0, 0);
    m(3, 3) = pair(0, 0);
    return m;
}

template <int A>
GateMatrix computational_general(const GateSystem& system, const DriveFunction& drive,
                                 std::span<const double> grid, Integrator integrator) {
    BlockStepper<A> stepper(system, drive, integrator);
    BlockEvolution<A> u;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) stepper.advance(u, grid[k], grid[k + 1]);
    GateMatrix m = GateMatrix::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = u.atom2(0, 0);
    m(2, 2) = u.atom1(0, 0);
    m(3, 3) = u.pair(0, 0);
    return m;
}

}  // namespace

Propagator propagate(const GateSystem& system, const DriveFunction& drive, std::span<const double> grid,
                     Integrator integrator, PropagationMethod method) {
    const std::size_t last = grid.size() - 1;
    auto out = propagate_impl(system, drive, grid, integrator, method, std::span<const std::size_t>(&last, 1));
    return wrap(system, std::move(out.back()));
}

Propagator propagate(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers,
                     const PropagationOptions& options) {
    const auto drive = pulse_drive(system, pulse, modifiers);
    const auto grid = time_grid(pulse.duration, pulse.breakpoints, options.steps);
    return propagate(system, drive, grid, options.integrator, options.method);
}

std::vector<Propagator> propagate_checkpoints(const GateSystem& system, const PulseProfile& pulse,
                                              const DriveModifiers& modifiers, const PropagationOptions& options,
                                              int segments) {
    if (segments < 1) throw ContractError("segments must be >= 1");
    const auto drive = pulse_drive(system, pulse, modifiers);
    std::vector<double> breakpoints = pulse.breakpoints;
    for (int j = 1; j < segments; ++j) breakpoints.push_back(pulse.duration * j / segments);
    const auto grid = time_grid(pulse.duration, breakpoints, options.steps);

    std::vector<std::size_t> emit_after;
    for (int j = 1; j <= segments; ++j) {
        const double target = pulse.duration * j / segments;
        std::size_t best = 1;
        for (std::size_t k = 1; k < grid.size(); ++k) {
            if (std::abs(grid[k] - target) < std::abs(grid[best] - target)) best = k;
        }
        emit_after.push_back(best);
    }
    auto matrices = propagate_impl(system, drive, grid, options.integrator, options.method, emit_after);
    std::vector<Propagator> out;
    out.reserve(matrices.size());
    for (auto& m : matrices) out.push_back(wrap(system, std::move(m)));
    return out;
}

GateMatrix propagate_computational(const GateSystem& system, const PulseProfile& pulse,
                                   const DriveModifiers& modifiers, const PropagationOptions& options) {
    if (options.method == PropagationMethod::Dense) {
        const Propagator u = propagate(system, pulse, modifiers, options);
        const int d = atom_dimension(system.scheme);
        const int index[4] = {0, pair_index(system.scheme, 0, 1), pair_index(system.scheme, 1, 0), d + 1};
        GateMatrix m;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) m(i, j) = u.matrix(index[i], index[j]);
        }
        return m;
    }
    system.validate();
    const auto drive = pulse_drive(system, pulse, modifiers);
    const auto grid = time_grid(pulse.duration, pulse.breakpoints, options.steps);
    const bool two_photon = system.scheme == LevelScheme::TwoPhoton;
    if (modifiers.symmetric()) {
        return two_photon ? computational_symmetric<3>(system, drive, grid, options.integrator)
                          : computational_symmetric<2>(system, drive, grid, options.integrator);
    }
    return two_photon ? computational_general<3>(system, drive, grid, options.integrator)
                      : computational_general<2>(system, drive, grid, options.integrator);
}

}  // namespace rydcz
