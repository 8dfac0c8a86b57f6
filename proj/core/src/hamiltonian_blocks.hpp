#pragma once

// Hamiltonian restricted to the driven levels {|1>, (|p>), |r>} of one atom.
// Level |0> is never coupled, so the two-atom space splits into invariant
// blocks: |00>, |0>(x)active, active(x)|0> and active(x)active.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "rydcz/hilbert.hpp"

namespace rydcz::detail {

template <int N>
using Mat = Eigen::Matrix<Complex, N, N>;

/// Fills the active block of atom 1 or 2. A = 2 (SinglePhoton) or 3 (TwoPhoton).
template <int A>
void fill_active_block(Mat<A>& h, const GateSystem& system, const DriveSample& drive, int atom_index) {
    static_assert(A == 2 || A == 3);
    const bool first = atom_index == 1;
    const double rabi = first ? drive.rabi_1 : drive.rabi_2;
    const double shift = first ? drive.detuning_shift_1 : drive.detuning_shift_2;
    const Complex coupling = 0.5 * rabi * std::polar(1.0, drive.phase);
    const Complex rydberg_diag(drive.detuning + shift, -0.5 * system.decay_rate_r);
    h.setZero();
    if constexpr (A == 2) {
        h(1, 0) = coupling;
        h(0, 1) = std::conj(coupling);
        h(1, 1) = rydberg_diag;
    } else {
        const double rabi_p = first ? drive.rabi_p_1 : drive.rabi_p_2;
        h(1, 0) = 0.5 * rabi_p;
        h(0, 1) = 0.5 * rabi_p;
        h(2, 1) = coupling;
        h(1, 2) = std::conj(coupling);
        h(1, 1) = Complex(system.intermediate_detuning, -0.5 * system.decay_rate_p);
        h(2, 2) = rydberg_diag;
    }
}

/// h1 (x) I + I (x) h2 + B |rr><rr| on the active pair block.
template <int A>
void fill_pair_block(Mat<A * A>& h, const Mat<A>& h1, const Mat<A>& h2, double blockade) {
    h.setZero();
    for (int i = 0; i < A; ++i) {
        for (int j = 0; j < A; ++j) {
            for (int k = 0; k < A; ++k) {
                h(i * A + j, k * A + j) += h1(i, k);
                h(i * A + j, i * A + k) += h2(j, k);
            }
        }
    }
    h(A * A - 1, A * A - 1) += blockade;
}

inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

inline constexpr int symmetric_dimension(int a) { return a * (a + 1) / 2; }

/// Isometry from the exchange-symmetric subspace into the active pair block.
/// Column 0 is |11>; the last column is |rr>.
template <int A>
Eigen::Matrix<double, A * A, symmetric_dimension(A)> symmetric_isometry() {
    Eigen::Matrix<double, A * A, symmetric_dimension(A)> s;
    s.setZero();
    int column = 0;
    for (int i = 0; i < A; ++i) {
        for (int j = i; j < A; ++j) {
            if (i == j) {
                s(i * A + i, column) = 1.0;
            } else {
                s(i * A + j, column) = kInvSqrt2;
                s(j * A + i, column) = kInvSqrt2;
            }
            ++column;
        }
    }
    return s;
}

/// S^T (h (x) I + I (x) h + B |rr><rr|) S for the isometry above, without forming the A^2 block.
template <int A>
void fill_symmetric_pair_block(Mat<symmetric_dimension(A)>& hs, const Mat<A>& h, double blockade) {
    constexpr int S = symmetric_dimension(A);
    int first[S];
    int second[S];
    int column = 0;
    for (int i = 0; i < A; ++i) {
        for (int j = i; j < A; ++j) {
            first[column] = i;
            second[column] = j;
            ++column;
        }
    }
    // <ab| H |cd> for the two-atom block.
    auto element = [&](int a, int b, int c, int d) {
        Complex v = 0.0;
        if (b == d) v += h(a, c);
        if (a == c) v += h(b, d);
        if (a == A - 1 && b == A - 1 && c == A - 1 && d == A - 1) v += blockade;
        return v;
    };
    for (int r = 0; r < S; ++r) {
        const int a = first[r], b = second[r];
        for (int c = 0; c < S; ++c) {
            const int i = first[c], j = second[c];
            Complex v;
            if (a == b && i == j) {
                v = element(a, a, i, i);
            } else if (a == b) {
                v = kInvSqrt2 * (element(a, a, i, j) + element(a, a, j, i));
            } else if (i == j) {
                v = kInvSqrt2 * (element(a, b, i, i) + element(b, a, i, i));
            } else {
                v = 0.5 * (element(a, b, i, j) + element(a, b, j, i) + element(b, a, i, j) + element(b, a, j, i));
            }
            hs(r, c) = v;
        }
    }
}

}  // namespace rydcz::detail
