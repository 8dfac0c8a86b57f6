#pragma once

#include "rydcz/hilbert.hpp"

namespace rydcz {

/// CZ fidelity maximised over the two free single-qubit Z phases.
struct FidelityReport {
    double fidelity = 0.0;
    double infidelity = 1.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    /// 1 - Tr(M^dagger M) / 4.
    double leakage = 0.0;
};

/// Rows/columns |00>, |01>, |10>, |11> of U.
GateMatrix computational_block(const Propagator& u);

/// [Tr(M^dagger M) + |Tr(C^dagger M)|^2] / 20 with C = diag(1, e^{i t1}, e^{i t2}, -e^{i(t1 + t2)}).
double cz_fidelity_at(const GateMatrix& m, double theta1, double theta2);

/// 64 x 64 grid over the phases, then exact coordinate ascent.
/// Throws ContractError for non-finite entries or a block with norm above 1 + 1e-9.
FidelityReport cz_fidelity(const GateMatrix& m);

/// Propagates and scores in one call.
FidelityReport gate_fidelity(const GateSystem& system, const PulseProfile& pulse, const DriveModifiers& modifiers = {},
                             const PropagationOptions& options = {});

}  // namespace rydcz
