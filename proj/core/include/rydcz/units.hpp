#pragma once

#include <numbers>

namespace rydcz {

namespace constants {
inline constexpr double kBoltzmann = 1.380649e-23;        // J/K
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kRb87Mass = 86.909180520 * kAtomicMassUnit;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace constants

/// Maps between dimensionless units (Omega_0 = 1, time in 1/Omega_0) and SI.
///
/// A pulse with dimensionless duration T_dim executed in T_phys seconds has
/// Omega_0 = T_dim / T_phys rad/s. Angular frequencies divide by Omega_0,
/// times multiply by it.
struct PhysicalScale {
    double rabi_unit = 1.0;  // Omega_0 in rad/s

    static PhysicalScale from_durations(double duration_dimensionless, double duration_seconds) {
        return PhysicalScale{duration_dimensionless / duration_seconds};
    }

    [[nodiscard]] double to_dimensionless_rate(double rad_per_second) const { return rad_per_second / rabi_unit; }
    [[nodiscard]] double to_dimensionless_time(double seconds) const { return seconds * rabi_unit; }
    [[nodiscard]] double to_physical_rate(double dimensionless) const { return dimensionless * rabi_unit; }
};

}  // namespace rydcz
