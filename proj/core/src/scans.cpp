#include "rydcz/scans.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"
#include "rydcz/parallel.hpp"

namespace rydcz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json system_metadata(const PulseProfile& pulse, const GateSystem& system, const ScanOptions& options) {
    return {{"pulse", pulse.name},
            {"duration", pulse.duration},
            {"scheme", to_string(system.scheme)},
            {"blockade", system.blockade},
            {"blockade_tb", system.blockade * pulse.duration},
            {"intermediate_detuning", system.intermediate_detuning},
            {"decay_rate_p", system.decay_rate_p},
            {"decay_rate_r", system.decay_rate_r},
            {"steps", options.propagation.steps},
            {"integrator", options.propagation.integrator == Integrator::Magnus4 ? "magnus4" : "midpoint"}};
}

// Evaluates `point(i)` for every axis value; propagation failures become NaN.
template <typename Point>
std::vector<double> evaluate(std::size_t count, int jobs, Point&& point) {
    std::vector<double> out(count, kNaN);
    parallel_for(count, jobs, [&](std::size_t i) {
        try {
            out[i] = point(i);
        } catch (const PropagationError&) {
            out[i] = kNaN;
        }
    });
    return out;
}

ScanResult make_scan(std::string axis, std::span<const double> values, std::vector<double> infidelities,
                     nlohmann::json metadata) {
    metadata["axis"] = axis;
    return ScanResult{std::move(axis), std::vector<double>(values.begin(), values.end()), std::move(infidelities),
                      std::move(metadata)};
}

}  // namespace

GateSystem dimensionless_system(const PulseProfile& pulse, LevelScheme scheme, double blockade_tb,
                                double intermediate_detuning_t) {
    GateSystem system;
    system.scheme = scheme;
    system.blockade = blockade_tb / pulse.duration;
    if (scheme == LevelScheme::TwoPhoton) {
        system.intermediate_detuning = 2.0 * std::numbers::pi * intermediate_detuning_t / pulse.duration;
    }
    system.validate();
    return system;
}

ScanResult scan_epsilon(const PulseProfile& pulse, std::span<const double> epsilons, const GateSystem& system,
                        const ScanOptions& options) {
    auto inf = evaluate(epsilons.size(), options.jobs, [&](std::size_t i) {
        return gate_fidelity(system, pulse, DriveModifiers::uniform(1.0 + epsilons[i]), options.propagation).infidelity;
    });
    return make_scan("epsilon", epsilons, std::move(inf), system_metadata(pulse, system, options));
}

ScanResult scan_alpha(const PulseProfile& pulse, std::span<const double> alphas, const GateSystem& system,
                      const ScanOptions& options) {
    auto inf = evaluate(alphas.size(), options.jobs, [&](std::size_t i) {
        DriveModifiers m;
        m.atom2.amplitude_scale = 1.0 + alphas[i];
        return gate_fidelity(system, pulse, m, options.propagation).infidelity;
    });
    return make_scan("alpha", alphas, std::move(inf), system_metadata(pulse, system, options));
}

ScanResult scan_ramp(const PulseProfile& pulse, std::span<const double> ramps, const GateSystem& system,
                     const ScanOptions& options) {
    auto inf = evaluate(ramps.size(), options.jobs, [&](std::size_t i) {
        PulseProfile ramped = pulse;
        ramped.amplitude = ramped_amplitude(pulse.amplitude, ramps[i]);
        return gate_fidelity(system, ramped, {}, options.propagation).infidelity;
    });
    return make_scan("ramp", ramps, std::move(inf), system_metadata(pulse, system, options));
}

double TwoPhotonDrive::step_rabi(double t) const {
    return two_photon_step_amplitude(amplitude_at(pulse, t), intermediate_detuning);
}

double TwoPhotonDrive::effective_rabi(double t) const {
    const double s = step_rabi(t);
    return s * s / (2.0 * intermediate_detuning);
}

GateSystem TwoPhotonDrive::system(double blockade, double decay_rate_p, double decay_rate_r) const {
    GateSystem s;
    s.scheme = LevelScheme::TwoPhoton;
    s.blockade = blockade;
    s.intermediate_detuning = intermediate_detuning;
    s.decay_rate_p = decay_rate_p;
    s.decay_rate_r = decay_rate_r;
    s.validate();
    return s;
}

TwoPhotonDrive two_photon_embed(const PulseProfile& pulse, double intermediate_detuning) {
    if (!(intermediate_detuning > 0.0) || !std::isfinite(intermediate_detuning)) {
        throw ContractError("two-photon embedding needs Delta_P > 0");
    }
    validate(pulse);
    return TwoPhotonDrive{pulse, intermediate_detuning};
}

const std::vector<IntermediateState>& intermediate_state_presets() {
    static const std::vector<IntermediateState> presets{
        {"rb-5p3/2", 26e-9},
        {"rb-6p3/2", 118e-9},
        {"cs-7p", 155e-9},
    };
    return presets;
}

IntermediateState intermediate_state_preset(std::string_view name) {
    for (const auto& p : intermediate_state_presets()) {
        if (p.name == name) return p;
    }
    throw ConfigError("unknown intermediate state: " + std::string(name));
}

ScanResult scan_intermediate_detuning(const PulseProfile& pulse, std::span<const double> detunings_hz,
                                      const LifetimeScanConfig& config, const ScanOptions& options) {
    if (!(config.lifetime_p > 0.0) || !(config.lifetime_r > 0.0)) throw ContractError("lifetimes must be > 0");
    if (!(config.gate_duration > 0.0)) throw ContractError("gate duration must be > 0");
    for (double d : detunings_hz) {
        if (!(d > 0.0)) throw ContractError("intermediate detunings must be > 0");
    }
    const PhysicalScale scale = PhysicalScale::from_durations(pulse.duration, config.gate_duration);
    const double blockade = config.blockade_tb / pulse.duration;
    const double gamma_p = scale.to_dimensionless_rate(1.0 / config.lifetime_p);
    const double gamma_r = scale.to_dimensionless_rate(1.0 / config.lifetime_r);

    auto inf = evaluate(detunings_hz.size(), options.jobs, [&](std::size_t i) {
        const double delta_p = scale.to_dimensionless_rate(2.0 * std::numbers::pi * detunings_hz[i]);
        const TwoPhotonDrive drive = two_photon_embed(pulse, delta_p);
        return gate_fidelity(drive.system(blockade, gamma_p, gamma_r), pulse, {}, options.propagation).infidelity;
    });
    nlohmann::json meta{{"pulse", pulse.name},
                        {"duration", pulse.duration},
                        {"scheme", "two-photon"},
                        {"blockade_tb", config.blockade_tb},
                        {"lifetime_p", config.lifetime_p},
                        {"lifetime_r", config.lifetime_r},
                        {"gate_duration", config.gate_duration},
                        {"rabi_unit", scale.rabi_unit},
                        {"label", config.label},
                        {"steps", options.propagation.steps}};
    return make_scan("deltap_hz", detunings_hz, std::move(inf), std::move(meta));
}

double refit_detuning(const PulseProfile& pulse, const GateSystem& system, double lo, double hi,
                      const PropagationOptions& options, double tolerance) {
    if (!(hi > lo)) throw ContractError("refit bracket must satisfy lo < hi");
    auto infidelity = [&](double delta) {
        PulseProfile p = pulse;
        p.detuning = delta;
        return gate_fidelity(system, p, {}, options).infidelity;
    };
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = infidelity(c);
    double fd = infidelity(d);
    while (b - a > tolerance) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = infidelity(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = infidelity(d);
        }
    }
    return 0.5 * (a + b);
}

std::string scan_to_csv(const ScanResult& scan) {
    if (scan.values.size() != scan.infidelities.size()) throw ContractError("scan axis and results differ in length");
    std::string out = "axis,value,infidelity\n";
    for (std::size_t i = 0; i < scan.values.size(); ++i) {
        out += scan.axis + "," + io::format_double(scan.values[i]) + "," + io::format_double(scan.infidelities[i]) + "\n";
    }
    return out;
}

ScanResult scan_from_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "axis,value,infidelity") throw ConfigError("scan CSV header missing");
    ScanResult scan;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto first = line.find(',');
        const auto second = line.find(',', first == std::string::npos ? first : first + 1);
        if (first == std::string::npos || second == std::string::npos) throw ConfigError("malformed scan row: " + line);
        const std::string axis = line.substr(0, first);
        if (scan.axis.empty()) scan.axis = axis;
        if (axis != scan.axis) throw ConfigError("scan CSV mixes axes");
        scan.values.push_back(io::parse_double(std::string_view(line).substr(first + 1, second - first - 1)));
        scan.infidelities.push_back(io::parse_double(std::string_view(line).substr(second + 1)));
    }
    return scan;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

void write_scan(const ScanResult& scan, const std::filesystem::path& csv_path) {
    io::atomic_write(csv_path, scan_to_csv(scan));
    io::write_json(sidecar_path(csv_path), scan.metadata);
}

ScanResult read_scan(const std::filesystem::path& csv_path) {
    ScanResult scan = scan_from_csv(io::read_text(csv_path));
    if (const auto side = sidecar_path(csv_path); std::filesystem::exists(side)) scan.metadata = io::read_json(side);
    return scan;
}

std::string combined_csv(std::span<const ScanResult> scans, std::span<const std::string> labels) {
    if (scans.size() != labels.size()) throw ContractError("one label per scan required");
    std::string out = "label,axis,value,infidelity\n";
    for (std::size_t s = 0; s < scans.size(); ++s) {
        const ScanResult& scan = scans[s];
        for (std::size_t i = 0; i < scan.values.size(); ++i) {
            out += labels[s] + "," + scan.axis + "," + io::format_double(scan.values[i]) + "," +
                   io::format_double(scan.infidelities[i]) + "\n";
        }
    }
    return out;
}

}  // namespace rydcz
