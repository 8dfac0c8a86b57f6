#include "rydcz/montecarlo.hpp"

#include <cmath>
#include <numbers>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"
#include "rydcz/parallel.hpp"
#include "rydcz/rng.hpp"

namespace rydcz {

namespace {

constexpr double kMicro = 1e-6;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

double wavenumber(double wavelength) { return 2.0 * std::numbers::pi / wavelength; }

}  // namespace

void TrapConfig::validate() const {
    if (!positive(wavelength) || !positive(waist) || !positive(depth_uk) || !positive(atom_mass) ||
        !positive(separation)) {
        throw ConfigError("trap parameters must all be positive");
    }
}

void BeamConfig::validate() const {
    if (steps.empty() || steps.size() > 2) throw ConfigError("beams need one or two excitation steps");
    for (const auto& s : steps) {
        if (!positive(s.wavelength) || !positive(s.waist)) throw ConfigError("beam wavelength and waist must be > 0");
        if (s.propagation_sign != 1 && s.propagation_sign != -1) throw ConfigError("propagation sign must be +1 or -1");
    }
    for (double o : static_offset) {
        if (!std::isfinite(o)) throw ConfigError("beam offset must be finite");
    }
}

BeamConfig single_photon_beams() { return BeamConfig{{{297e-9, 1e-6, 1}}, {}}; }

BeamConfig beams_420_1013() { return BeamConfig{{{420e-9, 1e-6, 1}, {1013e-9, 1e-6, -1}}, {}}; }

BeamConfig beams_780_480() { return BeamConfig{{{780e-9, 1e-6, 1}, {480e-9, 1e-6, -1}}, {}}; }

BeamConfig beam_preset(std::string_view name) {
    if (name == "297") return single_photon_beams();
    if (name == "420-1013") return beams_420_1013();
    if (name == "780-480") return beams_780_480();
    throw ConfigError("unknown beam preset: " + std::string(name));
}

double rayleigh_length(double waist, double wavelength) { return std::numbers::pi * waist * waist / wavelength; }

TrapFrequencies trap_frequencies(const TrapConfig& trap) {
    trap.validate();
    const double depth = trap.depth_uk * kMicro * constants::kBoltzmann;
    const double z_r = rayleigh_length(trap.waist, trap.wavelength);
    return {std::sqrt(4.0 * depth / (trap.atom_mass * trap.waist * trap.waist)),
            std::sqrt(2.0 * depth / (trap.atom_mass * z_r * z_r))};
}

ThermalSigmas thermal_sigmas(const TrapConfig& trap, double temperature_uk) {
    if (!(temperature_uk >= 0.0) || !std::isfinite(temperature_uk)) throw ConfigError("temperature must be >= 0");
    const auto w = trap_frequencies(trap);
    const double kt_over_m = constants::kBoltzmann * temperature_uk * kMicro / trap.atom_mass;
    return {std::sqrt(kt_over_m) / w.radial, std::sqrt(kt_over_m) / w.axial, std::sqrt(kt_over_m)};
}

double local_rabi_scale(const BeamStep& step, const Vec3& position) {
    const double r2 = position[0] * position[0] + position[1] * position[1];
    const double z_r = rayleigh_length(step.waist, step.wavelength);
    return std::exp(-r2 / (step.waist * step.waist)) * std::exp(-position[2] * position[2] / (2.0 * z_r * z_r));
}

double doppler_shift(const BeamConfig& beams, const Vec3& velocity) {
    double k = 0.0;
    for (const auto& s : beams.steps) k += s.propagation_sign * wavenumber(s.wavelength);
    return k * velocity[2];
}

std::array<double, 12> shot_normals(std::uint64_t master_seed, std::uint64_t shot) {
    CounterRng rng(master_seed, shot);
    std::array<double, 12> z{};
    for (double& x : z) x = rng.normal();
    return z;
}

ThermalShot make_shot(const std::array<double, 12>& normals, const ThermalSigmas& sigmas, const BeamConfig& beams) {
    ThermalShot shot;
    for (int a = 0; a < 2; ++a) {
        const double* n = normals.data() + 6 * a;
        AtomSample& atom = shot.atoms[a];
        atom.position = {n[0] * sigmas.radial, n[1] * sigmas.radial, n[2] * sigmas.axial};
        atom.velocity = {n[3] * sigmas.velocity, n[4] * sigmas.velocity, n[5] * sigmas.velocity};
        Vec3 seen = atom.position;
        for (int k = 0; k < 3; ++k) seen[k] += beams.static_offset[k];
        for (const auto& step : beams.steps) atom.rabi_scales.push_back(local_rabi_scale(step, seen));
        atom.doppler = doppler_shift(beams, atom.velocity);
    }
    return shot;
}

DriveModifiers shot_modifiers(const ThermalShot& shot, LevelScheme scheme, double rabi_unit) {
    DriveModifiers m;
    for (int a = 0; a < 2; ++a) {
        const AtomSample& atom = shot.atoms[a];
        AtomModifier& mod = a == 0 ? m.atom1 : m.atom2;
        if (scheme == LevelScheme::SinglePhoton) {
            if (atom.rabi_scales.size() != 1) throw ContractError("single-photon drive needs one beam step");
            mod.amplitude_scale = atom.rabi_scales[0];
        } else {
            if (atom.rabi_scales.size() != 2) throw ContractError("two-photon drive needs two beam steps");
            mod.step_scale_p = atom.rabi_scales[0];
            mod.step_scale_s = atom.rabi_scales[1];
        }
        mod.detuning_shift = atom.doppler / rabi_unit;
    }
    return m;
}

void MonteCarloConfig::validate() const {
    if (shots < 1) throw ConfigError("shots must be >= 1");
    if (!positive(temperature_uk)) throw ConfigError("temperature must be > 0");
    if (!positive(gate_duration)) throw ConfigError("gate duration must be > 0");
    if (!positive(blockade_tb)) throw ConfigError("blockade_tb must be > 0");
    if (scheme == LevelScheme::TwoPhoton && !positive(intermediate_detuning_hz)) {
        throw ConfigError("intermediate detuning must be > 0");
    }
    if (scheme == LevelScheme::SinglePhoton && lifetime_p) throw ConfigError("single-photon scheme has no |p> lifetime");
    if ((lifetime_p && !positive(*lifetime_p)) || (lifetime_r && !positive(*lifetime_r))) {
        throw ConfigError("lifetimes must be > 0");
    }
    rydcz::validate(pulse);
}

GateSystem montecarlo_system(const MonteCarloConfig& config) {
    const auto scale = PhysicalScale::from_durations(config.pulse.duration, config.gate_duration);
    GateSystem system;
    system.scheme = config.scheme;
    system.blockade = config.blockade_tb / config.pulse.duration;
    if (config.scheme == LevelScheme::TwoPhoton) {
        system.intermediate_detuning = scale.to_dimensionless_rate(constants::kTwoPi * config.intermediate_detuning_hz);
        if (config.lifetime_p) system.decay_rate_p = scale.to_dimensionless_rate(1.0 / *config.lifetime_p);
    }
    if (config.lifetime_r) system.decay_rate_r = scale.to_dimensionless_rate(1.0 / *config.lifetime_r);
    system.validate();
    return system;
}

MonteCarloResult run_montecarlo(const MonteCarloConfig& config, const TrapConfig& trap, const BeamConfig& beams) {
    config.validate();
    trap.validate();
    beams.validate();
    if ((config.scheme == LevelScheme::SinglePhoton) != (beams.steps.size() == 1)) {
        throw ConfigError("beam step count does not match the level scheme");
    }
    const GateSystem system = montecarlo_system(config);
    const double rabi_unit = config.pulse.duration / config.gate_duration;
    const ThermalSigmas sigmas = thermal_sigmas(trap, config.temperature_uk);

    const auto n = static_cast<std::size_t>(config.shots);
    std::vector<ShotRecord> records(n);
    parallel_for(n, config.jobs, [&](std::size_t i) {
        ShotRecord& rec = records[i];
        rec.shot = i;
        rec.sample = make_shot(shot_normals(config.master_seed, i), sigmas, beams);
        try {
            const auto modifiers = shot_modifiers(rec.sample, config.scheme, rabi_unit);
            rec.infidelity = gate_fidelity(system, config.pulse, modifiers, config.propagation).infidelity;
            rec.failed = !std::isfinite(rec.infidelity);
        } catch (const PropagationError&) {
            rec.failed = true;
        } catch (const ContractError&) {
            rec.failed = true;
        }
    });

    // Neumaier summation in shot order: the reduction never depends on the worker count.
    auto compensated_sum = [&](auto term) {
        double sum = 0.0;
        double carry = 0.0;
        for (const auto& r : records) {
            if (r.failed) continue;
            const double x = term(r.infidelity);
            const double t = sum + x;
            carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
            sum = t;
        }
        return sum + carry;
    };

    MonteCarloResult result;
    result.shots = config.shots;
    for (const auto& r : records) result.failed_shots += r.failed ? 1 : 0;
    const int ok = result.shots - result.failed_shots;
    if (ok == 0) throw PropagationError("every Monte-Carlo shot failed");
    result.mean_infidelity = compensated_sum([](double x) { return x; }) / ok;
    if (ok > 1) {
        const double mean = result.mean_infidelity;
        const double var = compensated_sum([mean](double x) { return (x - mean) * (x - mean); }) / (ok - 1);
        result.standard_error = std::sqrt(var / ok);
    }
    if (config.keep_records) result.records = std::move(records);
    return result;
}

std::vector<SweepPoint> temperature_sweep(MonteCarloConfig config, const TrapConfig& trap, const BeamConfig& beams,
                                          std::span<const double> temperatures_uk) {
    std::vector<SweepPoint> out;
    for (double t : temperatures_uk) {
        config.temperature_uk = t;
        out.push_back({t, run_montecarlo(config, trap, beams)});
    }
    return out;
}

std::vector<SweepPoint> depth_sweep(const MonteCarloConfig& config, TrapConfig trap, const BeamConfig& beams,
                                    std::span<const double> depths_uk) {
    std::vector<SweepPoint> out;
    for (double d : depths_uk) {
        trap.depth_uk = d;
        out.push_back({d, run_montecarlo(config, trap, beams)});
    }
    return out;
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
    std::string out = "temperature_or_depth,mean_infidelity,std_error,shots,failed_shots\n";
    for (const auto& p : points) {
        out += io::format_double(p.coordinate) + "," + io::format_double(p.result.mean_infidelity) + "," +
               io::format_double(p.result.standard_error) + "," + std::to_string(p.result.shots) + "," +
               std::to_string(p.result.failed_shots) + "\n";
    }
    return out;
}

nlohmann::json trap_to_json(const TrapConfig& trap) {
    return {{"wavelength", trap.wavelength},
            {"waist", trap.waist},
            {"depth_uk", trap.depth_uk},
            {"atom_mass", trap.atom_mass},
            {"separation", trap.separation}};
}

TrapConfig trap_from_json(const nlohmann::json& document) {
    TrapConfig trap;
    try {
        trap.wavelength = document.value("wavelength", trap.wavelength);
        trap.waist = document.value("waist", trap.waist);
        trap.depth_uk = document.value("depth_uk", trap.depth_uk);
        trap.atom_mass = document.value("atom_mass", trap.atom_mass);
        trap.separation = document.value("separation", trap.separation);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad trap config: ") + e.what());
    }
    trap.validate();
    return trap;
}

nlohmann::json beams_to_json(const BeamConfig& beams) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : beams.steps) {
        steps.push_back({{"wavelength", s.wavelength}, {"waist", s.waist}, {"propagation_sign", s.propagation_sign}});
    }
    return {{"steps", steps}, {"static_offset", beams.static_offset}};
}

BeamConfig beams_from_json(const nlohmann::json& document) {
    if (document.is_string()) return beam_preset(document.get<std::string>());
    BeamConfig beams;
    try {
        for (const auto& s : document.at("steps")) {
            beams.steps.push_back(
                {s.at("wavelength").get<double>(), s.value("waist", 1e-6), s.value("propagation_sign", 1)});
        }
        if (document.contains("static_offset")) beams.static_offset = document.at("static_offset").get<Vec3>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad beam config: ") + e.what());
    }
    beams.validate();
    return beams;
}

}  // namespace rydcz
