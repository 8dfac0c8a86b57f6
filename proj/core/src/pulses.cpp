#include "rydcz/pulses.hpp"

#include <cmath>
#include <numbers>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"

namespace rydcz {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double binomial(int n, int k) {
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
    return result;
}

double eval_bernstein(const BernsteinAmplitude& shape, double x) {
    const int degree = static_cast<int>(shape.coefficients.size()) - 1;
    if (degree < 0) return 0.0;
    double sum = 0.0;
    for (int k = 0; k <= degree; ++k) {
        sum += shape.coefficients[static_cast<std::size_t>(k)] * binomial(degree, k) * std::pow(x, k) *
               std::pow(1.0 - x, degree - k);
    }
    return sum;
}

void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

}  // namespace

double smoothstep7(double x) {
    const double x2 = x * x;
    const double x4 = x2 * x2;
    return x4 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

double eval_smoothstep(const SmoothstepAmplitude& shape, double t, double duration) {
    if (t < 0.0 || t > duration) return 0.0;
    const double edge = shape.edge_fraction * duration / 2.0;
    if (t < edge) return shape.rabi * smoothstep7(t / edge);
    if (t > duration - edge) return shape.rabi * smoothstep7((duration - t) / edge);
    return shape.rabi;
}

double eval_amplitude(const AmplitudeShape& shape, double t, double duration) {
    if (t < 0.0 || t > duration) return 0.0;
    double value = std::visit(
        overloaded{
            [&](const ConstantAmplitude& c) { return c.rabi; },
            [&](const SmoothstepAmplitude& s) { return eval_smoothstep(s, t, duration); },
            [&](const BernsteinAmplitude& b) { return eval_bernstein(b, t / duration); },
        },
        shape.base);
    for (const double ramp : shape.ramps) value *= 1.0 + ramp * (t - duration / 2.0) / duration;
    return value;
}

double eval_phase(const PhaseAnsatz& ansatz, double t, double duration) {
    const double centred = t - duration / 2.0;
    const double base_frequency = 2.0 * std::numbers::pi / duration;
    double phase = ansatz.linear_chirp * centred;
    const bool warped = ansatz.interpretation == AnsatzInterpretation::TimeWarped;
    for (std::size_t i = 0; i < ansatz.terms.size(); ++i) {
        const CrabTerm& term = ansatz.terms[i];
        const double k = base_frequency * static_cast<double>(i + 1);
        const double half_tanh_sin = 0.5 * std::tanh(term.warp_sin);
        const double half_tanh_cos = 0.5 * std::tanh(term.warp_cos);
        if (warped) {
            phase += term.amp_sin * std::sin(k * (1.0 + half_tanh_sin) * centred);
            phase += term.amp_cos * std::cos(k * (1.0 + half_tanh_cos) * centred);
        } else {
            phase += term.amp_sin * std::sin(k * (1.0 + half_tanh_sin * centred));
            phase += term.amp_cos * std::cos(k * (1.0 + half_tanh_cos * centred));
        }
    }
    return phase;
}

double eval_phase(const PhaseProfile& phase, double t, double duration) {
    return std::visit(overloaded{
                          [&](const PhaseAnsatz& a) { return eval_phase(a, t, duration); },
                          [&](const StepPhase& s) { return t < s.jump_time ? 0.0 : s.jump; },
                      },
                      phase);
}

PulseSampler::PulseSampler(const PulseProfile& pulse) : pulse_(pulse), ansatz_(std::get_if<PhaseAnsatz>(&pulse.phase)) {
    if (ansatz_ == nullptr) return;
    const double base_frequency = 2.0 * std::numbers::pi / pulse.duration;
    for (std::size_t i = 0; i < ansatz_->terms.size(); ++i) {
        const CrabTerm& term = ansatz_->terms[i];
        Term t;
        t.k = base_frequency * static_cast<double>(i + 1);
        t.half_tanh_sin = 0.5 * std::tanh(term.warp_sin);
        t.half_tanh_cos = 0.5 * std::tanh(term.warp_cos);
        t.freq_sin = t.k * (1.0 + t.half_tanh_sin);
        t.freq_cos = t.k * (1.0 + t.half_tanh_cos);
        t.amp_sin = term.amp_sin;
        t.amp_cos = term.amp_cos;
        terms_.push_back(t);
    }
}

double PulseSampler::phase(double t) const {
    if (ansatz_ == nullptr) return eval_phase(pulse_.phase, t, pulse_.duration);
    const double centred = t - pulse_.duration / 2.0;
    double phase = ansatz_->linear_chirp * centred;
    if (ansatz_->interpretation == AnsatzInterpretation::TimeWarped) {
        for (const Term& term : terms_) {
            phase += term.amp_sin * std::sin(term.freq_sin * centred);
            phase += term.amp_cos * std::cos(term.freq_cos * centred);
        }
    } else {
        for (const Term& term : terms_) {
            phase += term.amp_sin * std::sin(term.k * (1.0 + term.half_tanh_sin * centred));
            phase += term.amp_cos * std::cos(term.k * (1.0 + term.half_tanh_cos * centred));
        }
    }
    return phase;
}

double amplitude_at(const PulseProfile& pulse, double t) { return eval_amplitude(pulse.amplitude, t, pulse.duration); }

double phase_at(const PulseProfile& pulse, double t) { return eval_phase(pulse.phase, t, pulse.duration); }

AmplitudeShape ramped_amplitude(AmplitudeShape shape, double ramp) {
    require(std::isfinite(ramp) && std::abs(ramp) < 2.0, "ramp must satisfy |ramp| < 2");
    if (ramp != 0.0) shape.ramps.push_back(ramp);
    return shape;
}

void validate(const PulseProfile& pulse) {
    require(std::isfinite(pulse.duration) && pulse.duration > 0.0, "pulse duration must be positive");
    require(std::isfinite(pulse.detuning), "pulse detuning must be finite");
    std::visit(overloaded{
                   [](const ConstantAmplitude& c) { require(std::isfinite(c.rabi) && c.rabi > 0.0, "rabi must be > 0"); },
                   [](const SmoothstepAmplitude& s) {
                       require(std::isfinite(s.rabi) && s.rabi > 0.0, "rabi must be > 0");
                       require(s.edge_fraction > 0.0 && s.edge_fraction < 1.0, "edge fraction must lie in (0, 1)");
                   },
                   [](const BernsteinAmplitude& b) {
                       require(!b.coefficients.empty(), "bernstein amplitude needs coefficients");
                       for (double c : b.coefficients) {
                           require(std::isfinite(c) && c >= 0.0, "bernstein coefficients must be >= 0");
                       }
                   },
               },
               pulse.amplitude.base);
    for (double r : pulse.amplitude.ramps) require(std::isfinite(r) && std::abs(r) < 2.0, "ramp must satisfy |ramp| < 2");
    std::visit(overloaded{
                   [](const PhaseAnsatz& a) {
                       require(std::isfinite(a.linear_chirp), "linear chirp must be finite");
                       for (const auto& term : a.terms) {
                           require(std::isfinite(term.warp_sin) && std::isfinite(term.amp_sin) &&
                                       std::isfinite(term.warp_cos) && std::isfinite(term.amp_cos),
                                   "phase ansatz parameters must be finite");
                       }
                   },
                   [&](const StepPhase& s) {
                       require(std::isfinite(s.jump), "phase jump must be finite");
                       require(s.jump_time >= 0.0 && s.jump_time <= pulse.duration, "jump time outside [0, T]");
                   },
               },
               pulse.phase);
    for (double b : pulse.breakpoints) {
        require(b >= 0.0 && b <= pulse.duration, "breakpoint outside [0, T]");
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string_view to_string(AnsatzInterpretation interpretation) {
    return interpretation == AnsatzInterpretation::TimeWarped ? "time-warped" : "verbatim";
}

AnsatzInterpretation parse_interpretation(std::string_view text) {
    if (text == "time-warped") return AnsatzInterpretation::TimeWarped;
    if (text == "verbatim") return AnsatzInterpretation::Verbatim;
    throw ConfigError("unknown ansatz interpretation: " + std::string(text));
}

nlohmann::json pulse_to_json(const PulseProfile& pulse) {
    using nlohmann::json;
    json amplitude = std::visit(overloaded{
                                    [](const ConstantAmplitude& c) { return json{{"kind", "constant"}, {"rabi", c.rabi}}; },
                                    [](const SmoothstepAmplitude& s) {
                                        return json{{"kind", "smoothstep"}, {"rabi", s.rabi}, {"edge_fraction", s.edge_fraction}};
                                    },
                                    [](const BernsteinAmplitude& b) {
                                        return json{{"kind", "bernstein"}, {"coefficients", b.coefficients}};
                                    },
                                },
                                pulse.amplitude.base);
    if (!pulse.amplitude.ramps.empty()) amplitude["ramps"] = pulse.amplitude.ramps;

    json phase = std::visit(overloaded{
                                [](const PhaseAnsatz& a) {
                                    json terms = json::array();
                                    for (std::size_t i = 0; i < a.terms.size(); ++i) {
                                        const auto& t = a.terms[i];
                                        terms.push_back({{"n", i + 1}, {"A", t.warp_sin}, {"alpha", t.amp_sin},
                                                         {"B", t.warp_cos}, {"beta", t.amp_cos}});
                                    }
                                    return json{{"kind", "crab"},
                                                {"linear_chirp", a.linear_chirp},
                                                {"interpretation", to_string(a.interpretation)},
                                                {"terms", terms}};
                                },
                                [](const StepPhase& s) {
                                    return json{{"kind", "step"}, {"jump", s.jump}, {"jump_time", s.jump_time}};
                                },
                            },
                            pulse.phase);

    return json{{"schema_version", kPulseSchemaVersion},
                {"name", pulse.name},
                {"duration", pulse.duration},
                {"detuning", pulse.detuning},
                {"amplitude", amplitude},
                {"phase", phase},
                {"breakpoints", pulse.breakpoints},
                {"provenance", pulse.provenance}};
}

PulseProfile pulse_from_json(const nlohmann::json& document) {
    try {
        const int version = document.value("schema_version", kPulseSchemaVersion);
        if (version != kPulseSchemaVersion) {
            throw ConfigError("unsupported pulse schema_version " + std::to_string(version));
        }
        PulseProfile pulse;
        pulse.name = document.value("name", std::string{});
        pulse.duration = document.at("duration").get<double>();
        pulse.detuning = document.value("detuning", 0.0);

        const auto& amplitude = document.at("amplitude");
        const auto amplitude_kind = amplitude.at("kind").get<std::string>();
        if (amplitude_kind == "constant") {
            pulse.amplitude.base = ConstantAmplitude{amplitude.at("rabi").get<double>()};
        } else if (amplitude_kind == "smoothstep") {
            pulse.amplitude.base =
                SmoothstepAmplitude{amplitude.at("rabi").get<double>(), amplitude.at("edge_fraction").get<double>()};
        } else if (amplitude_kind == "bernstein") {
            pulse.amplitude.base = BernsteinAmplitude{amplitude.at("coefficients").get<std::vector<double>>()};
        } else {
            throw ConfigError("unknown amplitude kind: " + amplitude_kind);
        }
        pulse.amplitude.ramps = amplitude.value("ramps", std::vector<double>{});

        const auto& phase = document.at("phase");
        const auto phase_kind = phase.at("kind").get<std::string>();
        if (phase_kind == "crab") {
            PhaseAnsatz ansatz;
            ansatz.linear_chirp = phase.value("linear_chirp", 0.0);
            ansatz.interpretation = parse_interpretation(phase.value("interpretation", std::string{"time-warped"}));
            for (const auto& term : phase.at("terms")) {
                ansatz.terms.push_back(CrabTerm{term.value("A", 0.0), term.value("alpha", 0.0), term.value("B", 0.0),
                                                term.value("beta", 0.0)});
            }
            pulse.phase = std::move(ansatz);
        } else if (phase_kind == "step") {
            pulse.phase = StepPhase{phase.at("jump").get<double>(), phase.at("jump_time").get<double>()};
        } else {
            throw ConfigError("unknown phase kind: " + phase_kind);
        }
        pulse.breakpoints = document.value("breakpoints", std::vector<double>{});
        pulse.provenance = document.value("provenance", nlohmann::json::object());
        validate(pulse);
        return pulse;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed pulse document: ") + e.what());
    } catch (const ContractError& e) {
        throw ConfigError(std::string("invalid pulse document: ") + e.what());
    }
}

PulseProfile load_pulse(const std::filesystem::path& path) { return pulse_from_json(io::read_json(path)); }

void save_pulse(const PulseProfile& pulse, const std::filesystem::path& path) {
    io::write_json(path, pulse_to_json(pulse));
}

}  // namespace rydcz
