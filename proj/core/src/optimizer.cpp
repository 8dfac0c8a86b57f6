#include "rydcz/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "rydcz/errors.hpp"

namespace rydcz {

// ---------------------------------------------------------------------------
// ParameterVector
// ---------------------------------------------------------------------------

int ParameterLayout::size() const {
    switch (amplitude) {
        case AmplitudeKind::Constant: return amplitude_offset() + 1;
        case AmplitudeKind::Smoothstep: return amplitude_offset() + 2;
        case AmplitudeKind::Bernstein: return amplitude_offset() + bernstein_degree + 1;
    }
    return amplitude_offset();
}

ParameterVector::ParameterVector(ParameterLayout layout, Eigen::VectorXd values, std::vector<bool> trainable)
    : layout_(layout), values_(std::move(values)), trainable_(std::move(trainable)) {
    if (layout_.n_terms < 0 || layout_.bernstein_degree < 0) throw ContractError("negative parameter layout size");
    if (values_.size() != layout_.size() || static_cast<int>(trainable_.size()) != layout_.size()) {
        throw ContractError("parameter vector does not match its layout");
    }
}

ParameterVector ParameterVector::from_pulse(const PulseProfile& pulse) {
    const auto* ansatz = std::get_if<PhaseAnsatz>(&pulse.phase);
    if (ansatz == nullptr) throw ContractError("only CRAB phase profiles can be parameterised");
    if (ansatz->interpretation != AnsatzInterpretation::TimeWarped) {
        throw ContractError("parameter vectors use the time-warped ansatz");
    }
    if (!pulse.amplitude.ramps.empty()) throw ContractError("ramped amplitudes cannot be parameterised");

    ParameterLayout layout;
    layout.n_terms = ansatz->n_terms();
    std::vector<double> amplitude;
    if (const auto* c = std::get_if<ConstantAmplitude>(&pulse.amplitude.base)) {
        layout.amplitude = AmplitudeKind::Constant;
        amplitude = {c->rabi};
    } else if (const auto* s = std::get_if<SmoothstepAmplitude>(&pulse.amplitude.base)) {
        layout.amplitude = AmplitudeKind::Smoothstep;
        amplitude = {s->rabi, s->edge_fraction};
    } else {
        const auto& b = std::get<BernsteinAmplitude>(pulse.amplitude.base);
        layout.amplitude = AmplitudeKind::Bernstein;
        layout.bernstein_degree = static_cast<int>(b.coefficients.size()) - 1;
        amplitude = b.coefficients;
    }

    Eigen::VectorXd values(layout.size());
    values(param::kLogDuration) = std::log(pulse.duration);
    values(param::kDetuning) = pulse.detuning;
    values(param::kChirp) = ansatz->linear_chirp;
    for (int n = 0; n < layout.n_terms; ++n) {
        const CrabTerm& term = ansatz->terms[static_cast<std::size_t>(n)];
        values(param::crab(n, 0)) = term.warp_sin;
        values(param::crab(n, 1)) = term.amp_sin;
        values(param::crab(n, 2)) = term.warp_cos;
        values(param::crab(n, 3)) = term.amp_cos;
    }
    std::vector<bool> trainable(static_cast<std::size_t>(layout.size()), true);
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
        values(layout.amplitude_offset() + static_cast<int>(i)) = amplitude[i];
        trainable[static_cast<std::size_t>(layout.amplitude_offset()) + i] = false;
    }
    return ParameterVector(layout, std::move(values), std::move(trainable));
}

PulseProfile ParameterVector::to_pulse(std::string name) const {
    PulseProfile pulse;
    pulse.name = std::move(name);
    pulse.duration = duration();
    pulse.detuning = values_(param::kDetuning);
    PhaseAnsatz ansatz;
    ansatz.linear_chirp = values_(param::kChirp);
    for (int n = 0; n < layout_.n_terms; ++n) {
        ansatz.terms.push_back(CrabTerm{values_(param::crab(n, 0)), values_(param::crab(n, 1)),
                                        values_(param::crab(n, 2)), values_(param::crab(n, 3))});
    }
    pulse.phase = std::move(ansatz);
    const int a = layout_.amplitude_offset();
    switch (layout_.amplitude) {
        case AmplitudeKind::Constant: pulse.amplitude.base = ConstantAmplitude{values_(a)}; break;
        case AmplitudeKind::Smoothstep: pulse.amplitude.base = SmoothstepAmplitude{values_(a), values_(a + 1)}; break;
        case AmplitudeKind::Bernstein: {
            BernsteinAmplitude b;
            for (int k = 0; k <= layout_.bernstein_degree; ++k) b.coefficients.push_back(values_(a + k));
            pulse.amplitude.base = std::move(b);
            break;
        }
    }
    return pulse;
}

int ParameterVector::trainable_count() const {
    return static_cast<int>(std::count(trainable_.begin(), trainable_.end(), true));
}

double ParameterVector::duration() const { return std::exp(values_(param::kLogDuration)); }

std::vector<std::string> ParameterVector::names() const {
    std::vector<std::string> out{"log_T", "Delta", "c1"};
    for (int n = 1; n <= layout_.n_terms; ++n) {
        for (const char* slot : {"A", "alpha", "B", "beta"}) out.push_back(std::string(slot) + "_" + std::to_string(n));
    }
    switch (layout_.amplitude) {
        case AmplitudeKind::Constant: out.emplace_back("Omega"); break;
        case AmplitudeKind::Smoothstep:
            out.emplace_back("Omega");
            out.emplace_back("tau");
            break;
        case AmplitudeKind::Bernstein:
            for (int k = 0; k <= layout_.bernstein_degree; ++k) out.push_back("b_" + std::to_string(k));
            break;
    }
    return out;
}

void ParameterVector::set_values(const Eigen::VectorXd& values) {
    if (values.size() != values_.size()) throw ContractError("parameter vector size mismatch");
    values_ = values;
}

void ParameterVector::set_trainable(int index, bool trainable) {
    if (index < 0 || index >= size()) throw ContractError("parameter index out of range");
    trainable_[static_cast<std::size_t>(index)] = trainable;
}

namespace {

std::string_view to_string(AmplitudeKind kind) {
    switch (kind) {
        case AmplitudeKind::Constant: return "constant";
        case AmplitudeKind::Smoothstep: return "smoothstep";
        case AmplitudeKind::Bernstein: return "bernstein";
    }
    return "constant";
}

AmplitudeKind parse_amplitude_kind(const std::string& text) {
    if (text == "constant") return AmplitudeKind::Constant;
    if (text == "smoothstep") return AmplitudeKind::Smoothstep;
    if (text == "bernstein") return AmplitudeKind::Bernstein;
    throw ConfigError("unknown amplitude kind: " + text);
}

}  // namespace

nlohmann::json parameters_to_json(const ParameterVector& params) {
    std::vector<double> values(params.values().data(), params.values().data() + params.size());
    return {{"n_terms", params.layout().n_terms},
            {"amplitude", to_string(params.layout().amplitude)},
            {"bernstein_degree", params.layout().bernstein_degree},
            {"values", values},
            {"trainable", params.trainable()}};
}

ParameterVector parameters_from_json(const nlohmann::json& document) {
    try {
        ParameterLayout layout;
        layout.n_terms = document.at("n_terms").get<int>();
        layout.amplitude = parse_amplitude_kind(document.at("amplitude").get<std::string>());
        layout.bernstein_degree = document.value("bernstein_degree", 0);
        const auto values = document.at("values").get<std::vector<double>>();
        auto trainable = document.at("trainable").get<std::vector<bool>>();
        return ParameterVector(layout, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
                               std::move(trainable));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed parameter vector: ") + e.what());
    } catch (const ContractError& e) {
        throw ConfigError(std::string("invalid parameter vector: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

std::string_view to_string(VariationMeasure measure) {
    return measure == VariationMeasure::StdDev ? "stddev" : "range";
}

VariationMeasure parse_variation_measure(std::string_view text) {
    if (text == "stddev") return VariationMeasure::StdDev;
    if (text == "range") return VariationMeasure::Range;
    throw ConfigError("unknown variation measure: " + std::string(text));
}

void RobustObjectiveConfig::validate() const {
    if (epsilon_grid.empty()) throw ContractError("epsilon grid is empty");
    if (!std::is_sorted(epsilon_grid.begin(), epsilon_grid.end())) throw ContractError("epsilon grid must be sorted");
    if (std::find(epsilon_grid.begin(), epsilon_grid.end(), 0.0) == epsilon_grid.end()) {
        throw ContractError("epsilon grid must contain 0");
    }
    for (double e : epsilon_grid) {
        if (!std::isfinite(e) || e <= -1.0) throw ContractError("epsilon values must be finite and > -1");
    }
    if (!(weight_variation >= 0.0) || !(weight_slope >= 0.0)) throw ContractError("penalty weights must be >= 0");
    if (!(blockade_tb >= 0.0)) throw ContractError("blockade must be >= 0");
    if (steps < 1) throw ContractError("steps must be >= 1");
    if (scheme == LevelScheme::TwoPhoton && !(intermediate_detuning_t > 0.0)) {
        throw ContractError("two-photon objective needs a positive intermediate detuning");
    }
}

ObjectiveReport summarize(std::span<const double> fidelities, double weight_variation, double weight_slope,
                          VariationMeasure variation) {
    if (fidelities.empty()) throw ContractError("no fidelities to summarise");
    ObjectiveReport report;
    report.per_point_fidelities.assign(fidelities.begin(), fidelities.end());
    const double n = static_cast<double>(fidelities.size());
    report.mean_fidelity = std::accumulate(fidelities.begin(), fidelities.end(), 0.0) / n;
    if (variation == VariationMeasure::StdDev) {
        double ss = 0.0;
        for (double f : fidelities) ss += (f - report.mean_fidelity) * (f - report.mean_fidelity);
        report.variation = std::sqrt(ss / n);
    } else {
        const auto [lo, hi] = std::minmax_element(fidelities.begin(), fidelities.end());
        report.variation = *hi - *lo;
    }
    report.slope = fidelities.back() - fidelities.front();
    report.composite = report.mean_fidelity - weight_variation * report.variation - weight_slope * std::abs(report.slope);
    return report;
}

ObjectiveReport robust_objective(const PulseProfile& pulse, const RobustObjectiveConfig& config) {
    config.validate();
    GateSystem system;
    system.scheme = config.scheme;
    system.blockade = config.blockade_tb / pulse.duration;
    if (config.scheme == LevelScheme::TwoPhoton) {
        system.intermediate_detuning = 2.0 * std::numbers::pi * config.intermediate_detuning_t / pulse.duration;
    }
    PropagationOptions options;
    options.steps = config.steps;
    std::vector<double> fidelities;
    fidelities.reserve(config.epsilon_grid.size());
    for (double eps : config.epsilon_grid) {
        fidelities.push_back(gate_fidelity(system, pulse, DriveModifiers::uniform(1.0 + eps), options).fidelity);
    }
    return summarize(fidelities, config.weight_variation, config.weight_slope, config.variation);
}

ObjectiveReport robust_objective(const ParameterVector& params, const RobustObjectiveConfig& config) {
    return robust_objective(params.to_pulse(), config);
}

// ---------------------------------------------------------------------------
// Gradients and Adam
// ---------------------------------------------------------------------------

double FiniteDiffOptions::step(double x) const { return std::max(relative_step * std::abs(x), absolute_step); }

Eigen::VectorXd finite_diff_gradient(const ScalarObjective& f, const Eigen::VectorXd& x, const std::vector<bool>& mask,
                                     const FiniteDiffOptions& options) {
    if (!(options.relative_step >= 0.0) || !(options.absolute_step > 0.0)) throw ContractError("step size must be > 0");
    if (!mask.empty() && static_cast<Eigen::Index>(mask.size()) != x.size()) throw ContractError("mask size mismatch");
    Eigen::VectorXd gradient = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
        const double h = options.step(x(i));
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        gradient(i) = (up - down) / (2.0 * h);
    }
    return gradient;
}

namespace {

ScalarObjective composite_objective(const ParameterVector& params, const RobustObjectiveConfig& config) {
    return [params, config](const Eigen::VectorXd& x) {
        ParameterVector p = params;
        p.set_values(x);
        try {
            return robust_objective(p, config).composite;
        } catch (const PropagationError&) {
            return std::numeric_limits<double>::quiet_NaN();
        } catch (const ContractError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
}

}  // namespace

Eigen::VectorXd finite_diff_gradient(const ParameterVector& params, const RobustObjectiveConfig& config,
                                     const FiniteDiffOptions& options) {
    config.validate();
    return finite_diff_gradient(composite_objective(params, config), params.values(), params.trainable(), options);
}

AdamResult adam_ascent(const ScalarObjective& f, const Eigen::VectorXd& x0, const std::vector<bool>& mask,
                       const AdamOptions& options, const FiniteDiffOptions& fd) {
    if (options.iterations < 1) throw ContractError("iterations must be >= 1");
    if (!(options.learning_rate >= 0.0)) throw ContractError("learning rate must be >= 0");
    if (options.final_learning_rate && !(*options.final_learning_rate > 0.0 && options.learning_rate > 0.0)) {
        throw ContractError("a decaying learning rate needs positive start and end values");
    }
    AdamResult result;
    Eigen::VectorXd x = x0;
    const double f0 = f(x);
    result.best = x;
    result.best_value = f0;
    result.trace.push_back(f0);
    if (!std::isfinite(f0)) {
        result.diverged = true;
        return result;
    }
    Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
    double beta1_power = 1.0;
    double beta2_power = 1.0;
    for (int it = 0; it < options.iterations; ++it) {
        const Eigen::VectorXd g = finite_diff_gradient(f, x, mask, fd);
        if (!g.allFinite()) {
            result.diverged = true;
            break;
        }
        beta1_power *= options.beta1;
        beta2_power *= options.beta2;
        m = options.beta1 * m + (1.0 - options.beta1) * g;
        v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseAbs2();
        const Eigen::VectorXd m_hat = m / (1.0 - beta1_power);
        const Eigen::VectorXd v_hat = v / (1.0 - beta2_power);
        double rate = options.learning_rate;
        if (options.final_learning_rate && options.iterations > 1) {
            const double progress = static_cast<double>(it) / (options.iterations - 1);
            rate *= std::pow(*options.final_learning_rate / options.learning_rate, progress);
        }
        x += rate * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + options.epsilon).matrix());
        const double value = f(x);
        if (!std::isfinite(value)) {
            result.diverged = true;
            break;
        }
        result.trace.push_back(value);
        if (value > result.best_value) {
            result.best_value = value;
            result.best = x;
        }
    }
    return result;
}

AdamRunResult adam_run(const ParameterVector& initial, const RobustObjectiveConfig& config, double learning_rate,
                       int iterations, std::optional<double> final_learning_rate) {
    config.validate();
    AdamOptions options;
    options.learning_rate = learning_rate;
    options.iterations = iterations;
    options.final_learning_rate = final_learning_rate;
    const AdamResult adam =
        adam_ascent(composite_objective(initial, config), initial.values(), initial.trainable(), options);
    AdamRunResult out;
    out.params = initial;
    out.params.set_values(adam.best);
    out.trace = adam.trace;
    out.diverged = adam.diverged;
    if (std::isfinite(adam.best_value)) {
        out.report = robust_objective(out.params, config);
    } else {
        out.report.composite = adam.best_value;
        out.report.mean_fidelity = adam.best_value;
    }
    return out;
}

GradientCheck check_gradient(const ParameterVector& params, const RobustObjectiveConfig& config, int index,
                             double tolerance, const FiniteDiffOptions& options) {
    if (index < 0 || index >= params.size()) throw ContractError("parameter index out of range");
    const auto f = composite_objective(params, config);
    const Eigen::VectorXd& x = params.values();
    auto derivative = [&](double h) {
        Eigen::VectorXd probe = x;
        probe(index) = x(index) + h;
        const double up = f(probe);
        probe(index) = x(index) - h;
        return (up - f(probe)) / (2.0 * h);
    };
    const double h = options.step(x(index));
    GradientCheck check;
    check.index = index;
    check.derivative_h = derivative(h);
    check.derivative_half_h = derivative(0.5 * h);
    const double scale = std::max({std::abs(check.derivative_h), std::abs(check.derivative_half_h), 1e-300});
    check.relative_difference = std::abs(check.derivative_h - check.derivative_half_h) / scale;
    check.consistent = std::isfinite(check.relative_difference) && check.relative_difference <= tolerance;
    return check;
}

}  // namespace rydcz
