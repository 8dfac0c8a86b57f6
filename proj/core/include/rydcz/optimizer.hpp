#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rydcz/fidelity.hpp"
#include "rydcz/pulses.hpp"

namespace rydcz {

// ---------------------------------------------------------------------------
// Parameter vector
// ---------------------------------------------------------------------------

enum class AmplitudeKind { Constant, Smoothstep, Bernstein };

/// Shape of the trainable parameterisation.
///
/// Layout: [log T, Delta, c1, (A_n, alpha_n, B_n, beta_n) for n = 1..N, amplitude...]
/// with amplitude = [Omega] (Constant), [Omega, tau] (Smoothstep) or the
/// Bernstein coefficients.
struct ParameterLayout {
    int n_terms = 4;
    AmplitudeKind amplitude = AmplitudeKind::Constant;
    int bernstein_degree = 0;

    [[nodiscard]] int size() const;
    [[nodiscard]] int amplitude_offset() const { return 3 + 4 * n_terms; }
    bool operator==(const ParameterLayout&) const = default;
};

namespace param {
inline constexpr int kLogDuration = 0;
inline constexpr int kDetuning = 1;
inline constexpr int kChirp = 2;
inline constexpr int crab(int term, int slot) { return 3 + 4 * term + slot; }  // slot: 0 A, 1 alpha, 2 B, 3 beta
}  // namespace param

class ParameterVector {
public:
    ParameterVector() = default;
    ParameterVector(ParameterLayout layout, Eigen::VectorXd values, std::vector<bool> trainable);

    /// Reads a CRAB pulse; amplitude entries start frozen, all others trainable.
    /// Throws ContractError for step-phase pulses.
    static ParameterVector from_pulse(const PulseProfile& pulse);

    [[nodiscard]] PulseProfile to_pulse(std::string name = {}) const;

    [[nodiscard]] const ParameterLayout& layout() const { return layout_; }
    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
    [[nodiscard]] const std::vector<bool>& trainable() const { return trainable_; }
    [[nodiscard]] int size() const { return static_cast<int>(values_.size()); }
    [[nodiscard]] int trainable_count() const;
    [[nodiscard]] double duration() const;
    [[nodiscard]] std::vector<std::string> names() const;

    void set_values(const Eigen::VectorXd& values);
    void set_trainable(int index, bool trainable);
    double& operator[](int index) { return values_(index); }
    double operator[](int index) const { return values_(index); }

    bool operator==(const ParameterVector&) const = default;

private:
    ParameterLayout layout_;
    Eigen::VectorXd values_;
    std::vector<bool> trainable_;
};

nlohmann::json parameters_to_json(const ParameterVector& params);
ParameterVector parameters_from_json(const nlohmann::json& document);

// ---------------------------------------------------------------------------
// Robust objective
// ---------------------------------------------------------------------------

enum class VariationMeasure { StdDev, Range };

std::string_view to_string(VariationMeasure measure);
VariationMeasure parse_variation_measure(std::string_view text);

struct RobustObjectiveConfig {
    std::vector<double> epsilon_grid{0.0};
    double weight_variation = 0.0;
    double weight_slope = 0.0;
    double blockade_tb = 1e4;
    LevelScheme scheme = LevelScheme::SinglePhoton;
    /// TwoPhoton only: T Delta_P / (2 pi).
    double intermediate_detuning_t = 5000.0;
    int steps = 1024;
    VariationMeasure variation = VariationMeasure::StdDev;

    /// Grid sorted ascending, containing 0; weights >= 0; steps >= 1.
    void validate() const;
};

struct ObjectiveReport {
    double mean_fidelity = 0.0;
    std::vector<double> per_point_fidelities;
    double variation = 0.0;
    /// F(eps_max) - F(eps_min).
    double slope = 0.0;
    double composite = 0.0;
};

/// Assembles the report from per-point fidelities ordered like the grid.
ObjectiveReport summarize(std::span<const double> fidelities, double weight_variation, double weight_slope,
                          VariationMeasure variation = VariationMeasure::StdDev);

/// Scales both atoms by (1 + eps) per grid point, propagates and scores.
ObjectiveReport robust_objective(const PulseProfile& pulse, const RobustObjectiveConfig& config);
ObjectiveReport robust_objective(const ParameterVector& params, const RobustObjectiveConfig& config);

// ---------------------------------------------------------------------------
// Gradients and Adam
// ---------------------------------------------------------------------------

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

struct FiniteDiffOptions {
    double relative_step = 1e-5;
    double absolute_step = 1e-7;

    [[nodiscard]] double step(double x) const;
};

/// Central differences for the entries with mask[i] set; others are 0.
/// An empty mask means every entry is trainable.
Eigen::VectorXd finite_diff_gradient(const ScalarObjective& f, const Eigen::VectorXd& x, const std::vector<bool>& mask,
                                     const FiniteDiffOptions& options = {});

/// Gradient of the composite objective.
Eigen::VectorXd finite_diff_gradient(const ParameterVector& params, const RobustObjectiveConfig& config,
                                     const FiniteDiffOptions& options = {});

struct AdamOptions {
    double learning_rate = 0.01;
    int iterations = 100;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// When set, the step size decays geometrically to this value at the last iteration.
    std::optional<double> final_learning_rate;
};

struct AdamResult {
    Eigen::VectorXd best;
    double best_value = 0.0;
    /// Objective at each visited iterate (initial point first).
    std::vector<double> trace;
    /// Set when a non-finite objective stopped the run.
    bool diverged = false;
};

/// Adam ascent on f. Returns the best iterate seen.
AdamResult adam_ascent(const ScalarObjective& f, const Eigen::VectorXd& x0, const std::vector<bool>& mask,
                       const AdamOptions& options, const FiniteDiffOptions& fd = {});

struct AdamRunResult {
    ParameterVector params;
    ObjectiveReport report;
    std::vector<double> trace;
    bool diverged = false;
};

AdamRunResult adam_run(const ParameterVector& initial, const RobustObjectiveConfig& config, double learning_rate,
                       int iterations, std::optional<double> final_learning_rate = {});

struct GradientCheck {
    int index = -1;
    double derivative_h = 0.0;
    double derivative_half_h = 0.0;
    double relative_difference = 0.0;
    bool consistent = true;
};

/// Derivative of the composite along `index` at steps h and h/2.
GradientCheck check_gradient(const ParameterVector& params, const RobustObjectiveConfig& config, int index,
                             double tolerance = 1e-3, const FiniteDiffOptions& options = {});

// ---------------------------------------------------------------------------
// Staged pipeline
// ---------------------------------------------------------------------------

struct StageConfig {
    std::vector<double> epsilon_grid{0.0};
    double weight_variation = 0.0;
    double weight_slope = 0.0;
    double learning_rate = 0.02;
    std::optional<double> final_learning_rate;
    int iterations = 200;
    int survivors = 1;
};

/// Uniform initialisation ranges for the random pool.
struct InitRanges {
    double amplitude_lo = -1.0, amplitude_hi = 1.0;  // alpha_n, beta_n
    double warp_lo = -1.0, warp_hi = 1.0;            // A_n, B_n
    double chirp_lo = -0.5, chirp_hi = 0.5;
    double duration_lo = 10.0, duration_hi = 25.0;
    double detuning_lo = -1.0, detuning_hi = 0.0;
};

struct PipelineConfig {
    int pool_size = 32;
    std::vector<StageConfig> stages;
    std::uint64_t master_seed = 0;
    ParameterLayout layout;
    /// Amplitude values for the frozen amplitude entries (Omega, tau or Bernstein coefficients).
    std::vector<double> amplitude{1.0};
    InitRanges init;
    /// When set, T is fixed at this value and not trained.
    std::optional<double> fixed_duration;
    bool train_chirp = true;
    bool train_cos_terms = true;
    double blockade_tb = 1e4;
    int steps = 1024;
    VariationMeasure variation = VariationMeasure::StdDev;
    /// Optional starting points used instead of random draws for the first members.
    std::vector<ParameterVector> seeds;

    /// Stage 1 is single-point, survivors non-increasing and >= 1, pool >= 1.
    void validate() const;
    [[nodiscard]] RobustObjectiveConfig objective_for(std::size_t stage) const;

    /// Paper-scale four-stage schedule.
    static PipelineConfig default_schedule();
};

nlohmann::json pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& document);

struct PipelineMember {
    int member = 0;
    ParameterVector params;
    ObjectiveReport report;
    /// Composite trace per completed stage.
    std::vector<std::vector<double>> traces;
};

struct PipelineDiagnostic {
    int stage = 0;
    int member = 0;
    GradientCheck check;
};

struct PipelineResult {
    /// Best first, ranked by composite under the final stage.
    std::vector<PipelineMember> ranked;
    /// Stage-1 winner (kept for comparison with the final survivors).
    std::optional<PipelineMember> stage1_best;
    std::vector<PipelineDiagnostic> diagnostics;
    int completed_stages = 0;
};

struct PipelineRunOptions {
    int jobs = 1;
    /// When non-empty a checkpoint is written after every stage.
    std::filesystem::path checkpoint;
    /// Continue from `checkpoint` if it exists and matches the config.
    bool resume = false;
    /// Stop after this many stages (used to produce partial checkpoints).
    std::optional<int> stop_after;
    std::function<void(int stage, const std::vector<PipelineMember>&)> on_stage;
};

/// Pool of random inits, per-stage Adam, pruning by composite. Deterministic in master_seed.
PipelineResult multistage_pipeline(const PipelineConfig& config, const PipelineRunOptions& options = {});

nlohmann::json pipeline_result_to_json(const PipelineResult& result);

}  // namespace rydcz

namespace rydcz {

// ---------------------------------------------------------------------------
// Time-optimal derivation
// ---------------------------------------------------------------------------

/// Bisection on the gate duration: a duration passes when a single-point
/// pipeline stage (constant Omega = 1, no chirp) reaches the target.
/// The first probe draws `pool_size` random members; later probes start from
/// the last passing solution plus `continuation_pool - 1` random members.
struct TimeOptimalSearch {
    double duration_lo = 7.0;
    double duration_hi = 8.0;
    double duration_tolerance = 2e-3;
    double target_infidelity = 1e-5;
    /// N = 1 stalls in a slow valley well above the target; N = 2 converges.
    int n_terms = 2;
    int pool_size = 24;
    int continuation_pool = 4;
    int iterations = 600;
    double learning_rate = 0.05;
    double final_learning_rate = 1e-3;
    double blockade_tb = 1e6;
    int steps = 1024;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct TimeOptimalProbe {
    double duration = 0.0;
    double infidelity = 1.0;
};

struct TimeOptimalResult {
    PulseProfile pulse;
    double infidelity = 1.0;
    std::vector<TimeOptimalProbe> probes;
};

/// Throws ConfigError when duration_hi itself misses the target.
TimeOptimalResult derive_time_optimal(const TimeOptimalSearch& search, int jobs = 1);

nlohmann::json time_optimal_search_to_json(const TimeOptimalSearch& search);
TimeOptimalSearch time_optimal_search_from_json(const nlohmann::json& document);

}  // namespace rydcz
