#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"
#include "rydcz/optimizer.hpp"

using namespace rydcz;

namespace {

PipelineConfig tiny_pipeline() {
    PipelineConfig c;
    c.pool_size = 3;
    c.master_seed = 99;
    c.layout.n_terms = 1;
    c.steps = 128;
    c.init.duration_lo = 7.0;
    c.init.duration_hi = 9.0;
    c.stages = {StageConfig{{0.0}, 0.0, 0.0, 0.05, std::nullopt, 6, 2},
                StageConfig{{-0.02, 0.0, 0.02}, 10.0, 10.0, 0.02, std::nullopt, 4, 1}};
    return c;
}

}  // namespace

TEST(Summarize, CompositeBoundedByMean) {
    const std::vector<double> f{0.99, 0.995, 0.999, 0.994, 0.98};
    const ObjectiveReport r = summarize(f, 10.0, 5.0);
    EXPECT_NEAR(r.mean_fidelity, (0.99 + 0.995 + 0.999 + 0.994 + 0.98) / 5, 1e-15);
    EXPECT_DOUBLE_EQ(r.slope, 0.98 - 0.99);
    EXPECT_LE(r.composite, r.mean_fidelity);
    EXPECT_NEAR(r.composite, r.mean_fidelity - 10.0 * r.variation - 5.0 * std::abs(r.slope), 1e-15);
    const ObjectiveReport flat = summarize(std::vector<double>{0.9, 0.9, 0.9}, 10.0, 5.0);
    EXPECT_EQ(flat.composite, flat.mean_fidelity);
}

TEST(Summarize, VariationMeasures) {
    const std::vector<double> f{1.0, 0.0, 0.5};
    EXPECT_NEAR(summarize(f, 0, 0, VariationMeasure::Range).variation, 1.0, 1e-15);
    EXPECT_NEAR(summarize(f, 0, 0, VariationMeasure::StdDev).variation, std::sqrt(1.0 / 6.0), 1e-15);
    EXPECT_EQ(parse_variation_measure("range"), VariationMeasure::Range);
    EXPECT_THROW(parse_variation_measure("max"), ConfigError);
}

TEST(Summarize, PenaltyMonotonicity) {
    const std::vector<double> f{0.97, 0.99, 0.995};
    double previous = 1.0;
    for (double w : {0.0, 0.5, 1.0, 10.0, 100.0}) {
        const double c = summarize(f, w, 1.0).composite;
        EXPECT_LE(c, previous);
        previous = c;
    }
    previous = 1.0;
    for (double w : {0.0, 0.5, 1.0, 10.0, 100.0}) {
        const double c = summarize(f, 1.0, w).composite;
        EXPECT_LE(c, previous);
        previous = c;
    }
}

TEST(Objective, SinglePointIsNominalFidelity) {
    const PulseProfile p = preset(PresetName::RobustRect);
    RobustObjectiveConfig c;
    c.steps = 1024;
    const ObjectiveReport r = robust_objective(p, c);
    GateSystem s;
    s.blockade = c.blockade_tb / p.duration;
    PropagationOptions o;
    o.steps = 1024;
    EXPECT_EQ(r.composite, gate_fidelity(s, p, {}, o).fidelity);
    EXPECT_EQ(r.composite, r.mean_fidelity);
}

TEST(Objective, ConfigValidation) {
    RobustObjectiveConfig c;
    c.epsilon_grid = {0.1, -0.1, 0.0};
    EXPECT_THROW(c.validate(), ContractError);
    c.epsilon_grid = {-0.1, 0.1};
    EXPECT_THROW(c.validate(), ContractError);
    c.epsilon_grid = {0.0};
    c.weight_slope = -1.0;
    EXPECT_THROW(c.validate(), ContractError);
}

TEST(Parameters, PulseRoundTrip) {
    const PulseProfile p = preset(PresetName::RobustRect);
    const ParameterVector v = ParameterVector::from_pulse(p);
    EXPECT_EQ(v.size(), v.layout().size());
    EXPECT_NEAR(v.duration(), p.duration, 1e-12);
    const PulseProfile q = v.to_pulse("copy");
    for (int i = 0; i <= 40; ++i) {
        const double t = p.duration * i / 40.0;
        EXPECT_NEAR(phase_at(q, t), phase_at(p, t), 1e-12);
        EXPECT_NEAR(amplitude_at(q, t), amplitude_at(p, t), 1e-15);
    }
    EXPECT_FALSE(v.trainable()[v.layout().amplitude_offset()]);
    EXPECT_EQ(parameters_from_json(parameters_to_json(v)), v);
    EXPECT_THROW(ParameterVector::from_pulse(preset(PresetName::LevinePichler)), ContractError);
}

TEST(Gradient, CentralDifferencesOnSmoothFunction) {
    const ScalarObjective f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * std::exp(0.5 * x(1)) - x(2) * x(2); };
    Eigen::VectorXd x(3);
    x << 0.3, -0.7, 1.2;
    const Eigen::VectorXd g = finite_diff_gradient(f, x, {});
    EXPECT_NEAR(g(0), std::cos(0.3) * std::exp(-0.35), 1e-8);
    EXPECT_NEAR(g(1), 0.5 * std::sin(0.3) * std::exp(-0.35), 1e-8);
    EXPECT_NEAR(g(2), -2.4, 1e-8);
    const Eigen::VectorXd masked = finite_diff_gradient(f, x, {true, false, true});
    EXPECT_EQ(masked(1), 0.0);
}

TEST(Gradient, IgnoredParameterHasZeroDerivative) {
    // beta_4 = 0 in the rectangular table, so B_4 has no effect on the pulse.
    const ParameterVector v = ParameterVector::from_pulse(preset(PresetName::RobustRect));
    RobustObjectiveConfig c;
    c.steps = 256;
    const Eigen::VectorXd g = finite_diff_gradient(v, c);
    EXPECT_EQ(g(param::crab(3, 2)), 0.0);
    EXPECT_EQ(g(v.layout().amplitude_offset()), 0.0);
}

TEST(Gradient, SelfConsistentAtGenericPoint) {
    ParameterVector v = ParameterVector::from_pulse(preset(PresetName::RobustRect));
    v[param::crab(0, 1)] += 0.05;
    RobustObjectiveConfig c;
    c.epsilon_grid = {-0.05, 0.0, 0.05};
    c.weight_variation = 10.0;
    c.weight_slope = 10.0;
    c.steps = 512;
    for (int index : {param::kDetuning, param::crab(1, 0), param::crab(2, 1)}) {
        const GradientCheck check = check_gradient(v, c, index);
        EXPECT_TRUE(check.consistent) << index << " " << check.relative_difference;
    }
}

TEST(Adam, ZeroLearningRateKeepsParameters) {
    const ParameterVector v = ParameterVector::from_pulse(preset(PresetName::RobustRect));
    RobustObjectiveConfig c;
    c.steps = 128;
    const AdamRunResult r = adam_run(v, c, 0.0, 3);
    EXPECT_EQ(r.params, v);
}

TEST(Adam, ClimbsConcaveQuadratic) {
    const ScalarObjective f = [](const Eigen::VectorXd& x) { return -(x(0) - 3.0) * (x(0) - 3.0) - (x(1) + 1.0) * (x(1) + 1.0); };
    AdamOptions o;
    o.learning_rate = 0.1;
    o.iterations = 2000;
    o.final_learning_rate = 1e-4;
    const AdamResult r = adam_ascent(f, Eigen::Vector2d(0.0, 0.0), {}, o);
    EXPECT_NEAR(r.best(0), 3.0, 1e-3);
    EXPECT_NEAR(r.best(1), -1.0, 1e-3);
    EXPECT_EQ(r.trace.size(), 2001u);
    EXPECT_FALSE(r.diverged);
}

TEST(Adam, StopsOnNonFiniteObjective) {
    const ScalarObjective f = [](const Eigen::VectorXd& x) { return x(0) > 0.5 ? std::nan("") : x(0); };
    AdamOptions o;
    o.learning_rate = 0.2;
    o.iterations = 50;
    const AdamResult r = adam_ascent(f, Eigen::VectorXd::Zero(1), {}, o);
    EXPECT_TRUE(r.diverged);
    EXPECT_LE(r.best(0), 0.5);
}

TEST(Pipeline, ConfigValidation) {
    PipelineConfig c = tiny_pipeline();
    c.stages[1].survivors = 3;
    EXPECT_THROW(c.validate(), ConfigError);
    c = tiny_pipeline();
    c.stages[0].epsilon_grid = {-0.01, 0.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c = tiny_pipeline();
    c.stages.clear();
    EXPECT_THROW(c.validate(), ConfigError);
    c = tiny_pipeline();
    c.amplitude = {1.0, 0.2};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Pipeline, JsonRoundTrip) {
    const PipelineConfig c = PipelineConfig::default_schedule();
    const nlohmann::json j = pipeline_config_to_json(c);
    EXPECT_EQ(pipeline_config_to_json(pipeline_config_from_json(j)), j);
}

TEST(Pipeline, DeterministicAcrossJobCounts) {
    const PipelineConfig c = tiny_pipeline();
    PipelineRunOptions one;
    PipelineRunOptions three;
    three.jobs = 3;
    const PipelineResult a = multistage_pipeline(c, one);
    const PipelineResult b = multistage_pipeline(c, three);
    EXPECT_EQ(pipeline_result_to_json(a), pipeline_result_to_json(b));
    ASSERT_EQ(a.ranked.size(), 1u);
    ASSERT_TRUE(a.stage1_best.has_value());
    EXPECT_EQ(a.completed_stages, 2);
}

TEST(Pipeline, WarmStartRecomputesObjective) {
    const PipelineConfig c = tiny_pipeline();
    PipelineRunOptions first;
    first.stop_after = 1;
    const PipelineResult after_one = multistage_pipeline(c, first);
    const PipelineResult full = multistage_pipeline(c);
    const PipelineMember& m = full.ranked.front();
    ASSERT_EQ(m.traces.size(), 2u);
    const auto it = std::find_if(after_one.ranked.begin(), after_one.ranked.end(),
                                 [&](const PipelineMember& x) { return x.member == m.member; });
    ASSERT_NE(it, after_one.ranked.end());
    // Stage 2 starts from the stage-1 output, scored under the stage-2 objective.
    EXPECT_EQ(m.traces[1].front(), robust_objective(it->params, c.objective_for(1)).composite);
    EXPECT_NE(m.traces[1].front(), m.traces[0].back());
}

TEST(Pipeline, ResumeReproducesFinalResult) {
    const auto dir = std::filesystem::temp_directory_path() / "rydcz-test-resume";
    std::filesystem::remove_all(dir);
    const PipelineConfig c = tiny_pipeline();
    const PipelineResult full = multistage_pipeline(c);

    PipelineRunOptions partial;
    partial.checkpoint = dir / "checkpoint.json";
    partial.stop_after = 1;
    const PipelineResult first = multistage_pipeline(c, partial);
    EXPECT_EQ(first.completed_stages, 1);
    ASSERT_TRUE(std::filesystem::exists(partial.checkpoint));

    PipelineRunOptions resume;
    resume.checkpoint = partial.checkpoint;
    resume.resume = true;
    const PipelineResult resumed = multistage_pipeline(c, resume);
    EXPECT_EQ(pipeline_result_to_json(resumed), pipeline_result_to_json(full));

    PipelineConfig other = c;
    other.master_seed = 100;
    EXPECT_THROW(multistage_pipeline(other, resume), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(Pipeline, StageOneReachesHighFidelity) {
    PipelineConfig c;
    c.pool_size = 4;
    c.master_seed = 2024;
    c.layout.n_terms = 2;
    c.steps = 512;
    c.stages = {StageConfig{{0.0}, 0.0, 0.0, 0.05, std::nullopt, 600, 4}};
    const PipelineResult r = multistage_pipeline(c);
    int good = 0;
    for (const auto& m : r.ranked) good += m.report.mean_fidelity >= 0.9999 ? 1 : 0;
    EXPECT_GE(good, 2);
}

TEST(TimeOptimalSearch, JsonRoundTripAndValidation) {
    TimeOptimalSearch s;
    s.master_seed = 5;
    EXPECT_EQ(time_optimal_search_to_json(time_optimal_search_from_json(time_optimal_search_to_json(s))),
              time_optimal_search_to_json(s));
    s.duration_hi = s.duration_lo;
    EXPECT_THROW(s.validate(), ConfigError);
}
