#include <algorithm>
#include <cmath>
#include <filesystem>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"
#include "rydcz/optimizer.hpp"
#include "rydcz/parallel.hpp"
#include "rydcz/rng.hpp"

namespace rydcz {

namespace {

constexpr int kPipelineSchemaVersion = 1;
constexpr std::uint64_t kCheckStreamSalt = 0x9d2c5680a1b3e4f7ULL;

ParameterVector random_member(const PipelineConfig& config, int member) {
    CounterRng rng(config.master_seed, static_cast<std::uint64_t>(member));
    const ParameterLayout& layout = config.layout;
    Eigen::VectorXd values = Eigen::VectorXd::Zero(layout.size());
    std::vector<bool> trainable(static_cast<std::size_t>(layout.size()), true);
    const InitRanges& r = config.init;

    const double duration = rng.uniform(r.duration_lo, r.duration_hi);
    values(param::kLogDuration) = std::log(config.fixed_duration.value_or(duration));
    values(param::kDetuning) = rng.uniform(r.detuning_lo, r.detuning_hi);
    values(param::kChirp) = rng.uniform(r.chirp_lo, r.chirp_hi);
    for (int n = 0; n < layout.n_terms; ++n) {
        values(param::crab(n, 0)) = rng.uniform(r.warp_lo, r.warp_hi);
        values(param::crab(n, 1)) = rng.uniform(r.amplitude_lo, r.amplitude_hi);
        values(param::crab(n, 2)) = rng.uniform(r.warp_lo, r.warp_hi);
        values(param::crab(n, 3)) = rng.uniform(r.amplitude_lo, r.amplitude_hi);
    }
    ParameterVector params(layout, values, trainable);
    if (config.fixed_duration) params.set_trainable(param::kLogDuration, false);
    if (!config.train_chirp) {
        params[param::kChirp] = 0.0;
        params.set_trainable(param::kChirp, false);
    }
    if (!config.train_cos_terms) {
        for (int n = 0; n < layout.n_terms; ++n) {
            params[param::crab(n, 2)] = 0.0;
            params[param::crab(n, 3)] = 0.0;
            params.set_trainable(param::crab(n, 2), false);
            params.set_trainable(param::crab(n, 3), false);
        }
    }
    for (std::size_t i = 0; i < config.amplitude.size(); ++i) {
        const int index = layout.amplitude_offset() + static_cast<int>(i);
        params[index] = config.amplitude[i];
        params.set_trainable(index, false);
    }
    return params;
}

int pick_trainable(const ParameterVector& params, std::uint64_t seed, std::uint64_t stream) {
    std::vector<int> candidates;
    for (int i = 0; i < params.size(); ++i) {
        if (params.trainable()[static_cast<std::size_t>(i)]) candidates.push_back(i);
    }
    if (candidates.empty()) return -1;
    CounterRng rng(seed ^ kCheckStreamSalt, stream);
    return candidates[static_cast<std::size_t>(rng.next_u64() % candidates.size())];
}

void rank(std::vector<PipelineMember>& members) {
    std::stable_sort(members.begin(), members.end(), [](const PipelineMember& a, const PipelineMember& b) {
        const double ca = std::isfinite(a.report.composite) ? a.report.composite : -INFINITY;
        const double cb = std::isfinite(b.report.composite) ? b.report.composite : -INFINITY;
        if (ca != cb) return ca > cb;
        return a.member < b.member;
    });
}

nlohmann::json report_to_json(const ObjectiveReport& report) {
    return {{"mean_fidelity", report.mean_fidelity},
            {"per_point_fidelities", report.per_point_fidelities},
            {"variation", report.variation},
            {"slope", report.slope},
            {"composite", report.composite}};
}

ObjectiveReport report_from_json(const nlohmann::json& j) {
    ObjectiveReport r;
    r.mean_fidelity = j.at("mean_fidelity").get<double>();
    r.per_point_fidelities = j.at("per_point_fidelities").get<std::vector<double>>();
    r.variation = j.at("variation").get<double>();
    r.slope = j.at("slope").get<double>();
    r.composite = j.at("composite").get<double>();
    return r;
}

nlohmann::json member_to_json(const PipelineMember& m) {
    return {{"member", m.member},
            {"params", parameters_to_json(m.params)},
            {"report", report_to_json(m.report)},
            {"traces", m.traces}};
}

PipelineMember member_from_json(const nlohmann::json& j) {
    PipelineMember m;
    m.member = j.at("member").get<int>();
    m.params = parameters_from_json(j.at("params"));
    m.report = report_from_json(j.at("report"));
    m.traces = j.at("traces").get<std::vector<std::vector<double>>>();
    return m;
}

nlohmann::json diagnostic_to_json(const PipelineDiagnostic& d) {
    return {{"stage", d.stage},
            {"member", d.member},
            {"index", d.check.index},
            {"derivative_h", d.check.derivative_h},
            {"derivative_half_h", d.check.derivative_half_h},
            {"relative_difference", d.check.relative_difference},
            {"consistent", d.check.consistent}};
}

PipelineDiagnostic diagnostic_from_json(const nlohmann::json& j) {
    PipelineDiagnostic d;
    d.stage = j.at("stage").get<int>();
    d.member = j.at("member").get<int>();
    d.check.index = j.at("index").get<int>();
    d.check.derivative_h = j.at("derivative_h").get<double>();
    d.check.derivative_half_h = j.at("derivative_half_h").get<double>();
    d.check.relative_difference = j.at("relative_difference").get<double>();
    d.check.consistent = j.at("consistent").get<bool>();
    return d;
}

struct PipelineState {
    std::vector<PipelineMember> members;
    PipelineResult result;
};

void write_checkpoint(const std::filesystem::path& path, const PipelineConfig& config, const PipelineState& state) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : state.members) members.push_back(member_to_json(m));
    nlohmann::json doc = pipeline_result_to_json(state.result);
    doc["kind"] = "pipeline-checkpoint";
    doc["config"] = pipeline_config_to_json(config);
    doc["members"] = members;
    io::write_json(path, doc);
}

PipelineState read_checkpoint(const std::filesystem::path& path, const PipelineConfig& config) {
    const auto doc = io::read_json(path);
    try {
        if (doc.value("kind", std::string{}) != "pipeline-checkpoint") throw ConfigError("not a pipeline checkpoint");
        if (doc.at("config") != pipeline_config_to_json(config)) {
            throw ConfigError("checkpoint was written for a different pipeline config");
        }
        PipelineState state;
        for (const auto& m : doc.at("members")) state.members.push_back(member_from_json(m));
        state.result.completed_stages = doc.at("completed_stages").get<int>();
        if (doc.contains("stage1_best") && !doc.at("stage1_best").is_null()) {
            state.result.stage1_best = member_from_json(doc.at("stage1_best"));
        }
        for (const auto& d : doc.at("diagnostics")) state.result.diagnostics.push_back(diagnostic_from_json(d));
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

}  // namespace

void PipelineConfig::validate() const {
    if (pool_size < 1) throw ConfigError("pool_size must be >= 1");
    if (stages.empty()) throw ConfigError("pipeline needs at least one stage");
    if (stages.front().epsilon_grid != std::vector<double>{0.0}) {
        throw ConfigError("stage 1 must be a single-point optimisation (epsilon grid {0})");
    }
    int previous = pool_size;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const StageConfig& stage = stages[s];
        if (stage.survivors < 1) throw ConfigError("stage survivors must be >= 1");
        if (stage.survivors > previous) throw ConfigError("stage survivors must be non-increasing");
        if (stage.iterations < 1) throw ConfigError("stage iterations must be >= 1");
        if (!(stage.learning_rate >= 0.0)) throw ConfigError("stage learning rate must be >= 0");
        if (stage.final_learning_rate && !(*stage.final_learning_rate > 0.0 && stage.learning_rate > 0.0)) {
            throw ConfigError("a decaying learning rate needs positive start and end values");
        }
        previous = stage.survivors;
        try {
            objective_for(s).validate();
        } catch (const ContractError& e) {
            throw ConfigError("stage " + std::to_string(s + 1) + ": " + e.what());
        }
    }
    if (layout.n_terms < 0) throw ConfigError("n_terms must be >= 0");
    const int expected = layout.size() - layout.amplitude_offset();
    if (static_cast<int>(amplitude.size()) != expected) {
        throw ConfigError("amplitude needs " + std::to_string(expected) + " values");
    }
    if (fixed_duration && !(*fixed_duration > 0.0)) throw ConfigError("fixed duration must be > 0");
    if (!(init.duration_lo > 0.0) || init.duration_hi < init.duration_lo) throw ConfigError("bad duration range");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    for (const auto& seed : seeds) {
        if (!(seed.layout() == layout)) throw ConfigError("seed parameter layout differs from the pipeline layout");
    }
}

RobustObjectiveConfig PipelineConfig::objective_for(std::size_t stage) const {
    const StageConfig& s = stages.at(stage);
    RobustObjectiveConfig c;
    c.epsilon_grid = s.epsilon_grid;
    c.weight_variation = s.weight_variation;
    c.weight_slope = s.weight_slope;
    c.blockade_tb = blockade_tb;
    c.scheme = LevelScheme::SinglePhoton;
    c.steps = steps;
    c.variation = variation;
    return c;
}

PipelineConfig PipelineConfig::default_schedule() {
    PipelineConfig c;
    c.pool_size = 32;
    c.master_seed = 20250101;
    c.layout.n_terms = 4;
    c.amplitude = {1.0};
    // Weights stay moderate: at 100 the penalties pull survivors onto flat but low-fidelity pulses.
    const std::vector<double> narrow{-0.05, -0.025, 0.0, 0.025, 0.05};
    const std::vector<double> wide{-0.1, -0.0667, -0.0333, 0.0, 0.0333, 0.0667, 0.1};
    c.stages = {
        StageConfig{{0.0}, 0.0, 0.0, 0.05, std::nullopt, 300, 8},
        StageConfig{narrow, 3.0, 3.0, 0.02, 0.002, 200, 8},
        StageConfig{narrow, 10.0, 10.0, 0.01, 0.001, 200, 2},
        StageConfig{wide, 10.0, 10.0, 0.005, 0.0005, 200, 2},
    };
    return c;
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& config) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : config.stages) {
        nlohmann::json stage{{"epsilon_grid", s.epsilon_grid},
                             {"weight_variation", s.weight_variation},
                             {"weight_slope", s.weight_slope},
                             {"learning_rate", s.learning_rate},
                             {"iterations", s.iterations},
                             {"survivors", s.survivors}};
        if (s.final_learning_rate) stage["final_learning_rate"] = *s.final_learning_rate;
        stages.push_back(std::move(stage));
    }
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& p : config.seeds) seeds.push_back(parameters_to_json(p));
    const InitRanges& r = config.init;
    return {{"schema_version", kPipelineSchemaVersion},
            {"pool_size", config.pool_size},
            {"master_seed", config.master_seed},
            {"n_terms", config.layout.n_terms},
            {"amplitude_kind", config.layout.amplitude == AmplitudeKind::Constant     ? "constant"
                               : config.layout.amplitude == AmplitudeKind::Smoothstep ? "smoothstep"
                                                                                      : "bernstein"},
            {"bernstein_degree", config.layout.bernstein_degree},
            {"amplitude", config.amplitude},
            {"init",
             {{"amplitude", {r.amplitude_lo, r.amplitude_hi}},
              {"warp", {r.warp_lo, r.warp_hi}},
              {"chirp", {r.chirp_lo, r.chirp_hi}},
              {"duration", {r.duration_lo, r.duration_hi}},
              {"detuning", {r.detuning_lo, r.detuning_hi}}}},
            {"fixed_duration", config.fixed_duration ? nlohmann::json(*config.fixed_duration) : nlohmann::json()},
            {"train_chirp", config.train_chirp},
            {"train_cos_terms", config.train_cos_terms},
            {"blockade_tb", config.blockade_tb},
            {"steps", config.steps},
            {"variation", to_string(config.variation)},
            {"seeds", seeds},
            {"stages", stages}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& document) {
    try {
        const int version = document.value("schema_version", kPipelineSchemaVersion);
        if (version != kPipelineSchemaVersion) throw ConfigError("unsupported pipeline schema_version");
        PipelineConfig c = PipelineConfig::default_schedule();
        c.pool_size = document.value("pool_size", c.pool_size);
        c.master_seed = document.value("master_seed", c.master_seed);
        c.layout.n_terms = document.value("n_terms", c.layout.n_terms);
        const std::string kind = document.value("amplitude_kind", std::string{"constant"});
        if (kind == "constant") {
            c.layout.amplitude = AmplitudeKind::Constant;
        } else if (kind == "smoothstep") {
            c.layout.amplitude = AmplitudeKind::Smoothstep;
        } else if (kind == "bernstein") {
            c.layout.amplitude = AmplitudeKind::Bernstein;
        } else {
            throw ConfigError("unknown amplitude kind: " + kind);
        }
        c.layout.bernstein_degree = document.value("bernstein_degree", 0);
        c.amplitude = document.value("amplitude", c.amplitude);
        if (document.contains("init")) {
            const auto& init = document.at("init");
            auto range = [&](const char* key, double& lo, double& hi) {
                if (!init.contains(key)) return;
                const auto v = init.at(key).get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError(std::string("init.") + key + " must be [lo, hi]");
                lo = v[0];
                hi = v[1];
            };
            range("amplitude", c.init.amplitude_lo, c.init.amplitude_hi);
            range("warp", c.init.warp_lo, c.init.warp_hi);
            range("chirp", c.init.chirp_lo, c.init.chirp_hi);
            range("duration", c.init.duration_lo, c.init.duration_hi);
            range("detuning", c.init.detuning_lo, c.init.detuning_hi);
        }
        if (document.contains("fixed_duration") && !document.at("fixed_duration").is_null()) {
            c.fixed_duration = document.at("fixed_duration").get<double>();
        }
        c.train_chirp = document.value("train_chirp", c.train_chirp);
        c.train_cos_terms = document.value("train_cos_terms", c.train_cos_terms);
        c.blockade_tb = document.value("blockade_tb", c.blockade_tb);
        c.steps = document.value("steps", c.steps);
        c.variation = parse_variation_measure(document.value("variation", std::string{"stddev"}));
        c.seeds.clear();
        if (document.contains("seeds")) {
            for (const auto& s : document.at("seeds")) c.seeds.push_back(parameters_from_json(s));
        }
        if (document.contains("stages")) {
            c.stages.clear();
            for (const auto& s : document.at("stages")) {
                StageConfig stage;
                stage.epsilon_grid = s.at("epsilon_grid").get<std::vector<double>>();
                stage.weight_variation = s.value("weight_variation", 0.0);
                stage.weight_slope = s.value("weight_slope", 0.0);
                stage.learning_rate = s.value("learning_rate", stage.learning_rate);
                if (s.contains("final_learning_rate")) stage.final_learning_rate = s.at("final_learning_rate").get<double>();
                stage.iterations = s.value("iterations", stage.iterations);
                stage.survivors = s.value("survivors", stage.survivors);
                c.stages.push_back(std::move(stage));
            }
        }
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed pipeline config: ") + e.what());
    }
}

nlohmann::json pipeline_result_to_json(const PipelineResult& result) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& m : result.ranked) ranked.push_back(member_to_json(m));
    nlohmann::json diagnostics = nlohmann::json::array();
    for (const auto& d : result.diagnostics) diagnostics.push_back(diagnostic_to_json(d));
    return {{"completed_stages", result.completed_stages},
            {"ranked", ranked},
            {"stage1_best", result.stage1_best ? member_to_json(*result.stage1_best) : nlohmann::json()},
            {"diagnostics", diagnostics}};
}

PipelineResult multistage_pipeline(const PipelineConfig& config, const PipelineRunOptions& options) {
    config.validate();
    PipelineState state;
    if (options.resume && !options.checkpoint.empty() && std::filesystem::exists(options.checkpoint)) {
        state = read_checkpoint(options.checkpoint, config);
    } else {
        for (int i = 0; i < config.pool_size; ++i) {
            PipelineMember m;
            m.member = i;
            m.params = i < static_cast<int>(config.seeds.size()) ? config.seeds[static_cast<std::size_t>(i)]
                                                                 : random_member(config, i);
            state.members.push_back(std::move(m));
        }
    }

    const int last_stage = std::min<int>(static_cast<int>(config.stages.size()),
                                         options.stop_after.value_or(static_cast<int>(config.stages.size())));
    for (int s = state.result.completed_stages; s < last_stage; ++s) {
        const StageConfig& stage = config.stages[static_cast<std::size_t>(s)];
        const RobustObjectiveConfig objective = config.objective_for(static_cast<std::size_t>(s));
        std::vector<PipelineMember>& members = state.members;
        std::vector<PipelineDiagnostic> checks(members.size());

        parallel_for(members.size(), options.jobs, [&](std::size_t i) {
            PipelineMember& m = members[i];
            // Checked at the stage's starting point: at a converged optimum the
            // derivative is at roundoff level and the comparison is meaningless.
            const std::uint64_t stream = static_cast<std::uint64_t>(s) * 1000003ULL + static_cast<std::uint64_t>(m.member);
            const int index = pick_trainable(m.params, config.master_seed, stream);
            checks[i].stage = s + 1;
            checks[i].member = m.member;
            if (index >= 0) checks[i].check = check_gradient(m.params, objective, index);
            const auto run = adam_run(m.params, objective, stage.learning_rate, stage.iterations, stage.final_learning_rate);
            m.params = run.params;
            m.report = run.report;
            m.traces.push_back(run.trace);
        });
        for (const auto& c : checks) {
            if (c.check.index >= 0) state.result.diagnostics.push_back(c);
        }

        std::erase_if(members, [](const PipelineMember& m) { return !std::isfinite(m.report.composite); });
        if (members.empty()) throw PropagationError("pipeline stage " + std::to_string(s + 1) + " left no finite members");
        rank(members);
        if (s == 0) state.result.stage1_best = members.front();
        if (static_cast<int>(members.size()) > stage.survivors) members.resize(static_cast<std::size_t>(stage.survivors));
        state.result.completed_stages = s + 1;
        state.result.ranked = members;
        if (!options.checkpoint.empty()) write_checkpoint(options.checkpoint, config, state);
        if (options.on_stage) options.on_stage(s + 1, members);
    }
    state.result.ranked = state.members;
    return state.result;
}

}  // namespace rydcz
