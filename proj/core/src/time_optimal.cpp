#include <cmath>
#include <string>

#include "rydcz/errors.hpp"
#include "rydcz/io.hpp"
#include "rydcz/optimizer.hpp"

namespace rydcz {

void TimeOptimalSearch::validate() const {
    if (!(duration_lo > 0.0) || !(duration_hi > duration_lo)) throw ConfigError("need 0 < duration_lo < duration_hi");
    if (!(duration_tolerance > 0.0)) throw ConfigError("duration tolerance must be > 0");
    if (!(target_infidelity > 0.0 && target_infidelity < 1.0)) throw ConfigError("target infidelity must be in (0, 1)");
    if (n_terms < 1 || pool_size < 1 || continuation_pool < 1 || iterations < 0 || steps < 1) throw ConfigError("pool, iterations and steps must be positive");
    if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0) || !(blockade_tb > 0.0)) throw ConfigError("bad learning rate or blockade");
}

namespace {

struct Attempt {
    TimeOptimalProbe probe;
    ParameterVector params;
};

Attempt attempt(const TimeOptimalSearch& search, double duration, int jobs, const ParameterVector* start) {
    PipelineConfig config;
    config.pool_size = start != nullptr ? search.continuation_pool : search.pool_size;
    config.master_seed = search.master_seed;
    config.layout = ParameterLayout{search.n_terms, AmplitudeKind::Constant, 0};
    config.amplitude = {1.0};
    config.fixed_duration = duration;
    config.train_chirp = false;
    config.blockade_tb = search.blockade_tb;
    config.steps = search.steps;
    if (start != nullptr) {
        ParameterVector seed = *start;
        seed[param::kLogDuration] = std::log(duration);
        config.seeds = {seed};
    }
    config.stages = {StageConfig{{0.0}, 0.0, 0.0, search.learning_rate, search.final_learning_rate, search.iterations, 1}};
    PipelineRunOptions options;
    options.jobs = jobs;
    const PipelineResult result = multistage_pipeline(config, options);
    const PipelineMember& best = result.ranked.front();
    return {{duration, 1.0 - best.report.mean_fidelity}, best.params};
}

}  // namespace

TimeOptimalResult derive_time_optimal(const TimeOptimalSearch& search, int jobs) {
    search.validate();
    TimeOptimalResult out;
    Attempt hi = attempt(search, search.duration_hi, jobs, nullptr);
    out.probes.push_back(hi.probe);
    if (!(hi.probe.infidelity <= search.target_infidelity)) {
        throw ConfigError("upper duration bound misses the target infidelity (reached " +
                          io::format_double(hi.probe.infidelity) + ")");
    }
    double lo = search.duration_lo;
    double upper = search.duration_hi;
    while (upper - lo > search.duration_tolerance) {
        const double mid = 0.5 * (lo + upper);
        Attempt a = attempt(search, mid, jobs, &hi.params);
        out.probes.push_back(a.probe);
        if (a.probe.infidelity <= search.target_infidelity) {
            upper = mid;
            hi = std::move(a);
        } else {
            lo = mid;
        }
    }
    out.pulse = hi.params.to_pulse("time-optimal");
    out.infidelity = hi.probe.infidelity;
    return out;
}

nlohmann::json time_optimal_search_to_json(const TimeOptimalSearch& s) {
    return {{"duration_lo", s.duration_lo},
            {"duration_hi", s.duration_hi},
            {"duration_tolerance", s.duration_tolerance},
            {"target_infidelity", s.target_infidelity},
            {"n_terms", s.n_terms},
            {"pool_size", s.pool_size},
            {"continuation_pool", s.continuation_pool},
            {"iterations", s.iterations},
            {"learning_rate", s.learning_rate},
            {"final_learning_rate", s.final_learning_rate},
            {"blockade_tb", s.blockade_tb},
            {"steps", s.steps},
            {"master_seed", s.master_seed}};
}

TimeOptimalSearch time_optimal_search_from_json(const nlohmann::json& d) {
    TimeOptimalSearch s;
    try {
        s.duration_lo = d.value("duration_lo", s.duration_lo);
        s.duration_hi = d.value("duration_hi", s.duration_hi);
        s.duration_tolerance = d.value("duration_tolerance", s.duration_tolerance);
        s.target_infidelity = d.value("target_infidelity", s.target_infidelity);
        s.n_terms = d.value("n_terms", s.n_terms);
        s.pool_size = d.value("pool_size", s.pool_size);
        s.continuation_pool = d.value("continuation_pool", s.continuation_pool);
        s.iterations = d.value("iterations", s.iterations);
        s.learning_rate = d.value("learning_rate", s.learning_rate);
        s.final_learning_rate = d.value("final_learning_rate", s.final_learning_rate);
        s.blockade_tb = d.value("blockade_tb", s.blockade_tb);
        s.steps = d.value("steps", s.steps);
        s.master_seed = d.value("master_seed", s.master_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad time-optimal search config: ") + e.what());
    }
    s.validate();
    return s;
}

}  // namespace rydcz
