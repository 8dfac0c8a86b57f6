#include <cstdlib>
#include <sstream>

#include "commands.hpp"
#include "rydcz/errors.hpp"
#include "rydcz/hilbert.hpp"
#include "rydcz/io.hpp"
#include "rydcz/montecarlo.hpp"
#include "rydcz/optimizer.hpp"
#include "rydcz/scans.hpp"

namespace rydcz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json propagation_defaults() { return {{"steps", kDefaultSteps}, {"integrator", "magnus4"}, {"method", "blocks"}}; }

/// Copies every key of `overlay` into `base`, recursing into objects.
void merge_into(json& base, const json& overlay) {
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (it.key() == "schema_version") continue;
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
            merge_into(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
}

json file_or_empty(const CommonOptions& common) {
    if (!common.config) return json::object();
    json doc = load_config_document(*common.config);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (doc.contains("schema_version") && doc.at("schema_version") != kConfigSchemaVersion) {
        throw ConfigError("unsupported config schema_version");
    }
    return doc;
}

void apply_physics(json& doc, const PhysicsOverrides& p) {
    if (p.scheme) doc["scheme"] = *p.scheme;
    if (p.blockade_tb) doc["blockade_tb"] = *p.blockade_tb;
    if (p.intermediate_detuning_t) doc["intermediate_detuning_t"] = *p.intermediate_detuning_t;
    if (p.integrator) doc["propagation"]["integrator"] = *p.integrator;
}

void apply_steps(json& doc, const CommonOptions& common) {
    if (common.steps) doc["propagation"]["steps"] = *common.steps;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw ConfigError("range needs at least one point");
    if (count == 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return out;
}

std::vector<double> parse_range(const std::string& text) {
    std::istringstream in(text);
    std::string lo, hi, count;
    if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') || !std::getline(in, count)) {
        throw ConfigError("range must look like lo:hi:count");
    }
    return linspace(io::parse_double(lo), io::parse_double(hi), static_cast<int>(io::parse_double(count)));
}

std::vector<double> default_axis(const std::string& axis) {
    if (axis == "epsilon" || axis == "alpha") return linspace(-0.1, 0.1, 21);
    if (axis == "ramp") return linspace(-0.1, 0.1, 11);
    if (axis == "deltap") return {0.5e9, 1e9, 2e9, 4e9, 8e9, 16e9};
    throw ConfigError("unknown scan axis: " + axis);
}

void seed_rule(json& doc, const CommonOptions& common) {
    if (common.seed) doc["master_seed"] = *common.seed;
    if (!doc.contains("master_seed") || doc.at("master_seed").is_null()) {
        throw ConfigError("no seed: pass --seed or set master_seed in the config");
    }
}

}  // namespace

fs::path resolve_out_dir(const CommonOptions& common) {
    if (common.out_dir) return *common.out_dir;
    if (const char* env = std::getenv("RYDCZ_OUTPUT_DIR"); env != nullptr && *env != '\0') return fs::path(env);
    return fs::current_path();
}

json load_config_document(const fs::path& path) {
    json doc = io::read_json(path);
    if (doc.is_object() && doc.value("kind", "") == "run-manifest") return doc.at("config");
    return doc;
}

json resolve_simulate(const CommonOptions& common, const SimulateOverrides& flags) {
    json doc{{"schema_version", kConfigSchemaVersion},
             {"pulse", "robust-rect"},
             {"scheme", "single-photon"},
             {"blockade_tb", 1e4},
             {"intermediate_detuning_t", 5000.0},
             {"epsilon", 0.0},
             {"alpha", 0.0},
             {"ramp", 0.0},
             {"propagation", propagation_defaults()}};
    merge_into(doc, file_or_empty(common));
    if (flags.physics.presets.size() > 1) throw ConfigError("simulate takes a single preset");
    if (!flags.physics.presets.empty()) doc["pulse"] = flags.physics.presets.front();
    apply_physics(doc, flags.physics);
    apply_steps(doc, common);
    if (flags.epsilon) doc["epsilon"] = *flags.epsilon;
    if (flags.alpha) doc["alpha"] = *flags.alpha;
    if (flags.ramp) doc["ramp"] = *flags.ramp;
    return doc;
}

json resolve_scan(const CommonOptions& common, const ScanOverrides& flags) {
    json doc{{"schema_version", kConfigSchemaVersion},
             {"axis", "epsilon"},
             {"presets", json::array({"levine-pichler", "time-optimal", "robust-rect"})},
             {"scheme", "single-photon"},
             {"blockade_tb", 1e4},
             {"intermediate_detuning_t", 5000.0},
             {"propagation", propagation_defaults()},
             {"lifetime_presets", json::array({"rb-5p3/2", "rb-6p3/2"})},
             {"lifetime_r", kRb80SLifetime},
             {"gate_duration", 100e-9}};
    const json file = file_or_empty(common);
    merge_into(doc, file);
    if (flags.axis) doc["axis"] = *flags.axis;
    if (!flags.physics.presets.empty()) doc["presets"] = flags.physics.presets;
    apply_physics(doc, flags.physics);
    apply_steps(doc, common);
    if (!flags.lifetime_presets.empty()) doc["lifetime_presets"] = flags.lifetime_presets;
    if (flags.gate_duration) doc["gate_duration"] = *flags.gate_duration;

    const std::string axis = doc.at("axis").get<std::string>();
    if (!flags.values.empty()) {
        doc["values"] = flags.values;
    } else if (flags.range) {
        doc["values"] = parse_range(*flags.range);
    } else if (doc.contains("range")) {
        const json& r = doc.at("range");
        doc["values"] = linspace(r.at("lo").get<double>(), r.at("hi").get<double>(), r.at("count").get<int>());
    } else if (!doc.contains("values")) {
        doc["values"] = default_axis(axis);
    }
    doc.erase("range");
    if (doc.at("values").empty()) throw ConfigError("scan needs at least one axis value");
    if (doc.at("presets").empty()) throw ConfigError("scan needs at least one preset");
    default_axis(axis);  // validates the axis name
    return doc;
}

json resolve_optimize(const CommonOptions& common) {
    json file = file_or_empty(common);
    const std::string mode = file.value("mode", "pipeline");
    json doc;
    if (mode == "pipeline") {
        doc = pipeline_config_to_json(PipelineConfig::default_schedule());
        doc.erase("master_seed");
        merge_into(doc, file);
        if (common.steps) doc["steps"] = *common.steps;
        seed_rule(doc, common);
        doc = pipeline_config_to_json(pipeline_config_from_json(doc));
    } else if (mode == "time-optimal") {
        doc = time_optimal_search_to_json(TimeOptimalSearch{});
        doc.erase("master_seed");
        merge_into(doc, file);
        if (common.steps) doc["steps"] = *common.steps;
        seed_rule(doc, common);
        doc = time_optimal_search_to_json(time_optimal_search_from_json(doc));
    } else {
        throw ConfigError("optimize mode must be 'pipeline' or 'time-optimal'");
    }
    doc["mode"] = mode;
    doc["schema_version"] = kConfigSchemaVersion;
    return doc;
}

json resolve_montecarlo(const CommonOptions& common) {
    json doc{{"schema_version", kConfigSchemaVersion},
             {"mode", "temperature"},
             {"presets", json::array({"robust-rect", "time-optimal"})},
             {"temperatures_uk", json::array({1.0, 2.0, 5.0, 10.0})},
             {"depths_uk", json::array({50.0, 100.0, 200.0, 400.0})},
             {"temperature_uk", 5.0},
             {"shots", 5000},
             {"gate_duration", 100e-9},
             {"scheme", "single-photon"},
             {"blockade_tb", 1e4},
             {"intermediate_detuning_hz", 5e9},
             {"lifetime_p", nullptr},
             {"lifetime_r", nullptr},
             {"trap", trap_to_json(TrapConfig{})},
             {"beams", "297"},
             {"propagation", propagation_defaults()}};
    merge_into(doc, file_or_empty(common));
    apply_steps(doc, common);
    seed_rule(doc, common);
    const std::string mode = doc.at("mode").get<std::string>();
    if (mode != "temperature" && mode != "depth") throw ConfigError("montecarlo mode must be 'temperature' or 'depth'");
    if (doc.at("presets").empty()) throw ConfigError("montecarlo needs at least one preset");
    doc["trap"] = trap_to_json(trap_from_json(doc.at("trap")));
    doc["beams"] = beams_to_json(beams_from_json(doc.at("beams")));
    return doc;
}

}  // namespace rydcz::cli
