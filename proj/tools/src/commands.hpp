#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rydcz::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr int kConfigSchemaVersion = 1;

/// Flags shared by every subcommand. Unset optionals leave file values alone.
struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    int jobs = 1;
    bool quiet = false;
};

/// Flag-level overrides for simulate and scan; applied over the config file.
struct PhysicsOverrides {
    std::vector<std::string> presets;
    std::optional<std::string> scheme;
    std::optional<double> blockade_tb;
    std::optional<double> intermediate_detuning_t;
    std::optional<std::string> integrator;
};

struct SimulateOverrides {
    PhysicsOverrides physics;
    std::optional<double> epsilon;
    std::optional<double> alpha;
    std::optional<double> ramp;
};

struct ScanOverrides {
    PhysicsOverrides physics;
    std::optional<std::string> axis;
    std::vector<double> values;
    std::optional<std::string> range;  // "lo:hi:count"
    std::vector<std::string> lifetime_presets;
    std::optional<double> gate_duration;
};

struct OptimizeOverrides {
    bool resume = false;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<int> stop_after;
};

/// Output directory: flag, then RYDCZ_OUTPUT_DIR, then the working directory.
std::filesystem::path resolve_out_dir(const CommonOptions& common);

/// Loads a config document; a run manifest is accepted and its "config" entry used.
nlohmann::json load_config_document(const std::filesystem::path& path);

// Each resolver returns the fully materialised config (defaults < file < flags).
nlohmann::json resolve_simulate(const CommonOptions& common, const SimulateOverrides& flags);
nlohmann::json resolve_scan(const CommonOptions& common, const ScanOverrides& flags);
nlohmann::json resolve_optimize(const CommonOptions& common);
nlohmann::json resolve_montecarlo(const CommonOptions& common);

int run_simulate(const CommonOptions& common, const SimulateOverrides& flags);
int run_scan(const CommonOptions& common, const ScanOverrides& flags);
int run_optimize(const CommonOptions& common, const OptimizeOverrides& flags);
int run_montecarlo(const CommonOptions& common);
int run_presets_list(const CommonOptions& common);

/// Parses argv and dispatches; returns the process exit code.
int main_entry(int argc, const char* const* argv);

}  // namespace rydcz::cli
