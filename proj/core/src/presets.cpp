#include <cstdlib>
#include <filesystem>
#include <string>

#include "rydcz/errors.hpp"
#include "rydcz/pulses.hpp"

namespace rydcz {

std::string_view preset_id(PresetName name) {
    switch (name) {
        case PresetName::LevinePichler: return "levine-pichler";
        case PresetName::TimeOptimal: return "time-optimal";
        case PresetName::RobustRect: return "robust-rect";
        case PresetName::RobustSmooth: return "robust-smooth";
    }
    return "unknown";
}

PresetName parse_preset_name(std::string_view id) {
    for (PresetName name : kAllPresets) {
        if (preset_id(name) == id) return name;
    }
    throw ConfigError("unknown preset: " + std::string(id));
}

std::filesystem::path preset_directory() {
    if (const char* env = std::getenv("RYDCZ_PRESET_DIR"); env != nullptr && *env != '\0') {
        return std::filesystem::path(env);
    }
    const std::filesystem::path source_tree(RYDCZ_SOURCE_PRESET_DIR);
    if (std::filesystem::exists(source_tree)) return source_tree;
    return std::filesystem::path(RYDCZ_INSTALL_PRESET_DIR);
}

PulseProfile preset(PresetName name, const std::filesystem::path& directory) {
    const auto file = directory / (std::string(preset_id(name)) + ".json");
    if (!std::filesystem::exists(file)) throw ConfigError("preset file missing: " + file.string());
    PulseProfile pulse = load_pulse(file);
    if (pulse.name.empty()) pulse.name = std::string(preset_id(name));
    return pulse;
}

PulseProfile preset(PresetName name) { return preset(name, preset_directory()); }

PulseProfile resolve_pulse(std::string_view preset_or_path) {
    for (PresetName name : kAllPresets) {
        if (preset_id(name) == preset_or_path) return preset(name);
    }
    const std::filesystem::path path(preset_or_path);
    if (path.extension() == ".json" && std::filesystem::exists(path)) return load_pulse(path);
    throw ConfigError("unknown preset: " + std::string(preset_or_path));
}

}  // namespace rydcz
