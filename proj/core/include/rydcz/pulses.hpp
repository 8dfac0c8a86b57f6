#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace rydcz {

// ---------------------------------------------------------------------------
// Phase profiles
// ---------------------------------------------------------------------------

/// How the tanh warp enters the CRAB oscillation argument.
///
/// TimeWarped: arg_n = (2 pi / T) n (1 + tanh(X_n)/2) (t - T/2). This is the
/// reading under which the published robust-gate tables reproduce a robust
/// CZ gate, and it is the default.
/// Verbatim: arg_n = (2 pi / T) n (1 + tanh(X_n)/2 (t - T/2)), kept for
/// comparison only.
enum class AnsatzInterpretation { TimeWarped, Verbatim };

/// One harmonic of the CRAB series: sin branch (warp A, amplitude alpha) and
/// cos branch (warp B, amplitude beta).
struct CrabTerm {
    double warp_sin = 0.0;
    double amp_sin = 0.0;
    double warp_cos = 0.0;
    double amp_cos = 0.0;

    bool operator==(const CrabTerm&) const = default;
};

/// Linear chirp c1 (t - T/2) plus a tanh-warped sin/cos CRAB series.
struct PhaseAnsatz {
    double linear_chirp = 0.0;
    std::vector<CrabTerm> terms;
    AnsatzInterpretation interpretation = AnsatzInterpretation::TimeWarped;

    [[nodiscard]] int n_terms() const { return static_cast<int>(terms.size()); }
    bool operator==(const PhaseAnsatz&) const = default;
};

/// Piecewise-constant phase: 0 before jump_time, `jump` afterwards.
struct StepPhase {
    double jump = 0.0;
    double jump_time = 0.0;

    bool operator==(const StepPhase&) const = default;
};

using PhaseProfile = std::variant<PhaseAnsatz, StepPhase>;

// ---------------------------------------------------------------------------
// Amplitude shapes
// ---------------------------------------------------------------------------

struct ConstantAmplitude {
    double rabi = 1.0;
    bool operator==(const ConstantAmplitude&) const = default;
};

/// Plateau of height `rabi` with 7th-order smoothstep edges, each edge lasting
/// edge_fraction * T / 2.
struct SmoothstepAmplitude {
    double rabi = 1.0;
    double edge_fraction = 0.25;
    bool operator==(const SmoothstepAmplitude&) const = default;
};

/// Sum_k c_k B_{k,n}(t/T) over the Bernstein basis of degree n = size - 1.
struct BernsteinAmplitude {
    std::vector<double> coefficients;
    bool operator==(const BernsteinAmplitude&) const = default;
};

struct AmplitudeShape {
    std::variant<ConstantAmplitude, SmoothstepAmplitude, BernsteinAmplitude> base = ConstantAmplitude{};
    /// Multiplicative linear ramps [1 + r (t - T/2) / T], applied in order.
    std::vector<double> ramps;

    bool operator==(const AmplitudeShape&) const = default;
};

// ---------------------------------------------------------------------------
// Pulse profile
// ---------------------------------------------------------------------------

struct PulseProfile {
    std::string name;
    double duration = 1.0;
    AmplitudeShape amplitude;
    PhaseProfile phase = PhaseAnsatz{};
    double detuning = 0.0;
    /// Times where the drive is discontinuous; the integration grid hits each exactly.
    std::vector<double> breakpoints;
    /// Free-form provenance record carried through serialisation.
    nlohmann::json provenance = nlohmann::json::object();

    bool operator==(const PulseProfile&) const = default;
};

/// w(x) = -20 x^7 + 70 x^6 - 84 x^5 + 35 x^4 (no clamping).
double smoothstep7(double x);

double eval_smoothstep(const SmoothstepAmplitude& shape, double t, double duration);
double eval_amplitude(const AmplitudeShape& shape, double t, double duration);
double eval_phase(const PhaseAnsatz& ansatz, double t, double duration);
double eval_phase(const PhaseProfile& phase, double t, double duration);

/// Pulse-level shorthands.
double amplitude_at(const PulseProfile& pulse, double t);
double phase_at(const PulseProfile& pulse, double t);

/// Evaluates a pulse with the per-term constants of the phase series
/// precomputed. Results are bit-identical to amplitude_at / phase_at.
/// Holds a reference: `pulse` must outlive the sampler.
class PulseSampler {
public:
    explicit PulseSampler(const PulseProfile& pulse);

    [[nodiscard]] double amplitude(double t) const { return eval_amplitude(pulse_.amplitude, t, pulse_.duration); }
    [[nodiscard]] double phase(double t) const;
    [[nodiscard]] const PulseProfile& pulse() const { return pulse_; }

private:
    struct Term {
        double k;
        double half_tanh_sin;
        double half_tanh_cos;
        double freq_sin;  // k (1 + tanh(A)/2)
        double freq_cos;
        double amp_sin;
        double amp_cos;
    };
    const PulseProfile& pulse_;
    const PhaseAnsatz* ansatz_ = nullptr;
    std::vector<Term> terms_;
};

/// Wraps `shape` in the linear Rabi ramp 1 + ramp (t - T/2) / T.
AmplitudeShape ramped_amplitude(AmplitudeShape shape, double ramp);

/// Throws ContractError when an invariant of the profile is broken.
void validate(const PulseProfile& pulse);

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

enum class PresetName { LevinePichler, TimeOptimal, RobustRect, RobustSmooth };

inline constexpr PresetName kAllPresets[] = {PresetName::LevinePichler, PresetName::TimeOptimal,
                                             PresetName::RobustRect, PresetName::RobustSmooth};

/// "levine-pichler", "time-optimal", "robust-rect", "robust-smooth".
std::string_view preset_id(PresetName name);

/// Throws ConfigError("unknown preset: ...") for anything else.
PresetName parse_preset_name(std::string_view id);

/// Directory holding the shipped preset JSON files. Honours $RYDCZ_PRESET_DIR.
std::filesystem::path preset_directory();

PulseProfile preset(PresetName name);
PulseProfile preset(PresetName name, const std::filesystem::path& directory);

/// Accepts either a preset id or a path to a pulse JSON file.
PulseProfile resolve_pulse(std::string_view preset_or_path);

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

inline constexpr int kPulseSchemaVersion = 1;

nlohmann::json pulse_to_json(const PulseProfile& pulse);
PulseProfile pulse_from_json(const nlohmann::json& document);
PulseProfile load_pulse(const std::filesystem::path& path);
void save_pulse(const PulseProfile& pulse, const std::filesystem::path& path);

std::string_view to_string(AnsatzInterpretation interpretation);
AnsatzInterpretation parse_interpretation(std::string_view text);

}  // namespace rydcz
