// scenario.hpp
// Scenario documents (JSON, schema version 1), built-in presets, and the
// dispatcher that runs a scenario and writes its CSV/JSONL outputs.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bornlab/ensemble.hpp"
#include "bornlab/histories.hpp"
#include "bornlab/sde.hpp"

namespace bornlab {

inline constexpr int kScenarioSchemaVersion = 1;

enum class Mode { Simulate, Ensemble, Scaling, Histories, Verify };

const char* to_string(Mode mode) noexcept;

// A preset name or an explicit row-major list of entries.
using OperatorRef = std::variant<std::string, std::vector<Complex>>;
// A preset name or an explicit amplitude list (normalized on use).
using StateRef = std::variant<std::string, std::vector<Complex>>;

struct HistorySlot {
    double time = 0.0;  // propagation time under H since the previous slot
    // Exactly one of: spectral projectors of an observable, or explicit projectors.
    std::optional<OperatorRef> family;
    std::vector<std::vector<Complex>> projectors;

    bool operator==(const HistorySlot&) const = default;
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::string name = "scenario";
    Mode mode = Mode::Ensemble;
    int hilbert_dim = 2;
    OperatorRef hamiltonian = std::string("zero");
    std::vector<OperatorRef> collapse_ops;
    bool include_hamiltonian = true;
    double sigma = 1.0;
    double dt = 1e-3;
    double t_max = 100.0;
    double epsilon = 1e-6;
    std::uint64_t trajectories = 1000;
    std::uint64_t seed = 0;
    StateRef initial_state = std::string("ground");
    std::uint64_t sample_stride = 100;
    double record_until = 0.0;
    std::string output;  // path prefix; empty means `name`
    std::vector<double> energy_scales;  // scaling mode
    std::vector<HistorySlot> history_slots;  // histories mode

    bool operator==(const Scenario&) const = default;
};

// Throws ParseError (with line/column or field name) for malformed
// documents and ValidationError listing every violated constraint.
Scenario parse_scenario(const std::string& text);
std::string emit_scenario(const Scenario& scenario);

// Constraint violations; empty when the scenario is valid.
std::vector<std::string> validate_scenario(const Scenario& scenario);
// Non-fatal diagnostics, e.g. a degenerate Hamiltonian in an energy-driven run.
std::vector<std::string> scenario_warnings(const Scenario& scenario);

struct PresetInfo {
    std::string name;
    std::string kind;  // "scenario", "operator", "collapse", "state"
    std::string description;
};

const std::vector<PresetInfo>& preset_catalog();
// Built-in scenario documents.
Scenario scenario_preset(const std::string& name);

ComplexMatrix resolve_operator(const OperatorRef& ref, int dim, const ComplexMatrix* hamiltonian = nullptr);
std::vector<ComplexMatrix> resolve_collapse_ops(const std::vector<OperatorRef>& refs, int dim,
                                                const ComplexMatrix& hamiltonian);
StateVector resolve_state(const StateRef& ref, int dim);
StochasticProcessSpec build_process(const Scenario& scenario);

struct ExecutionReport {
    bool passed = true;  // false on module errors or failed verify properties
    std::string text;
    std::vector<std::string> files;
};

// Runs the scenario, writing outputs under its output prefix.
ExecutionReport execute(const Scenario& scenario, unsigned threads = 0);

// Plot data writers. Each writes plain CSV with a header row and returns the path.
std::string emit_weight_curves(const std::vector<WeightCurve>& curves, const std::string& prefix);
std::string emit_born_bars(const EnsembleSummary& summary, const std::string& prefix);
std::string emit_outcomes(const EnsembleSummary& summary, const std::string& prefix);
std::string emit_scaling(const ScalingFit& fit, const std::string& prefix);  // points + fit row
std::string emit_scaling_fit(const ScalingFit& fit, const std::string& prefix);
std::string emit_trajectory_jsonl(const TrajectoryRecord& record, const std::string& prefix);
std::string emit_summary_json(const EnsembleSummary& summary, const std::optional<LindbladComparison>& lindblad,
                              const std::optional<ChiSquareResult>& chi, const std::string& prefix);

// Property suite behind `verify`.
struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<PropertyResult> run_verify_suite(unsigned threads = 0);

}  // namespace bornlab
