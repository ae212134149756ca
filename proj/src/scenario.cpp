#include "bornlab/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bornlab {

using json = nlohmann::json;

const char* to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::Simulate: return "simulate";
        case Mode::Ensemble: return "ensemble";
        case Mode::Scaling: return "scaling";
        case Mode::Histories: return "histories";
        case Mode::Verify: return "verify";
    }
    return "unknown";
}

namespace {

constexpr double kLocalizationWidth = 2.0;

const std::set<std::string> kKnownFields = {
    "schema_version", "name", "mode", "hilbert_dim", "hamiltonian", "collapse_ops", "include_hamiltonian",
    "sigma", "dt", "t_max", "epsilon", "trajectories", "seed", "initial_state", "sample_stride",
    "record_until", "output", "energy_scales", "histories"};

std::optional<Mode> mode_from_string(const std::string& s) {
    for (Mode m : {Mode::Simulate, Mode::Ensemble, Mode::Scaling, Mode::Histories, Mode::Verify})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

Complex parse_complex(const json& j, const std::string& field) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        field_error(field, "expected a complex number as [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Complex> parse_complex_list(const json& j, const std::string& field) {
    if (!j.is_array()) field_error(field, "expected a list of [re, im] pairs");
    std::vector<Complex> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_complex(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

OperatorRef parse_operator(const json& j, const std::string& field) {
    if (j.is_string()) return j.get<std::string>();
    return parse_complex_list(j, field);
}

json complex_list_json(const std::vector<Complex>& values) {
    json out = json::array();
    for (const Complex& c : values) out.push_back({c.real(), c.imag()});
    return out;
}

json ref_json(const std::variant<std::string, std::vector<Complex>>& ref) {
    if (const auto* name = std::get_if<std::string>(&ref)) return *name;
    return complex_list_json(std::get<std::vector<Complex>>(ref));
}

double get_number(const json& doc, const char* field, double fallback) {
    if (!doc.contains(field)) return fallback;
    const json& j = doc.at(field);
    if (!j.is_number()) field_error(field, "expected a number");
    return j.get<double>();
}

std::uint64_t get_count(const json& doc, const char* field, std::uint64_t fallback) {
    if (!doc.contains(field)) return fallback;
    const json& j = doc.at(field);
    if (!j.is_number_integer()) field_error(field, "expected a non-negative integer");
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const auto v = j.get<std::int64_t>();
    if (v < 0) field_error(field, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::string get_string(const json& doc, const char* field, const std::string& fallback) {
    if (!doc.contains(field)) return fallback;
    const json& j = doc.at(field);
    if (!j.is_string()) field_error(field, "expected a string");
    return j.get<std::string>();
}

// ------------------------------------------------------------------ presets

struct OperatorPreset {
    const char* name;
    const char* description;
    int required_dim;  // 0 = any
};

constexpr OperatorPreset kOperatorPresets[] = {
    {"zero", "zero operator", 0},
    {"identity", "identity operator", 0},
    {"pauli-x", "Pauli sigma_x", 2},
    {"pauli-y", "Pauli sigma_y", 2},
    {"pauli-z", "Pauli sigma_z = diag(1, -1)", 2},
    {"qubit-gap", "diag(0, 1): two levels with unit gap", 2},
    {"ladder", "diag(0, 1, ..., d-1): equally spaced nondegenerate levels", 0},
    {"hopping", "nearest-neighbour chain -sum_k (|k><k+1| + |k+1><k|)", 0},
};

constexpr OperatorPreset kCollapsePresets[] = {
    {"hamiltonian", "A = H (energy-driven process)", 0},
    {"lattice-localization",
     "d operators A_j = diag(exp(-(k - j)^2 / (2 l^2))), l = 2, one per chain site", 0},
};

constexpr OperatorPreset kStatePresets[] = {
    {"ground", "basis state |0>", 0},
    {"excited", "basis state |d-1>", 0},
    {"uniform", "equal-weight superposition of all basis states", 0},
    {"plus-x", "(|0> + |1>) / sqrt(2)", 2},
};

struct ScenarioPresetEntry {
    const char* name;
    const char* description;
};

constexpr ScenarioPresetEntry kScenarioPresets[] = {
    {"energy-driven-qubit", "ensemble: A = H = diag(0, 1), psi0 = (sqrt 0.3, sqrt 0.7); Born frequencies and Lindblad mean"},
    {"single-trajectory", "simulate: one energy-driven qubit trajectory streamed as JSONL"},
    {"stern-gerlach", "ensemble: spin-1/2 in |+x> reduced by A = sigma_z, stochastic terms only"},
    {"lattice-localization", "ensemble: 6-site chain reduced by Gaussian localization operators, stochastic terms only"},
    {"reduction-scaling", "scaling: qubit gaps {0.5, 1, 2}, median reduction time against energy dispersion"},
    {"histories-demo", "histories: sigma_z, sigma_z, sigma_x histories of a precessing spin"},
    {"verify", "verify: run the built-in property suite"},
};

bool is_preset(const auto& table, const std::string& name) {
    for (const auto& p : table)
        if (name == p.name) return true;
    return false;
}

int preset_dim(const auto& table, const std::string& name) {
    for (const auto& p : table)
        if (name == p.name) return p.required_dim;
    return 0;
}

ComplexMatrix operator_preset(const std::string& name, int dim) {
    const Index n = dim;
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    if (name == "zero") return m;
    if (name == "identity") return ComplexMatrix::Identity(n, n);
    if (name == "pauli-x") {
        m(0, 1) = m(1, 0) = 1.0;
        return m;
    }
    if (name == "pauli-y") {
        m(0, 1) = Complex(0.0, -1.0);
        m(1, 0) = Complex(0.0, 1.0);
        return m;
    }
    if (name == "pauli-z") {
        m(0, 0) = 1.0;
        m(1, 1) = -1.0;
        return m;
    }
    if (name == "qubit-gap") {
        m(1, 1) = 1.0;
        return m;
    }
    if (name == "ladder") {
        for (Index k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
        return m;
    }
    if (name == "hopping") {
        for (Index k = 0; k + 1 < n; ++k) m(k, k + 1) = m(k + 1, k) = -1.0;
        return m;
    }
    throw Error(ErrorCode::ValidationError, "unknown operator preset '" + name + "'");
}

std::string dim_problem(const auto& table, const std::string& name, int dim, const std::string& where) {
    const int need = preset_dim(table, name);
    if (need != 0 && need != dim) {
        return where + ": preset '" + name + "' requires hilbert_dim " + std::to_string(need) + ", scenario has " +
               std::to_string(dim);
    }
    return {};
}

void check_operator_ref(const OperatorRef& ref, int dim, const std::string& where, bool hermitian,
                        std::vector<std::string>& problems) {
    if (const auto* name = std::get_if<std::string>(&ref)) {
        if (!is_preset(kOperatorPresets, *name)) {
            problems.push_back(where + ": unknown operator preset '" + *name + "'");
            return;
        }
        if (auto p = dim_problem(kOperatorPresets, *name, dim, where); !p.empty()) problems.push_back(p);
        return;
    }
    const auto& entries = std::get<std::vector<Complex>>(ref);
    const std::size_t want = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    if (entries.size() != want) {
        problems.push_back(where + ": explicit matrix has " + std::to_string(entries.size()) + " entries, hilbert_dim " +
                           std::to_string(dim) + " needs " + std::to_string(want));
        return;
    }
    if (hermitian) {
        ComplexMatrix m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i * dim + j)];
        if (!m.allFinite()) problems.push_back(where + ": matrix has non-finite entries");
        else if (hermiticity_defect(m) > 1e-10) problems.push_back(where + ": matrix is not self-adjoint");
    }
}

}  // namespace

// ----------------------------------------------------------------- parsing

Scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream os;
        os << "line " << line << " column " << column << ": " << e.what();
        throw Error(ErrorCode::ParseError, os.str());
    }
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "line 1 column 1: scenario must be a JSON object");

    std::vector<std::string> problems;
    for (const auto& [key, value] : doc.items())
        if (!kKnownFields.count(key)) problems.push_back("unknown field '" + key + "'");

    Scenario s;
    if (!doc.contains("schema_version")) problems.push_back("missing required field 'schema_version'");
    else s.schema_version = static_cast<int>(get_count(doc, "schema_version", 0));

    if (!doc.contains("mode")) {
        problems.push_back("missing required field 'mode'");
    } else {
        const std::string mode = get_string(doc, "mode", "");
        if (auto m = mode_from_string(mode)) s.mode = *m;
        else problems.push_back("field 'mode': unknown mode '" + mode + "'");
    }
    s.name = get_string(doc, "name", s.name);
    const bool numeric_run = s.mode != Mode::Verify;
    if (doc.contains("hilbert_dim")) s.hilbert_dim = static_cast<int>(get_count(doc, "hilbert_dim", 2));
    else if (numeric_run) problems.push_back("missing required field 'hilbert_dim'");

    if (doc.contains("hamiltonian")) s.hamiltonian = parse_operator(doc.at("hamiltonian"), "hamiltonian");
    else if (numeric_run) problems.push_back("missing required field 'hamiltonian'");

    if (doc.contains("collapse_ops")) {
        const json& ops = doc.at("collapse_ops");
        if (!ops.is_array()) field_error("collapse_ops", "expected a list of presets or matrices");
        for (std::size_t i = 0; i < ops.size(); ++i)
            s.collapse_ops.push_back(parse_operator(ops[i], "collapse_ops[" + std::to_string(i) + "]"));
    }
    if (doc.contains("include_hamiltonian")) {
        if (!doc.at("include_hamiltonian").is_boolean()) field_error("include_hamiltonian", "expected true or false");
        s.include_hamiltonian = doc.at("include_hamiltonian").get<bool>();
    }
    s.sigma = get_number(doc, "sigma", s.sigma);
    s.dt = get_number(doc, "dt", s.dt);
    s.t_max = get_number(doc, "t_max", s.t_max);
    s.epsilon = get_number(doc, "epsilon", s.epsilon);
    s.trajectories = get_count(doc, "trajectories", s.trajectories);
    s.seed = get_count(doc, "seed", s.seed);
    s.sample_stride = get_count(doc, "sample_stride", s.sample_stride);
    s.record_until = get_number(doc, "record_until", s.record_until);
    s.output = get_string(doc, "output", s.output);

    if (doc.contains("initial_state")) {
        const json& j = doc.at("initial_state");
        if (j.is_string()) s.initial_state = j.get<std::string>();
        else s.initial_state = parse_complex_list(j, "initial_state");
    } else if (numeric_run && s.mode != Mode::Histories) {
        problems.push_back("missing required field 'initial_state'");
    }

    if (doc.contains("energy_scales")) {
        const json& j = doc.at("energy_scales");
        if (!j.is_array()) field_error("energy_scales", "expected a list of numbers");
        for (const auto& v : j) {
            if (!v.is_number()) field_error("energy_scales", "expected a list of numbers");
            s.energy_scales.push_back(v.get<double>());
        }
    }
    if (doc.contains("histories")) {
        const json& h = doc.at("histories");
        if (!h.is_object() || !h.contains("slots") || !h.at("slots").is_array()) {
            field_error("histories", "expected {\"slots\": [...]}");
        }
        const json& slots = h.at("slots");
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const std::string where = "histories.slots[" + std::to_string(i) + "]";
            const json& slot = slots[i];
            if (!slot.is_object()) field_error(where, "expected an object");
            HistorySlot hs;
            hs.time = get_number(slot, "time", 0.0);
            if (slot.contains("family")) hs.family = parse_operator(slot.at("family"), where + ".family");
            if (slot.contains("projectors")) {
                const json& ps = slot.at("projectors");
                if (!ps.is_array()) field_error(where + ".projectors", "expected a list of matrices");
                for (std::size_t k = 0; k < ps.size(); ++k)
                    hs.projectors.push_back(parse_complex_list(ps[k], where + ".projectors[" + std::to_string(k) + "]"));
            }
            s.history_slots.push_back(std::move(hs));
        }
    }

    for (auto& p : validate_scenario(s)) problems.push_back(std::move(p));
    if (!problems.empty()) {
        std::ostringstream os;
        os << problems.size() << " problem(s):";
        for (const auto& p : problems) os << "\n  - " << p;
        throw Error(ErrorCode::ValidationError, os.str());
    }
    return s;
}

std::string emit_scenario(const Scenario& s) {
    json doc = json::object();
    doc["schema_version"] = s.schema_version;
    doc["name"] = s.name;
    doc["mode"] = to_string(s.mode);
    doc["hilbert_dim"] = s.hilbert_dim;
    doc["hamiltonian"] = ref_json(s.hamiltonian);
    json ops = json::array();
    for (const auto& op : s.collapse_ops) ops.push_back(ref_json(op));
    doc["collapse_ops"] = ops;
    doc["include_hamiltonian"] = s.include_hamiltonian;
    doc["sigma"] = s.sigma;
    doc["dt"] = s.dt;
    doc["t_max"] = s.t_max;
    doc["epsilon"] = s.epsilon;
    doc["trajectories"] = s.trajectories;
    doc["seed"] = s.seed;
    doc["initial_state"] = ref_json(s.initial_state);
    doc["sample_stride"] = s.sample_stride;
    doc["record_until"] = s.record_until;
    doc["output"] = s.output;
    doc["energy_scales"] = s.energy_scales;
    json slots = json::array();
    for (const auto& hs : s.history_slots) {
        json slot = {{"time", hs.time}};
        if (hs.family) slot["family"] = ref_json(*hs.family);
        if (!hs.projectors.empty()) {
            json ps = json::array();
            for (const auto& p : hs.projectors) ps.push_back(complex_list_json(p));
            slot["projectors"] = ps;
        }
        slots.push_back(slot);
    }
    doc["histories"] = {{"slots", slots}};
    return doc.dump(2) + "\n";
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> problems;
    if (s.schema_version != kScenarioSchemaVersion) {
        problems.push_back("schema_version " + std::to_string(s.schema_version) + " is not supported (expected " +
                           std::to_string(kScenarioSchemaVersion) + ")");
    }
    if (s.mode == Mode::Verify) return problems;

    const int dim = s.hilbert_dim;
    if (dim < 1 || dim > 64) {
        problems.push_back("hilbert_dim must lie in [1, 64], got " + std::to_string(dim));
        return problems;
    }
    check_operator_ref(s.hamiltonian, dim, "hamiltonian", true, problems);

    const bool stochastic = s.mode == Mode::Simulate || s.mode == Mode::Ensemble || s.mode == Mode::Scaling;
    if (stochastic && s.collapse_ops.empty()) problems.push_back("collapse_ops must name at least one operator");
    for (std::size_t i = 0; i < s.collapse_ops.size(); ++i) {
        const std::string where = "collapse_ops[" + std::to_string(i) + "]";
        const OperatorRef& ref = s.collapse_ops[i];
        if (const auto* name = std::get_if<std::string>(&ref); name && is_preset(kCollapsePresets, *name)) continue;
        check_operator_ref(ref, dim, where, true, problems);
    }

    if (const auto* name = std::get_if<std::string>(&s.initial_state)) {
        if (!is_preset(kStatePresets, *name)) problems.push_back("initial_state: unknown state preset '" + *name + "'");
        else if (auto p = dim_problem(kStatePresets, *name, dim, "initial_state"); !p.empty()) problems.push_back(p);
    } else {
        const auto& amps = std::get<std::vector<Complex>>(s.initial_state);
        if (amps.size() != static_cast<std::size_t>(dim)) {
            problems.push_back("initial_state has " + std::to_string(amps.size()) + " amplitudes, hilbert_dim is " +
                               std::to_string(dim));
        } else {
            double norm = 0.0;
            for (const Complex& c : amps) norm += std::norm(c);
            if (!(norm > 0.0) || !std::isfinite(norm)) problems.push_back("initial_state must be a nonzero finite vector");
        }
    }

    if (!(s.sigma >= 0.0) || !std::isfinite(s.sigma)) problems.push_back("sigma must be finite and >= 0");
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) problems.push_back("dt must be finite and > 0");
    if (!(s.t_max > 0.0) || !std::isfinite(s.t_max)) problems.push_back("t_max must be finite and > 0");
    if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) problems.push_back("epsilon must lie in (0, 1)");
    if (s.trajectories < 1) problems.push_back("trajectories must be >= 1");
    if (s.sample_stride < 1) problems.push_back("sample_stride must be >= 1");
    if (!(s.record_until >= 0.0) || s.record_until > s.t_max) problems.push_back("record_until must lie in [0, t_max]");

    if (s.mode == Mode::Scaling) {
        std::set<double> distinct;
        for (double e : s.energy_scales) {
            if (!(e > 0.0) || !std::isfinite(e)) problems.push_back("energy_scales entries must be finite and > 0");
            distinct.insert(e);
        }
        if (distinct.size() < 3) {
            problems.push_back("scaling needs at least 3 distinct energy_scales (Delta E points), got " +
                               std::to_string(distinct.size()));
        }
    }
    if (s.mode == Mode::Histories) {
        if (s.history_slots.empty()) problems.push_back("histories mode needs at least one slot");
        for (std::size_t i = 0; i < s.history_slots.size(); ++i) {
            const auto& hs = s.history_slots[i];
            const std::string where = "histories.slots[" + std::to_string(i) + "]";
            if (!(hs.time >= 0.0) || !std::isfinite(hs.time)) problems.push_back(where + ": time must be >= 0");
            if (hs.family.has_value() == !hs.projectors.empty()) {
                problems.push_back(where + ": give exactly one of 'family' or 'projectors'");
            }
            if (hs.family) check_operator_ref(*hs.family, dim, where + ".family", true, problems);
            for (std::size_t k = 0; k < hs.projectors.size(); ++k)
                check_operator_ref(hs.projectors[k], dim, where + ".projectors[" + std::to_string(k) + "]", true,
                                   problems);
        }
    }
    return problems;
}

std::vector<std::string> scenario_warnings(const Scenario& s) {
    std::vector<std::string> warnings;
    if (s.mode != Mode::Ensemble && s.mode != Mode::Scaling) return warnings;
    bool energy_driven = false;
    for (const auto& ref : s.collapse_ops)
        if (const auto* name = std::get_if<std::string>(&ref); name && *name == "hamiltonian") energy_driven = true;
    if (!energy_driven) return warnings;
    const HermitianObservable h = spectral_decompose(resolve_operator(s.hamiltonian, s.hilbert_dim));
    if (h.is_degenerate()) {
        warnings.push_back("energy-driven run with a degenerate Hamiltonian: reduction is only to eigenspaces, and "
                           "outcome frequencies refer to eigenspace projectors");
    }
    return warnings;
}

const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> catalog = [] {
        std::vector<PresetInfo> out;
        for (const auto& p : kScenarioPresets) out.push_back({p.name, "scenario", p.description});
        for (const auto& p : kOperatorPresets) out.push_back({p.name, "operator", p.description});
        for (const auto& p : kCollapsePresets) out.push_back({p.name, "collapse", p.description});
        for (const auto& p : kStatePresets) out.push_back({p.name, "state", p.description});
        return out;
    }();
    return catalog;
}

Scenario scenario_preset(const std::string& name) {
    Scenario s;
    s.name = name;
    s.output = name;
    if (name == "energy-driven-qubit" || name == "single-trajectory") {
        s.mode = name == "single-trajectory" ? Mode::Simulate : Mode::Ensemble;
        s.hilbert_dim = 2;
        s.hamiltonian = std::string("qubit-gap");
        s.collapse_ops = {std::string("hamiltonian")};
        s.sigma = 1.0;
        s.dt = 1e-3;
        s.t_max = 200.0;
        s.trajectories = 2000;
        s.seed = 42;
        s.initial_state = std::vector<Complex>{std::sqrt(0.3), std::sqrt(0.7)};
        s.sample_stride = 500;
        s.record_until = 10.0;
        if (s.mode == Mode::Simulate) {
            s.sample_stride = 100;
            s.record_until = 0.0;
        }
        return s;
    }
    if (name == "stern-gerlach") {
        s.mode = Mode::Ensemble;
        s.hilbert_dim = 2;
        s.hamiltonian = std::string("zero");
        s.collapse_ops = {std::string("pauli-z")};
        s.include_hamiltonian = false;
        s.sigma = 1.0;
        s.t_max = 100.0;
        s.trajectories = 1000;
        s.seed = 1;
        s.initial_state = std::string("plus-x");
        s.sample_stride = 250;
        s.record_until = 5.0;
        return s;
    }
    if (name == "lattice-localization") {
        s.mode = Mode::Ensemble;
        s.hilbert_dim = 6;
        s.hamiltonian = std::string("hopping");
        s.collapse_ops = {std::string("lattice-localization")};
        s.include_hamiltonian = false;
        s.sigma = 4.0;
        s.dt = 1e-3;
        s.t_max = 100.0;
        s.epsilon = 1e-4;
        s.trajectories = 200;
        s.seed = 3;
        s.initial_state = std::string("uniform");
        s.sample_stride = 500;
        s.record_until = 5.0;
        return s;
    }
    if (name == "reduction-scaling") {
        s.mode = Mode::Scaling;
        s.hilbert_dim = 2;
        s.hamiltonian = std::string("qubit-gap");
        s.collapse_ops = {std::string("hamiltonian")};
        s.sigma = 1.0;
        s.dt = 1e-3;
        s.t_max = 1000.0;
        s.trajectories = 1000;
        s.seed = 7;
        s.initial_state = std::string("uniform");
        s.energy_scales = {0.5, 1.0, 2.0};
        return s;
    }
    if (name == "histories-demo") {
        s.mode = Mode::Histories;
        s.hilbert_dim = 2;
        s.hamiltonian = std::string("pauli-x");
        s.initial_state = std::string("ground");
        const double quarter = std::numbers::pi / 8.0;
        s.history_slots = {HistorySlot{0.0, OperatorRef(std::string("pauli-z")), {}},
                           HistorySlot{quarter, OperatorRef(std::string("pauli-z")), {}},
                           HistorySlot{quarter, OperatorRef(std::string("pauli-x")), {}}};
        return s;
    }
    if (name == "verify") {
        s.mode = Mode::Verify;
        return s;
    }
    throw Error(ErrorCode::ValidationError, "unknown scenario preset '" + name + "'");
}

// ---------------------------------------------------------------- resolving

ComplexMatrix resolve_operator(const OperatorRef& ref, int dim, const ComplexMatrix* hamiltonian) {
    if (const auto* name = std::get_if<std::string>(&ref)) {
        if (*name == "hamiltonian") {
            if (!hamiltonian) throw Error(ErrorCode::ValidationError, "'hamiltonian' is only valid as a collapse operator");
            return *hamiltonian;
        }
        if (auto p = dim_problem(kOperatorPresets, *name, dim, "operator"); !p.empty()) {
            throw Error(ErrorCode::ValidationError, p);
        }
        return operator_preset(*name, dim);
    }
    const auto& entries = std::get<std::vector<Complex>>(ref);
    if (entries.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim)) {
        throw Error(ErrorCode::DimensionMismatch, "explicit matrix size does not match hilbert_dim");
    }
    ComplexMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i * dim + j)];
    return m;
}

std::vector<ComplexMatrix> resolve_collapse_ops(const std::vector<OperatorRef>& refs, int dim,
                                                const ComplexMatrix& hamiltonian) {
    std::vector<ComplexMatrix> out;
    for (const auto& ref : refs) {
        if (const auto* name = std::get_if<std::string>(&ref); name && *name == "lattice-localization") {
            // Gaussian localization around each site of a unit-spaced chain.
            for (int j = 0; j < dim; ++j) {
                ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
                for (int k = 0; k < dim; ++k) {
                    const double d = static_cast<double>(k - j);
                    a(k, k) = std::exp(-d * d / (2.0 * kLocalizationWidth * kLocalizationWidth));
                }
                out.push_back(std::move(a));
            }
            continue;
        }
        out.push_back(resolve_operator(ref, dim, &hamiltonian));
    }
    return out;
}

StateVector resolve_state(const StateRef& ref, int dim) {
    if (const auto* name = std::get_if<std::string>(&ref)) {
        if (*name == "ground") return StateVector::basis(dim, 0);
        if (*name == "excited") return StateVector::basis(dim, dim - 1);
        if (*name == "uniform") return StateVector::normalized(ComplexVector::Ones(dim));
        if (*name == "plus-x") {
            if (dim != 2) throw Error(ErrorCode::ValidationError, "state preset 'plus-x' requires hilbert_dim 2");
            return StateVector::normalized(ComplexVector::Ones(2));
        }
        throw Error(ErrorCode::ValidationError, "unknown state preset '" + *name + "'");
    }
    const auto& amps = std::get<std::vector<Complex>>(ref);
    if (amps.size() != static_cast<std::size_t>(dim)) {
        throw Error(ErrorCode::DimensionMismatch, "initial_state length does not match hilbert_dim");
    }
    return StateVector::from_list(amps);
}

StochasticProcessSpec build_process(const Scenario& s) {
    const ComplexMatrix h = resolve_operator(s.hamiltonian, s.hilbert_dim);
    StochasticProcessSpec spec;
    spec.hamiltonian = spectral_decompose(h);
    for (const auto& a : resolve_collapse_ops(s.collapse_ops, s.hilbert_dim, h))
        spec.collapse_ops.push_back(spectral_decompose(a));
    spec.sigma = s.sigma;
    spec.dt = s.dt;
    spec.include_hamiltonian = s.include_hamiltonian;
    spec.seed = s.seed;
    spec.validate();
    return spec;
}

}  // namespace bornlab
