#include "bornlab/bornlab.h"

#include <fstream>
#include <sstream>
#include <string>

#include "bornlab/scenario.hpp"

struct bornlab_scenario {
    bornlab::Scenario scenario;
    std::string text;
    std::string warnings;
};

struct bornlab_report {
    bornlab::ExecutionReport report;
};

namespace {

thread_local std::string last_error;

bornlab_status fail(bornlab_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <typename F>
bornlab_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return BORNLAB_OK;
    } catch (const bornlab::Error& e) {
        return fail(static_cast<bornlab_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::exception& e) {
        return fail(BORNLAB_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(BORNLAB_INTERNAL_ERROR, "unknown exception");
    }
}

const bornlab::PresetInfo* preset_at(size_t index) {
    const auto& catalog = bornlab::preset_catalog();
    return index < catalog.size() ? &catalog[index] : nullptr;
}

}  // namespace

extern "C" {

const char* bornlab_version(void) { return "0.1.0"; }

const char* bornlab_status_string(bornlab_status status) {
    if (status == BORNLAB_OK) return "Ok";
    if (status == BORNLAB_INTERNAL_ERROR) return "InternalError";
    if (status >= BORNLAB_INVALID_ARGUMENT && status <= BORNLAB_IO_ERROR)
        return bornlab::to_string(static_cast<bornlab::ErrorCode>(static_cast<int>(status)));
    return "Unknown";
}

const char* bornlab_last_error(void) { return last_error.c_str(); }

unsigned bornlab_default_threads(void) { return bornlab::default_thread_count(); }

bornlab_status bornlab_scenario_from_text(const char* text, bornlab_scenario** out) {
    if (!text || !out) return fail(BORNLAB_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new bornlab_scenario{bornlab::parse_scenario(text), {}, {}}; });
}

bornlab_status bornlab_scenario_from_file(const char* path, bornlab_scenario** out) {
    if (!path || !out) return fail(BORNLAB_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(BORNLAB_IO_ERROR, std::string("cannot open scenario file '") + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return guarded([&] {
        try {
            *out = new bornlab_scenario{bornlab::parse_scenario(buffer.str()), {}, {}};
        } catch (const bornlab::Error& e) {
            throw bornlab::Error(e.code(), std::string(path) + ": " + std::string(e.what()).substr(
                                               std::string(bornlab::to_string(e.code())).size() + 2));
        }
    });
}

bornlab_status bornlab_scenario_from_preset(const char* name, bornlab_scenario** out) {
    if (!name || !out) return fail(BORNLAB_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new bornlab_scenario{bornlab::scenario_preset(name), {}, {}}; });
}

void bornlab_scenario_destroy(bornlab_scenario* scenario) { delete scenario; }

bornlab_status bornlab_scenario_set_seed(bornlab_scenario* scenario, uint64_t seed) {
    if (!scenario) return fail(BORNLAB_INVALID_ARGUMENT, "null scenario");
    scenario->scenario.seed = seed;
    return BORNLAB_OK;
}

bornlab_status bornlab_scenario_set_trajectories(bornlab_scenario* scenario, uint64_t trajectories) {
    if (!scenario) return fail(BORNLAB_INVALID_ARGUMENT, "null scenario");
    if (trajectories == 0) return fail(BORNLAB_VALIDATION_ERROR, "trajectories must be >= 1");
    scenario->scenario.trajectories = trajectories;
    return BORNLAB_OK;
}

bornlab_status bornlab_scenario_set_output(bornlab_scenario* scenario, const char* prefix) {
    if (!scenario || !prefix) return fail(BORNLAB_INVALID_ARGUMENT, "null argument");
    scenario->scenario.output = prefix;
    return BORNLAB_OK;
}

const char* bornlab_scenario_name(const bornlab_scenario* scenario) {
    return scenario ? scenario->scenario.name.c_str() : "";
}

const char* bornlab_scenario_mode(const bornlab_scenario* scenario) {
    return scenario ? bornlab::to_string(scenario->scenario.mode) : "";
}

const char* bornlab_scenario_to_text(bornlab_scenario* scenario) {
    if (!scenario) return "";
    scenario->text = bornlab::emit_scenario(scenario->scenario);
    return scenario->text.c_str();
}

const char* bornlab_scenario_warnings(bornlab_scenario* scenario) {
    if (!scenario) return "";
    scenario->warnings.clear();
    try {
        for (const auto& w : bornlab::scenario_warnings(scenario->scenario)) scenario->warnings += w + "\n";
    } catch (const std::exception&) {
        // Invalid operators surface as errors from bornlab_run.
    }
    return scenario->warnings.c_str();
}

bornlab_status bornlab_run(const bornlab_scenario* scenario, unsigned threads, bornlab_report** out) {
    if (!scenario || !out) return fail(BORNLAB_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new bornlab_report{bornlab::execute(scenario->scenario, threads)}; });
}

bornlab_status bornlab_verify(unsigned threads, bornlab_report** out) {
    if (!out) return fail(BORNLAB_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new bornlab_report{bornlab::execute(bornlab::scenario_preset("verify"), threads)}; });
}

int bornlab_report_passed(const bornlab_report* report) { return report && report->report.passed ? 1 : 0; }

const char* bornlab_report_text(const bornlab_report* report) { return report ? report->report.text.c_str() : ""; }

size_t bornlab_report_file_count(const bornlab_report* report) { return report ? report->report.files.size() : 0; }

const char* bornlab_report_file(const bornlab_report* report, size_t index) {
    if (!report || index >= report->report.files.size()) return nullptr;
    return report->report.files[index].c_str();
}

void bornlab_report_destroy(bornlab_report* report) { delete report; }

size_t bornlab_preset_count(void) { return bornlab::preset_catalog().size(); }

const char* bornlab_preset_name(size_t index) {
    const auto* p = preset_at(index);
    return p ? p->name.c_str() : nullptr;
}

const char* bornlab_preset_kind(size_t index) {
    const auto* p = preset_at(index);
    return p ? p->kind.c_str() : nullptr;
}

const char* bornlab_preset_description(size_t index) {
    const auto* p = preset_at(index);
    return p ? p->description.c_str() : nullptr;
}

bornlab_status bornlab_born_probabilities(size_t dim, const double* matrix, const double* state, double* eigenvalues,
                                          double* probabilities, size_t capacity, size_t* count) {
    if (dim == 0 || !matrix || !state || !count) return fail(BORNLAB_INVALID_ARGUMENT, "null argument or zero dimension");
    return guarded([&] {
        const auto n = static_cast<bornlab::Index>(dim);
        bornlab::ComplexMatrix m(n, n);
        for (bornlab::Index i = 0; i < n; ++i)
            for (bornlab::Index j = 0; j < n; ++j) {
                const size_t k = 2 * (static_cast<size_t>(i) * dim + static_cast<size_t>(j));
                m(i, j) = bornlab::Complex(matrix[k], matrix[k + 1]);
            }
        bornlab::ComplexVector v(n);
        for (bornlab::Index i = 0; i < n; ++i) v[i] = bornlab::Complex(state[2 * i], state[2 * i + 1]);
        const auto outcomes =
            bornlab::born_probabilities(bornlab::StateVector::normalized(v), bornlab::spectral_decompose(m));
        *count = outcomes.size();
        if (outcomes.size() > capacity || (capacity > 0 && (!eigenvalues || !probabilities))) {
            throw bornlab::Error(bornlab::ErrorCode::InvalidArgument, "output buffers too small");
        }
        for (size_t k = 0; k < outcomes.size(); ++k) {
            eigenvalues[k] = outcomes[k].eigenvalue;
            probabilities[k] = outcomes[k].probability;
        }
    });
}

}  // extern "C"
