/* bornlab.h
 * C interface to the bornlab simulation library. Every call that can fail
 * returns a bornlab_status; the message of the most recent failure on the
 * calling thread is available from bornlab_last_error(). Strings returned by
 * accessors are owned by the object they came from. */

#ifndef BORNLAB_H
#define BORNLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define BORNLAB_API __declspec(dllexport)
#else
#define BORNLAB_API __attribute__((visibility("default")))
#endif

typedef enum bornlab_status {
    BORNLAB_OK = 0,
    BORNLAB_INVALID_ARGUMENT = 1,
    BORNLAB_DIMENSION_MISMATCH,
    BORNLAB_NOT_HERMITIAN,
    BORNLAB_NOT_UNITARY,
    BORNLAB_NOT_ORTHOGONAL,
    BORNLAB_ZERO_PROBABILITY_OUTCOME,
    BORNLAB_ANTIPODAL_AMBIGUITY,
    BORNLAB_NUMERICAL_RESIDUE,
    BORNLAB_STEP_REJECTED,
    BORNLAB_POSITIVITY_LOST,
    BORNLAB_INSUFFICIENT_RESOLVED,
    BORNLAB_UNRESOLVED_PRESENT,
    BORNLAB_INVALID_PROJECTOR,
    BORNLAB_INCOMPLETE_FAMILY,
    BORNLAB_PARSE_ERROR,
    BORNLAB_VALIDATION_ERROR,
    BORNLAB_IO_ERROR,
    BORNLAB_INTERNAL_ERROR = 100
} bornlab_status;

typedef struct bornlab_scenario bornlab_scenario;
typedef struct bornlab_report bornlab_report;

BORNLAB_API const char* bornlab_version(void);
BORNLAB_API const char* bornlab_status_string(bornlab_status status);
BORNLAB_API const char* bornlab_last_error(void);
/* BORNLAB_THREADS if set, otherwise the hardware concurrency. */
BORNLAB_API unsigned bornlab_default_threads(void);

BORNLAB_API bornlab_status bornlab_scenario_from_text(const char* text, bornlab_scenario** out);
BORNLAB_API bornlab_status bornlab_scenario_from_file(const char* path, bornlab_scenario** out);
BORNLAB_API bornlab_status bornlab_scenario_from_preset(const char* name, bornlab_scenario** out);
BORNLAB_API void bornlab_scenario_destroy(bornlab_scenario* scenario);

BORNLAB_API bornlab_status bornlab_scenario_set_seed(bornlab_scenario* scenario, uint64_t seed);
BORNLAB_API bornlab_status bornlab_scenario_set_trajectories(bornlab_scenario* scenario, uint64_t trajectories);
BORNLAB_API bornlab_status bornlab_scenario_set_output(bornlab_scenario* scenario, const char* prefix);
BORNLAB_API const char* bornlab_scenario_name(const bornlab_scenario* scenario);
BORNLAB_API const char* bornlab_scenario_mode(const bornlab_scenario* scenario);
/* Scenario document text; owned by the scenario, valid until the next call on it. */
BORNLAB_API const char* bornlab_scenario_to_text(bornlab_scenario* scenario);
/* Newline-separated warnings (possibly empty); owned by the scenario. */
BORNLAB_API const char* bornlab_scenario_warnings(bornlab_scenario* scenario);

/* threads = 0 selects bornlab_default_threads(). */
BORNLAB_API bornlab_status bornlab_run(const bornlab_scenario* scenario, unsigned threads, bornlab_report** out);
BORNLAB_API bornlab_status bornlab_verify(unsigned threads, bornlab_report** out);
BORNLAB_API int bornlab_report_passed(const bornlab_report* report);
BORNLAB_API const char* bornlab_report_text(const bornlab_report* report);
BORNLAB_API size_t bornlab_report_file_count(const bornlab_report* report);
BORNLAB_API const char* bornlab_report_file(const bornlab_report* report, size_t index);
BORNLAB_API void bornlab_report_destroy(bornlab_report* report);

BORNLAB_API size_t bornlab_preset_count(void);
BORNLAB_API const char* bornlab_preset_name(size_t index);
BORNLAB_API const char* bornlab_preset_kind(size_t index);
BORNLAB_API const char* bornlab_preset_description(size_t index);

/* Born probabilities of a state for a self-adjoint matrix, one entry per
 * distinct eigenvalue in ascending order. matrix is row-major interleaved
 * (re, im) of length 2*dim*dim; state is interleaved of length 2*dim.
 * capacity is the length of eigenvalues/probabilities; *count receives the
 * number of outcomes. */
BORNLAB_API bornlab_status bornlab_born_probabilities(size_t dim, const double* matrix, const double* state,
                                                      double* eigenvalues, double* probabilities, size_t capacity,
                                                      size_t* count);

#ifdef __cplusplus
}
#endif

#endif
