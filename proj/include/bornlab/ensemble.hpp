// ensemble.hpp
// Monte Carlo ensembles of stochastic trajectories and the statistics used to
// compare them with Born-rule predictions and with the Lindblad mean.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bornlab/hilbert.hpp"
#include "bornlab/lindblad.hpp"
#include "bornlab/sde.hpp"

namespace bornlab {

// Worker count from BORNLAB_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

struct EnsembleOptions {
    std::size_t trajectories = 1000;
    double t_max = 100.0;
    // epsilon, sample stride, common recording horizon, noise refinement
    TrajectoryOptions trajectory;
    unsigned threads = 0;  // 0 selects default_thread_count()
    std::size_t bootstrap_resamples = 200;
    // Keep full <P_n>(t) curves for this many leading trajectories.
    std::size_t weight_curves = 0;
};

struct TrajectoryOutcome {
    std::size_t index = 0;
    std::optional<std::size_t> outcome;
    std::optional<double> hitting_time;
};

struct TrajectoryFailure {
    std::size_t index = 0;
    ErrorCode code = ErrorCode::InvalidArgument;
    std::string message;
};

struct WeightCurve {
    std::size_t index = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> weights;
};

struct EnsembleSummary {
    std::uint64_t seed = 0;
    std::size_t n_trajectories = 0;  // completed trajectories; failures excluded
    std::vector<double> eigenvalues;  // pointer observable spectrum
    std::map<std::size_t, std::size_t> outcome_counts;
    std::size_t unresolved = 0;
    std::vector<double> born_prediction;  // <psi0|P_e|psi0>, indexed like eigenvalues

    // Common time grid (multiples of sample_stride * dt up to record_until).
    std::vector<double> sample_times;
    std::vector<DensityMatrix> mean_density;
    std::vector<Eigen::MatrixXd> mean_density_stderr;  // bootstrap, entrywise |.|
    std::vector<std::vector<double>> mean_weights;
    std::vector<std::vector<double>> weights_stderr;
    std::vector<double> mean_energy;  // E[<H>]
    std::vector<double> energy_stderr;
    std::vector<double> mean_energy_variance;  // E[<(H - <H>)^2>]
    std::vector<double> energy_variance_stderr;

    std::vector<TrajectoryOutcome> trajectories;
    std::vector<double> hitting_times;  // resolved trajectories, index order
    std::vector<TrajectoryFailure> failures;
    std::vector<WeightCurve> weight_curves;
};

EnsembleSummary run_ensemble(const StochasticProcessSpec& spec, const StateVector& psi0,
                             const EnsembleOptions& options);
EnsembleSummary run_ensemble(const StochasticProcessSpec& spec, const StateVector& psi0, double t_max,
                             double epsilon, std::size_t trajectories);

struct LindbladComparison {
    double max_deviation = 0.0;  // max_t ||mean_density(t) - oracle(t)||_max
    double stat_error = 0.0;     // max_t,ij bootstrap standard error
    double worst_time = 0.0;
    std::vector<double> deviation;  // per sample time
};

// Integrates the Lindblad equation from mean_density at t = 0 (every
// trajectory starts from psi0) and compares on the summary's time grid.
LindbladComparison compare_mean_to_lindblad(const EnsembleSummary& summary, const StochasticProcessSpec& spec,
                                            double oracle_dt = 1e-3);

// Weak-convergence ladder: ensembles at dt_k = coarse_dt / 2^k driven by the
// same Brownian paths (finest-level increments summed for coarser levels).
// differences[k] = max_t ||mean_k(t) - mean_{k+1}(t)||_max estimates the
// bias change between adjacent levels; for weak order 1 each halving of dt
// halves it, so ratios[k] = differences[k+1] / differences[k] ~ 0.5.
struct WeakOrderLadder {
    std::vector<double> dts;
    std::vector<double> differences;
    std::vector<double> ratios;
    double bias_constant = 0.0;  // C in bias(dt) ~ C dt, from 2 differences[k] / dts[k]
};

// options.trajectory.sample_stride is interpreted at coarse_dt; record_until
// sets the comparison horizon.
WeakOrderLadder weak_order_ladder(const StochasticProcessSpec& spec, const StateVector& psi0, double coarse_dt,
                                  std::size_t levels, const EnsembleOptions& options);

// sqrt(<H^2> - <H>^2)
double energy_dispersion(const StateVector& psi, const HermitianObservable& h);

struct ScalingMember {
    StochasticProcessSpec spec;
    StateVector psi0;
};

// Members whose Hamiltonian and collapse operators are base's scaled by each factor.
std::vector<ScalingMember> gap_family(const StochasticProcessSpec& base, const StateVector& psi0,
                                      const std::vector<double>& scales);

struct ScalingPoint {
    double delta_e = 0.0;
    double t_r_median = 0.0;
    std::size_t resolved = 0;
    std::size_t unresolved = 0;
};

struct ScalingFit {
    std::vector<ScalingPoint> points;
    double slope = 0.0;  // d log t_R / d log Delta E
    double slope_stderr = 0.0;
    double intercept = 0.0;
    double sigma = 0.0;  // held fixed across the family
};

// Median hitting time per member and least-squares slope of log t_R against
// log Delta E. Throws ValidationError for fewer than three distinct Delta E
// or a member with Delta E = 0, InsufficientResolved when more than 20% of
// any member's trajectories are unresolved.
ScalingFit estimate_reduction_scaling(const std::vector<ScalingMember>& members, const EnsembleOptions& options);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double critical = 0.0;  // 99.9th percentile of chi^2(dof)
    bool pass = false;
};

// Pearson chi^2 of outcome counts against born_prediction. Throws
// UnresolvedPresent if any trajectory is unresolved.
ChiSquareResult chi_square_born(const EnsembleSummary& summary);
ChiSquareResult chi_square_counts(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities);

double median(std::vector<double> values);

}  // namespace bornlab
