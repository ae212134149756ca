#include "bornlab/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

namespace bornlab {

unsigned default_thread_count() {
    if (const char* env = std::getenv("BORNLAB_THREADS")) {
        char* end = nullptr;
        const unsigned long value = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && value > 0 && value <= 4096) return static_cast<unsigned>(value);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Kahan-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const noexcept { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

std::size_t steps_for(double horizon, double dt) {
    if (horizon <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

// Per-time feature layout: rho entries (re, im), pointer weights, <H>, <(H - <H>)^2>.
struct FeatureLayout {
    Index dim = 0;
    std::size_t outcomes = 0;
    std::size_t per_time() const { return static_cast<std::size_t>(2 * dim * dim) + outcomes + 2; }
    std::size_t weights_offset() const { return static_cast<std::size_t>(2 * dim * dim); }
    std::size_t energy_offset() const { return weights_offset() + outcomes; }
};

struct TrajectoryResult {
    std::optional<std::size_t> outcome;
    std::optional<double> hitting_time;
    std::vector<double> features;  // grid_size * per_time
    std::optional<WeightCurve> curve;
    std::optional<TrajectoryFailure> failure;
};

void append_features(const StateVector& psi, const std::vector<double>& weights, const ComplexMatrix& h,
                     std::vector<double>& out) {
    const ComplexVector& z = psi.amplitudes();
    const Index n = z.size();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const Complex v = z[i] * std::conj(z[j]);
            out.push_back(v.real());
            out.push_back(v.imag());
        }
    out.insert(out.end(), weights.begin(), weights.end());
    const ComplexVector hz = h * z;
    const double energy = z.dot(hz).real();
    out.push_back(energy);
    out.push_back(std::max(0.0, hz.squaredNorm() - energy * energy));
}

}  // namespace

EnsembleSummary run_ensemble(const StochasticProcessSpec& spec, const StateVector& psi0,
                             const EnsembleOptions& options) {
    spec.validate();
    if (psi0.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "initial state and process dimensions differ");
    if (options.trajectories == 0) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one trajectory");
    if (!(options.t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");

    TrajectoryOptions traj = options.trajectory;
    traj.record_until = std::min(traj.record_until, options.t_max);
    const std::size_t stride = std::max<std::size_t>(traj.sample_stride, 1);
    const std::size_t grid = steps_for(traj.record_until, spec.dt) / stride + 1;

    const HermitianObservable& pointer = spec.pointer_observable();
    const FeatureLayout layout{spec.dim(), pointer.outcome_count()};
    const std::size_t width = layout.per_time();
    const std::size_t n = options.trajectories;

    std::vector<TrajectoryResult> results(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            TrajectoryResult& result = results[i];
            try {
                RandomStream stream(spec.seed, i);
                const TrajectoryRecord record = run_trajectory(spec, psi0, options.t_max, traj, stream);
                result.outcome = record.outcome;
                result.hitting_time = record.hitting_time;
                result.features.reserve(grid * width);
                for (std::size_t m = 0; m < grid; ++m)
                    append_features(record.states[m], record.projector_weights[m], spec.hamiltonian.matrix(),
                                    result.features);
                if (i < options.weight_curves) result.curve = WeightCurve{i, record.times, record.projector_weights};
            } catch (const Error& e) {
                result = TrajectoryResult{};
                result.failure = TrajectoryFailure{i, e.code(), e.what()};
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads ? options.threads : default_thread_count(),
                                                             static_cast<unsigned>(n)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // Join-then-reduce in trajectory order.
    EnsembleSummary summary;
    summary.seed = spec.seed;
    for (const auto& space : pointer.spectrum()) summary.eigenvalues.push_back(space.value);
    for (const auto& outcome : born_probabilities(psi0, pointer)) summary.born_prediction.push_back(outcome.probability);
    for (std::size_t m = 0; m < grid; ++m) summary.sample_times.push_back(static_cast<double>(m * stride) * spec.dt);

    std::vector<std::size_t> completed;
    for (std::size_t i = 0; i < n; ++i) {
        TrajectoryResult& r = results[i];
        if (r.failure) {
            summary.failures.push_back(std::move(*r.failure));
            continue;
        }
        completed.push_back(i);
        summary.trajectories.push_back({i, r.outcome, r.hitting_time});
        if (r.outcome) {
            ++summary.outcome_counts[*r.outcome];
            summary.hitting_times.push_back(*r.hitting_time);
        } else {
            ++summary.unresolved;
        }
        if (r.curve) summary.weight_curves.push_back(std::move(*r.curve));
    }
    summary.n_trajectories = completed.size();
    if (completed.empty()) return summary;

    const std::size_t total = grid * width;
    const double count = static_cast<double>(completed.size());
    std::vector<double> mean(total);
    for (std::size_t f = 0; f < total; ++f) {
        CompensatedSum acc;
        for (std::size_t i : completed) acc.add(results[i].features[f]);
        mean[f] = acc.value() / count;
    }

    std::vector<double> stderr_(total, 0.0);
    if (options.bootstrap_resamples > 1) {
        RandomStream stream(spec.seed, (std::uint64_t{1} << 63) | 0xB0075u);
        std::vector<double> sum(total, 0.0);
        std::vector<double> sum_sq(total, 0.0);
        std::vector<double> resample(total);
        for (std::size_t b = 0; b < options.bootstrap_resamples; ++b) {
            std::fill(resample.begin(), resample.end(), 0.0);
            for (std::size_t draw = 0; draw < completed.size(); ++draw) {
                const std::size_t pick = completed[stream.next_u64() % completed.size()];
                const std::vector<double>& x = results[pick].features;
                for (std::size_t f = 0; f < total; ++f) resample[f] += x[f];
            }
            for (std::size_t f = 0; f < total; ++f) {
                const double v = resample[f] / count - mean[f];
                sum[f] += v;
                sum_sq[f] += v * v;
            }
        }
        const double b = static_cast<double>(options.bootstrap_resamples);
        for (std::size_t f = 0; f < total; ++f) {
            const double m = sum[f] / b;
            stderr_[f] = std::sqrt(std::max(0.0, (sum_sq[f] - b * m * m) / (b - 1.0)));
        }
    }

    const Index d = spec.dim();
    for (std::size_t m = 0; m < grid; ++m) {
        const std::size_t base = m * width;
        ComplexMatrix rho(d, d);
        Eigen::MatrixXd se(d, d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) {
                const std::size_t f = base + static_cast<std::size_t>(2 * (i * d + j));
                rho(i, j) = Complex(mean[f], mean[f + 1]);
                se(i, j) = std::hypot(stderr_[f], stderr_[f + 1]);
            }
        summary.mean_density.push_back(DensityMatrix::from_matrix(rho, 1e-8));
        summary.mean_density_stderr.push_back(std::move(se));
        const auto w0 = static_cast<std::ptrdiff_t>(base + layout.weights_offset());
        const auto w1 = w0 + static_cast<std::ptrdiff_t>(layout.outcomes);
        summary.mean_weights.emplace_back(mean.begin() + w0, mean.begin() + w1);
        summary.weights_stderr.emplace_back(stderr_.begin() + w0, stderr_.begin() + w1);
        const std::size_t e = base + layout.energy_offset();
        summary.mean_energy.push_back(mean[e]);
        summary.energy_stderr.push_back(stderr_[e]);
        summary.mean_energy_variance.push_back(mean[e + 1]);
        summary.energy_variance_stderr.push_back(stderr_[e + 1]);
    }
    return summary;
}

EnsembleSummary run_ensemble(const StochasticProcessSpec& spec, const StateVector& psi0, double t_max,
                             double epsilon, std::size_t trajectories) {
    EnsembleOptions options;
    options.trajectories = trajectories;
    options.t_max = t_max;
    options.trajectory.epsilon = epsilon;
    return run_ensemble(spec, psi0, options);
}

LindbladComparison compare_mean_to_lindblad(const EnsembleSummary& summary, const StochasticProcessSpec& spec,
                                            double oracle_dt) {
    LindbladComparison report;
    if (summary.mean_density.empty()) return report;
    const LindbladSpec lindblad = LindbladSpec::from_process(spec);
    const auto oracle = evolve_lindblad_sampled(summary.mean_density.front(), lindblad, summary.sample_times, oracle_dt);
    for (std::size_t m = 0; m < oracle.size(); ++m) {
        const double dev = max_abs(summary.mean_density[m].matrix() - oracle[m].matrix());
        report.deviation.push_back(dev);
        if (dev > report.max_deviation) {
            report.max_deviation = dev;
            report.worst_time = summary.sample_times[m];
        }
        if (m < summary.mean_density_stderr.size() && summary.mean_density_stderr[m].size() > 0)
            report.stat_error = std::max(report.stat_error, summary.mean_density_stderr[m].maxCoeff());
    }
    return report;
}

WeakOrderLadder weak_order_ladder(const StochasticProcessSpec& spec, const StateVector& psi0, double coarse_dt,
                                  std::size_t levels, const EnsembleOptions& options) {
    if (levels < 3) throw Error(ErrorCode::InvalidArgument, "weak-order ladder needs at least three levels");
    if (!(coarse_dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "coarse dt must be positive");
    WeakOrderLadder ladder;
    std::vector<EnsembleSummary> summaries;
    for (std::size_t k = 0; k < levels; ++k) {
        const std::size_t refine = std::size_t{1} << k;
        StochasticProcessSpec level = spec;
        level.dt = coarse_dt / static_cast<double>(refine);
        EnsembleOptions o = options;
        o.bootstrap_resamples = 0;
        o.weight_curves = 0;
        o.trajectory.sample_stride = std::max<std::size_t>(options.trajectory.sample_stride, 1) * refine;
        o.trajectory.noise_substeps = std::size_t{1} << (levels - 1 - k);
        ladder.dts.push_back(level.dt);
        summaries.push_back(run_ensemble(level, psi0, o));
        if (!summaries.back().failures.empty()) {
            throw Error(summaries.back().failures.front().code, summaries.back().failures.front().message);
        }
    }
    for (std::size_t k = 0; k + 1 < levels; ++k) {
        double diff = 0.0;
        const auto& a = summaries[k].mean_density;
        const auto& b = summaries[k + 1].mean_density;
        for (std::size_t m = 0; m < std::min(a.size(), b.size()); ++m)
            diff = std::max(diff, max_abs(a[m].matrix() - b[m].matrix()));
        ladder.differences.push_back(diff);
        ladder.bias_constant = std::max(ladder.bias_constant, 2.0 * diff / ladder.dts[k]);
    }
    for (std::size_t k = 0; k + 1 < ladder.differences.size(); ++k)
        ladder.ratios.push_back(ladder.differences[k + 1] / ladder.differences[k]);
    return ladder;
}

double energy_dispersion(const StateVector& psi, const HermitianObservable& h) {
    if (psi.dim() != h.dim()) throw Error(ErrorCode::DimensionMismatch, "state and Hamiltonian dimensions differ");
    const ComplexVector hz = h.matrix() * psi.amplitudes();
    const double mean = psi.amplitudes().dot(hz).real();
    return std::sqrt(std::max(0.0, hz.squaredNorm() - mean * mean));
}

std::vector<ScalingMember> gap_family(const StochasticProcessSpec& base, const StateVector& psi0,
                                      const std::vector<double>& scales) {
    std::vector<ScalingMember> members;
    for (double s : scales) {
        StochasticProcessSpec spec = base;
        spec.hamiltonian = base.hamiltonian.scaled(s);
        for (auto& op : spec.collapse_ops) op = op.scaled(s);
        members.push_back({std::move(spec), psi0});
    }
    return members;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

ScalingFit estimate_reduction_scaling(const std::vector<ScalingMember>& members, const EnsembleOptions& options) {
    std::vector<double> spreads;
    std::ostringstream problems;
    for (std::size_t k = 0; k < members.size(); ++k) {
        const double de = energy_dispersion(members[k].psi0, members[k].spec.hamiltonian);
        if (de <= 1e-12) problems << "member " << k << " has zero energy dispersion (no reduction pressure); ";
        spreads.push_back(de);
    }
    std::vector<double> distinct = spreads;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }),
                   distinct.end());
    if (distinct.size() < 3) problems << "scaling needs at least 3 distinct energy dispersions, got " << distinct.size() << "; ";
    if (!problems.str().empty()) throw Error(ErrorCode::ValidationError, problems.str());

    ScalingFit fit;
    fit.sigma = members.front().spec.sigma;
    EnsembleOptions cell = options;
    cell.trajectory.record_until = 0.0;
    cell.bootstrap_resamples = 0;
    cell.weight_curves = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
        const EnsembleSummary summary = run_ensemble(members[k].spec, members[k].psi0, cell);
        ScalingPoint point;
        point.delta_e = spreads[k];
        point.resolved = summary.hitting_times.size();
        point.unresolved = summary.unresolved + summary.failures.size();
        const double total = static_cast<double>(point.resolved + point.unresolved);
        if (static_cast<double>(point.unresolved) > 0.2 * total) {
            std::ostringstream os;
            os << "member " << k << " (Delta E = " << point.delta_e << "): " << point.unresolved << " of " << total
               << " trajectories unresolved by t_max = " << options.t_max;
            throw Error(ErrorCode::InsufficientResolved, os.str());
        }
        point.t_r_median = median(summary.hitting_times);
        if (!(point.t_r_median > 0.0)) {
            throw Error(ErrorCode::InsufficientResolved, "median reduction time is not positive");
        }
        fit.points.push_back(point);
    }

    const double n = static_cast<double>(fit.points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : fit.points) {
        mx += std::log(p.delta_e);
        my += std::log(p.t_r_median);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : fit.points) {
        const double dx = std::log(p.delta_e) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.t_r_median) - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (const auto& p : fit.points) {
        const double r = std::log(p.t_r_median) - (fit.intercept + fit.slope * std::log(p.delta_e));
        ssr += r * r;
    }
    fit.slope_stderr = n > 2.0 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return fit;
}

ChiSquareResult chi_square_counts(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities) {
    if (counts.size() != probabilities.size()) {
        throw Error(ErrorCode::DimensionMismatch, "counts and probabilities differ in length");
    }
    double total = 0.0;
    for (std::size_t c : counts) total += static_cast<double>(c);
    ChiSquareResult result;
    int categories = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double expected = total * probabilities[k];
        if (probabilities[k] <= 1e-15) {
            if (counts[k] > 0) result.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        ++categories;
        const double diff = static_cast<double>(counts[k]) - expected;
        result.statistic += diff * diff / expected;
    }
    result.dof = std::max(0, categories - 1);
    if (result.dof == 0) {
        result.critical = 0.0;
        result.pass = result.statistic == 0.0;
        return result;
    }
    const boost::math::chi_squared dist(result.dof);
    result.critical = boost::math::quantile(dist, 0.999);
    result.pass = result.statistic < result.critical;
    return result;
}

ChiSquareResult chi_square_born(const EnsembleSummary& summary) {
    if (summary.unresolved > 0) {
        std::ostringstream os;
        os << summary.unresolved << " unresolved trajectories; extend t_max";
        throw Error(ErrorCode::UnresolvedPresent, os.str());
    }
    std::vector<std::size_t> counts(summary.born_prediction.size(), 0);
    for (const auto& [index, c] : summary.outcome_counts) counts.at(index) = c;
    return chi_square_counts(counts, summary.born_prediction);
}

}  // namespace bornlab
