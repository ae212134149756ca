#include "bornlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sde_internal.hpp"

namespace bornlab {

void StochasticProcessSpec::validate() const {
    if (hamiltonian.dim() == 0) throw Error(ErrorCode::ValidationError, "process has no Hamiltonian");
    if (collapse_ops.empty()) throw Error(ErrorCode::ValidationError, "process needs at least one collapse operator");
    for (std::size_t j = 0; j < collapse_ops.size(); ++j) {
        if (collapse_ops[j].dim() != hamiltonian.dim()) {
            std::ostringstream os;
            os << "collapse operator " << j << " has dimension " << collapse_ops[j].dim()
               << ", Hamiltonian has " << hamiltonian.dim();
            throw Error(ErrorCode::DimensionMismatch, os.str());
        }
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::ValidationError, "sigma must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::ValidationError, "dt must be finite and > 0");
}

namespace detail {

PureIntegrator::PureIntegrator(const StochasticProcessSpec& spec) : spec_(spec) {
    spec.validate();
    const Index n = spec.dim();
    drift_.resize(n);
    scratch_.resize(n);
    next_.resize(n);
    shift_.resize(n);
    diffusion_.assign(spec.collapse_ops.size(), ComplexVector(n));
    diagonals_.resize(spec.collapse_ops.size());
    for (std::size_t j = 0; j < spec.collapse_ops.size(); ++j) {
        if (spec.collapse_ops[j].is_diagonal()) diagonals_[j] = spec.collapse_ops[j].matrix().diagonal().real();
    }
    minus_i_h_ = Complex(0.0, -1.0) * spec.hamiltonian.matrix();
    hamiltonian_active_ = spec.include_hamiltonian && max_abs(spec.hamiltonian.matrix()) > 0.0;

    const auto& pointer = spec.pointer_observable();
    pointer_diagonal_ = pointer.is_diagonal();
    if (pointer_diagonal_) {
        // Unit-vector eigenbasis: each basis index belongs to exactly one eigenspace.
        group_of_.assign(static_cast<std::size_t>(n), 0);
        for (std::size_t g = 0; g < pointer.outcome_count(); ++g) {
            const auto& basis = pointer.spectrum()[g].basis;
            for (Index c = 0; c < basis.cols(); ++c) {
                Index row = 0;
                basis.col(c).cwiseAbs().maxCoeff(&row);
                group_of_[static_cast<std::size_t>(row)] = g;
            }
        }
    }
}

void PureIntegrator::evaluate(const ComplexVector& z) {
    const double sigma = spec_.sigma;
    const double norm2 = z.squaredNorm();
    if (hamiltonian_active_) {
        drift_.noalias() = minus_i_h_ * z;
    } else {
        drift_.setZero();
    }
    for (std::size_t j = 0; j < spec_.collapse_ops.size(); ++j) {
        ComplexVector& w = diffusion_[j];
        if (diagonals_[j]) {
            const Eigen::VectorXd& d = *diagonals_[j];
            const double mean = (d.array() * z.array().abs2()).sum() / norm2;
            shift_ = d.array() - mean;
            w.array() = shift_ * z.array();
            drift_.array() -= (sigma * sigma / 8.0) * shift_ * w.array();
        } else {
            const ComplexMatrix& a = spec_.collapse_ops[j].matrix();
            scratch_.noalias() = a * z;
            const double mean = z.dot(scratch_).real() / norm2;
            w = scratch_ - mean * z;
            scratch_.noalias() = a * w;
            scratch_ -= mean * w;
            drift_ -= (sigma * sigma / 8.0) * scratch_;
        }
        w *= 0.5 * sigma;
    }
}

double PureIntegrator::advance(ComplexVector& z, const NoiseIncrement& noise) {
    if (noise.values.size() != spec_.collapse_ops.size()) {
        throw Error(ErrorCode::DimensionMismatch, "noise increment length differs from collapse operator count");
    }
    evaluate(z);
    next_ = z + spec_.dt * drift_;
    for (std::size_t j = 0; j < diffusion_.size(); ++j) next_ += noise.values[j] * diffusion_[j];
    const double norm2 = next_.squaredNorm();
    const double defect = norm2 - z.squaredNorm();
    if (!std::isfinite(norm2) || std::abs(defect) > 0.1) {
        std::ostringstream os;
        os << "pre-renormalization norm defect " << defect << " exceeds 0.1; reduce dt";
        throw Error(ErrorCode::StepRejected, os.str());
    }
    z = next_ / std::sqrt(norm2);
    return defect;
}

void PureIntegrator::weights(const ComplexVector& z, std::vector<double>& out) const {
    const auto& pointer = spec_.pointer_observable();
    out.assign(pointer.outcome_count(), 0.0);
    if (pointer_diagonal_) {
        for (Index k = 0; k < z.size(); ++k) out[group_of_[static_cast<std::size_t>(k)]] += std::norm(z[k]);
    } else {
        for (std::size_t g = 0; g < out.size(); ++g)
            out[g] = (pointer.spectrum()[g].basis.adjoint() * z).squaredNorm();
    }
    // z is normalized up to rounding; make the weights sum to one exactly enough.
    double total = 0.0;
    for (double w : out) total += w;
    for (double& w : out) w /= total;
}

}  // namespace detail

DriftDiffusion drift_and_diffusion(const StateVector& z, const StochasticProcessSpec& spec) {
    if (z.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "state and process dimensions differ");
    detail::PureIntegrator integrator(spec);
    integrator.evaluate(z.amplitudes());
    return {integrator.drift(), integrator.diffusion()};
}

PureStep step_pure_detailed(const StateVector& z, const StochasticProcessSpec& spec, const NoiseIncrement& noise) {
    if (z.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "state and process dimensions differ");
    detail::PureIntegrator integrator(spec);
    ComplexVector work = z.amplitudes();
    const double defect = integrator.advance(work, noise);
    return {StateVector::normalized(std::move(work)), defect};
}

StateVector step_pure(const StateVector& z, const StochasticProcessSpec& spec, const NoiseIncrement& noise) {
    return step_pure_detailed(z, spec, noise).state;
}

DensityMatrix step_density(const DensityMatrix& rho, const StochasticProcessSpec& spec, const NoiseIncrement& noise) {
    spec.validate();
    if (rho.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "density matrix and process dimensions differ");
    if (noise.values.size() != spec.collapse_ops.size()) {
        throw Error(ErrorCode::DimensionMismatch, "noise increment length differs from collapse operator count");
    }
    const ComplexMatrix& r = rho.matrix();
    const double sigma = spec.sigma;
    ComplexMatrix next = r;
    if (spec.include_hamiltonian) next += Complex(0.0, -spec.dt) * commutator(spec.hamiltonian.matrix(), r);
    for (std::size_t j = 0; j < spec.collapse_ops.size(); ++j) {
        const ComplexMatrix& a = spec.collapse_ops[j].matrix();
        const ComplexMatrix ar = commutator(a, r);
        next -= (sigma * sigma / 8.0 * spec.dt) * commutator(a, ar);
        // [rho, [rho, A]] = [rho, -[A, rho]]
        next += (0.5 * sigma * noise.values[j]) * commutator(r, -ar);
    }
    DensityMatrix out = DensityMatrix::projected(next);
    const double lowest = out.min_eigenvalue();
    if (lowest < -1e-6) {
        std::ostringstream os;
        os << "stepped density matrix has eigenvalue " << lowest << "; reduce dt";
        throw Error(ErrorCode::PositivityLost, os.str());
    }
    return out;
}

std::vector<double> projector_weights(const StateVector& psi, const HermitianObservable& s) {
    std::vector<double> out;
    for (const auto& outcome : born_probabilities(psi, s)) out.push_back(outcome.probability);
    return out;
}

namespace {

std::size_t step_count(double horizon, double dt) {
    if (horizon <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

}  // namespace

TrajectoryRecord run_trajectory(const StochasticProcessSpec& spec, const StateVector& psi0, double t_max,
                                const TrajectoryOptions& options, RandomStream& stream) {
    if (psi0.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "initial state and process dimensions differ");
    if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
    if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "reduction threshold epsilon must lie in (0, 1)");
    }
    if (options.sample_stride == 0) throw Error(ErrorCode::InvalidArgument, "sample stride must be positive");

    detail::PureIntegrator integrator(spec);
    const double dt = spec.dt;
    const double target = 1.0 - options.epsilon;
    const std::size_t max_steps = step_count(t_max, dt);
    const std::size_t record_steps = std::min(step_count(options.record_until, dt), max_steps);
    const std::size_t n_ops = spec.collapse_ops.size();

    TrajectoryRecord record;
    ComplexVector z = psi0.amplitudes();
    std::vector<double> weights;
    std::vector<double> previous;

    auto sample = [&](std::size_t k) {
        record.times.push_back(static_cast<double>(k) * dt);
        record.states.push_back(StateVector::normalized(z));
        record.projector_weights.push_back(weights);
    };
    auto dominant = [](const std::vector<double>& w) {
        return static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    };

    integrator.weights(z, weights);
    sample(0);
    if (weights[dominant(weights)] >= target) {
        record.outcome = dominant(weights);
        record.hitting_time = 0.0;
    }

    std::size_t k = 0;
    while (k < max_steps) {
        if (record.outcome && k >= record_steps) break;
        const NoiseIncrement noise = generate_noise_refined(n_ops, dt, options.noise_substeps, stream);
        previous = weights;
        integrator.advance(z, noise);
        ++k;
        integrator.weights(z, weights);
        if (!record.outcome) {
            const std::size_t n = dominant(weights);
            if (weights[n] >= target) {
                record.outcome = n;
                const double rise = weights[n] - previous[n];
                const double fraction = rise > 0.0 ? std::clamp((target - previous[n]) / rise, 0.0, 1.0) : 1.0;
                record.hitting_time = (static_cast<double>(k - 1) + fraction) * dt;
            }
        }
        if (k % options.sample_stride == 0) sample(k);
    }
    if (record.times.back() < static_cast<double>(k) * dt) sample(k);
    record.steps = k;
    return record;
}

TrajectoryRecord run_trajectory(const StochasticProcessSpec& spec, const StateVector& psi0, double t_max,
                                double epsilon) {
    RandomStream stream(spec.seed, 0);
    TrajectoryOptions options;
    options.epsilon = epsilon;
    return run_trajectory(spec, psi0, t_max, options, stream);
}

}  // namespace bornlab
