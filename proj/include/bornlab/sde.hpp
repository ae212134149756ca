// sde.hpp
// Ito integrators for the norm-preserving stochastic Schrodinger equation
//
//   d|z> = [alpha dt + sum_j beta_j dW_j] |z>
//   alpha = -iH - (sigma^2 / 8) sum_j (A_j - <A_j>)^2
//   beta_j = (sigma / 2) (A_j - <A_j>)
//
// and its density-matrix form
//
//   drho = -i[H, rho] dt - (sigma^2 / 8) sum_j [A_j, [A_j, rho]] dt
//          + (sigma / 2) sum_j [rho, [rho, A_j]] dW_j.
//
// Both are stepped with Euler-Maruyama.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bornlab/hilbert.hpp"
#include "bornlab/rng.hpp"

namespace bornlab {

struct StochasticProcessSpec {
    HermitianObservable hamiltonian;
    std::vector<HermitianObservable> collapse_ops;  // the A_j; nonempty
    double sigma = 0.0;                             // coupling strength, 1/sqrt(time)
    double dt = 1e-3;
    // false keeps only the stochastic terms (localization approximation)
    bool include_hamiltonian = true;
    std::uint64_t seed = 0;

    Index dim() const noexcept { return hamiltonian.dim(); }
    // Throws ValidationError/DimensionMismatch/NotHermitian on a malformed spec.
    void validate() const;
    // Outcomes are read off the eigenspaces of the first collapse operator.
    const HermitianObservable& pointer_observable() const { return collapse_ops.front(); }
};

struct DriftDiffusion {
    ComplexVector drift;
    std::vector<ComplexVector> diffusion;  // one per collapse operator
};

DriftDiffusion drift_and_diffusion(const StateVector& z, const StochasticProcessSpec& spec);

struct PureStep {
    StateVector state;
    // ||z + drift dt + sum_j diffusion_j dW_j||^2 - 1, before renormalization
    double norm_defect = 0.0;
};

// Throws StepRejected if |norm_defect| > 0.1.
PureStep step_pure_detailed(const StateVector& z, const StochasticProcessSpec& spec,
                            const NoiseIncrement& noise);
StateVector step_pure(const StateVector& z, const StochasticProcessSpec& spec, const NoiseIncrement& noise);

// Throws PositivityLost if the stepped matrix has an eigenvalue below -1e-6.
DensityMatrix step_density(const DensityMatrix& rho, const StochasticProcessSpec& spec,
                           const NoiseIncrement& noise);

struct TrajectoryOptions {
    double epsilon = 1e-6;          // reduction threshold: max_n <P_n> >= 1 - epsilon
    std::size_t sample_stride = 100;  // record a snapshot every stride steps
    // Keep integrating (and sampling) at least until this time even after
    // reduction, so ensembles can average over a common time grid.
    double record_until = 0.0;
    std::size_t noise_substeps = 1;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<std::vector<double>> projector_weights;  // <P_n> per sample
    std::optional<std::size_t> outcome;                  // empty = unresolved
    std::optional<double> hitting_time;
    std::size_t steps = 0;
};

TrajectoryRecord run_trajectory(const StochasticProcessSpec& spec, const StateVector& psi0, double t_max,
                                const TrajectoryOptions& options, RandomStream& stream);

// Convenience overload drawing noise from stream 0 of spec.seed.
TrajectoryRecord run_trajectory(const StochasticProcessSpec& spec, const StateVector& psi0, double t_max,
                                double epsilon);

// Weights of `psi` in the eigenspaces of `s`, same order as s.spectrum().
std::vector<double> projector_weights(const StateVector& psi, const HermitianObservable& s);

}  // namespace bornlab
