// lindblad.hpp
// Deterministic evolution of the stochastic mean E[rho]:
//
//   dE[rho]/dt = -i[H, E[rho]] - (sigma^2 / 8) sum_j [A_j, [A_j, E[rho]]]
//
// integrated with fixed-step classical RK4. This is the oracle that ensemble
// averages of the stochastic integrators are checked against.

#pragma once

#include <vector>

#include "bornlab/hilbert.hpp"
#include "bornlab/sde.hpp"

namespace bornlab {

struct LindbladSpec {
    HermitianObservable hamiltonian;
    std::vector<HermitianObservable> collapse_ops;
    double sigma = 0.0;
    // Mirrors StochasticProcessSpec::include_hamiltonian.
    bool include_hamiltonian = true;

    static LindbladSpec from_process(const StochasticProcessSpec& spec);
    Index dim() const noexcept { return hamiltonian.dim(); }
};

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladSpec& spec);
ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladSpec& spec);

// Integrates from 0 to t with step dt (the last step is shortened to land on
// t). Throws PositivityLost if the result has an eigenvalue below -1e-8.
DensityMatrix evolve_lindblad(const DensityMatrix& rho0, const LindbladSpec& spec, double t, double dt);

// Samples the solution at each of `times` (ascending, >= 0).
std::vector<DensityMatrix> evolve_lindblad_sampled(const DensityMatrix& rho0, const LindbladSpec& spec,
                                                   const std::vector<double>& times, double dt);

struct StationarityReport {
    bool is_stationary = false;
    double rhs_norm = 0.0;                    // ||rhs||_max
    double hamiltonian_commutator = 0.0;      // ||[H, E rho]||_max
    double collapse_commutator = 0.0;         // max_j ||[A_j, E rho]||_max
    // (sigma^2 / 8) sum_j Tr [A_j, E rho][A_j, E rho]^dag, the rate at which
    // the double-commutator term removes purity. Never negative.
    double dissipation = 0.0;
    double cyclic_trace = 0.0;                // |Tr E rho [H, E rho]|
};

StationarityReport stationarity_check(const DensityMatrix& rho, const LindbladSpec& spec, double tol);

}  // namespace bornlab
