// sde_internal.hpp
// Allocation-free Euler-Maruyama stepper shared by the public SDE entry
// points and the ensemble runner.

#pragma once

#include <optional>
#include <vector>

#include "bornlab/sde.hpp"

namespace bornlab::detail {

class PureIntegrator {
public:
    explicit PureIntegrator(const StochasticProcessSpec& spec);

    // Fills drift() and diffusion() for state z (<A_j> divided by <z|z>).
    void evaluate(const ComplexVector& z);
    // One step in place; z is renormalized. Returns the pre-renormalization
    // defect ||z'||^2 - ||z||^2.
    double advance(ComplexVector& z, const NoiseIncrement& noise);
    // Eigenspace weights of the pointer observable.
    void weights(const ComplexVector& z, std::vector<double>& out) const;

    const ComplexVector& drift() const noexcept { return drift_; }
    const std::vector<ComplexVector>& diffusion() const noexcept { return diffusion_; }

private:
    const StochasticProcessSpec& spec_;
    ComplexMatrix minus_i_h_;
    bool hamiltonian_active_ = false;
    std::vector<std::optional<Eigen::VectorXd>> diagonals_;
    bool pointer_diagonal_ = false;
    std::vector<std::size_t> group_of_;

    ComplexVector drift_;
    ComplexVector scratch_;
    ComplexVector next_;
    Eigen::ArrayXd shift_;
    std::vector<ComplexVector> diffusion_;
};

}  // namespace bornlab::detail
