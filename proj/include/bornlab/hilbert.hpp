// hilbert.hpp
// Finite-dimensional Hilbert-space algebra: states, density matrices,
// observables with cached spectral decompositions, and the unitary and
// projective maps between them. Units have hbar = 1 throughout.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bornlab/error.hpp"

namespace bornlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Default tolerance: 100 machine epsilons scaled by dimension.
double default_tolerance(Index dim) noexcept;

// Largest absolute entry.
double max_abs(const ComplexMatrix& m);

double hermiticity_defect(const ComplexMatrix& m);  // ||M - M^dag||_max
double unitarity_defect(const ComplexMatrix& u);    // ||U^dag U - 1||_max

// Normalized pure state.
class StateVector {
public:
    // Normalizes `amplitudes`; throws InvalidArgument on a zero or non-finite vector.
    static StateVector normalized(ComplexVector amplitudes);
    static StateVector basis(Index dim, Index k);
    static StateVector from_list(std::span<const Complex> amplitudes);

    Index dim() const noexcept { return amplitudes_.size(); }
    const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
    Complex operator[](Index i) const { return amplitudes_[i]; }

    // Distance modulo a global U(1) phase: min_phi ||a - e^{i phi} b||.
    double phase_distance(const StateVector& other) const;

private:
    explicit StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {}
    ComplexVector amplitudes_;
};

// Self-adjoint, positive semidefinite, unit-trace matrix.
class DensityMatrix {
public:
    static DensityMatrix from_pure(const StateVector& psi);
    static DensityMatrix maximally_mixed(Index dim);
    // Validates Hermiticity, unit trace and eigenvalues >= -tol.
    static DensityMatrix from_matrix(const ComplexMatrix& m, double tol = 1e-12);
    // Symmetrizes and re-projects the trace to 1 without a positivity check.
    // Used by integrators that report positivity separately.
    static DensityMatrix projected(const ComplexMatrix& m);

    Index dim() const noexcept { return matrix_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    double purity() const;
    double min_eigenvalue() const;

private:
    explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {}
    ComplexMatrix matrix_;
};

struct Eigenspace {
    double value = 0.0;
    ComplexMatrix projector;
    ComplexMatrix basis;  // orthonormal columns spanning the eigenspace
    Index multiplicity = 0;
};

// Self-adjoint operator together with its spectral decomposition
// S = sum_n s_n P_n, eigenvalues ascending, degenerate eigenvalues merged.
class HermitianObservable {
public:
    HermitianObservable() = default;

    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    std::span<const Eigenspace> spectrum() const noexcept { return spectrum_; }
    Index dim() const noexcept { return matrix_.rows(); }
    std::size_t outcome_count() const noexcept { return spectrum_.size(); }
    double spectral_radius() const noexcept;
    bool is_diagonal() const noexcept { return diagonal_; }
    bool is_degenerate() const noexcept { return spectrum_.size() < static_cast<std::size_t>(dim()); }

    // f(S) = sum_n f(s_n) P_n
    ComplexMatrix apply_function(const std::function<Complex(double)>& f) const;

    // Returns a copy with every eigenvalue multiplied by `factor`.
    HermitianObservable scaled(double factor) const;

private:
    friend HermitianObservable spectral_decompose(const ComplexMatrix&, double);
    ComplexMatrix matrix_;
    std::vector<Eigenspace> spectrum_;
    bool diagonal_ = false;
};

// group_tol <= 0 selects the default 1e-9 * max(1, spectral radius).
HermitianObservable spectral_decompose(const ComplexMatrix& m, double group_tol = 0.0);

// Tr(rho S)
double expectation(const DensityMatrix& rho, const HermitianObservable& s);
double expectation(const StateVector& psi, const HermitianObservable& s);

struct BornOutcome {
    double eigenvalue = 0.0;
    double probability = 0.0;
};

// p_n = <psi|P_n|psi>, one entry per distinct eigenvalue in ascending order.
std::vector<BornOutcome> born_probabilities(const StateVector& psi, const HermitianObservable& s);

// P_n|psi> / sqrt(<psi|P_n|psi>)
StateVector reduce(const StateVector& psi, const HermitianObservable& s, std::size_t outcome);

bool is_pure(const DensityMatrix& rho, double tol);

StateVector evolve_unitary(const StateVector& psi, const ComplexMatrix& u, double tol = 1e-10);
DensityMatrix evolve_unitary(const DensityMatrix& rho, const ComplexMatrix& u, double tol = 1e-10);

// exp(-i H dt) from the spectral decomposition of H.
ComplexMatrix hamiltonian_step(const HermitianObservable& h, double dt);

// U = 1 + |dpsi><psi| - |psi><dpsi|, which maps psi to psi + dpsi exactly and
// is unitary to second order in ||dpsi||. Requires <psi|dpsi> = 0.
ComplexMatrix infinitesimal_unitary(const StateVector& psi, const ComplexVector& dpsi,
                                    double tol = 1e-10);

// K infinitesimal unitaries along a great circle from `from` to `to`
// (relative phase absorbed into `to`). Orthogonal endpoints in dim > 2 are
// routed through the lowest-index basis vector orthogonal to both.
std::vector<ComplexMatrix> unitary_path(const StateVector& from, const StateVector& to,
                                        std::size_t steps);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace bornlab
