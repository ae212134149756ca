#include "bornlab/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bornlab {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NotUnitary: return "NotUnitary";
        case ErrorCode::NotOrthogonal: return "NotOrthogonal";
        case ErrorCode::ZeroProbabilityOutcome: return "ZeroProbabilityOutcome";
        case ErrorCode::AntipodalAmbiguity: return "AntipodalAmbiguity";
        case ErrorCode::NumericalResidue: return "NumericalResidue";
        case ErrorCode::StepRejected: return "StepRejected";
        case ErrorCode::PositivityLost: return "PositivityLost";
        case ErrorCode::InsufficientResolved: return "InsufficientResolved";
        case ErrorCode::UnresolvedPresent: return "UnresolvedPresent";
        case ErrorCode::InvalidProjector: return "InvalidProjector";
        case ErrorCode::IncompleteFamily: return "IncompleteFamily";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << what << " must be a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

void require_same_dim(Index a, Index b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension " << a << " vs " << b;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

void require_unitary(const ComplexMatrix& u, double tol) {
    require_square(u, "unitary");
    const double defect = unitarity_defect(u);
    if (!(defect <= tol)) {
        std::ostringstream os;
        os << "||U^dag U - 1||_max = " << defect << " exceeds " << tol;
        throw Error(ErrorCode::NotUnitary, os.str());
    }
}

}  // namespace

double default_tolerance(Index dim) noexcept {
    return 100.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<Index>(dim, 1));
}

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
    return max_abs(m - m.adjoint());
}

double unitarity_defect(const ComplexMatrix& u) {
    return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

// ---------------------------------------------------------------- StateVector

StateVector StateVector::normalized(ComplexVector amplitudes) {
    if (amplitudes.size() == 0) {
        throw Error(ErrorCode::InvalidArgument, "state vector must have at least one amplitude");
    }
    if (!amplitudes.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "state vector has non-finite amplitudes");
    }
    const double norm = amplitudes.norm();
    if (norm <= std::numeric_limits<double>::min()) {
        throw Error(ErrorCode::InvalidArgument, "cannot normalize the zero vector");
    }
    amplitudes /= norm;
    return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(Index dim, Index k) {
    if (dim <= 0 || k < 0 || k >= dim) {
        throw Error(ErrorCode::InvalidArgument, "basis index out of range");
    }
    ComplexVector v = ComplexVector::Zero(dim);
    v[k] = 1.0;
    return StateVector(std::move(v));
}

StateVector StateVector::from_list(std::span<const Complex> amplitudes) {
    ComplexVector v(static_cast<Index>(amplitudes.size()));
    for (std::size_t i = 0; i < amplitudes.size(); ++i) v[static_cast<Index>(i)] = amplitudes[i];
    return normalized(std::move(v));
}

double StateVector::phase_distance(const StateVector& other) const {
    require_same_dim(dim(), other.dim(), "phase_distance");
    // The minimizing phase aligns b with a; evaluating the residual directly
    // avoids the cancellation in sqrt(2 - 2|<a|b>|) for nearby states.
    const Complex overlap = other.amplitudes_.dot(amplitudes_);
    const double size = std::abs(overlap);
    const Complex phase = size > 0.0 ? overlap / size : Complex(1.0);
    return (amplitudes_ - phase * other.amplitudes_).norm();
}

// -------------------------------------------------------------- DensityMatrix

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
    if (dim <= 0) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m, double tol) {
    require_square(m, "density matrix");
    if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, "density matrix has non-finite entries");
    const double herm = hermiticity_defect(m);
    if (herm > tol) {
        std::ostringstream os;
        os << "density matrix Hermiticity defect " << herm;
        throw Error(ErrorCode::NotHermitian, os.str());
    }
    const Complex tr = m.trace();
    if (std::abs(tr - 1.0) > tol) {
        std::ostringstream os;
        os << "density matrix trace " << tr.real() << " differs from 1";
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    DensityMatrix rho(0.5 * (m + m.adjoint()));
    const double lowest = rho.min_eigenvalue();
    if (lowest < -tol) {
        std::ostringstream os;
        os << "density matrix has negative eigenvalue " << lowest;
        throw Error(ErrorCode::PositivityLost, os.str());
    }
    return rho;
}

DensityMatrix DensityMatrix::projected(const ComplexMatrix& m) {
    require_square(m, "density matrix");
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
        throw Error(ErrorCode::PositivityLost, "density matrix trace is not positive");
    }
    h /= tr;
    return DensityMatrix(std::move(h));
}

double DensityMatrix::purity() const {
    // Tr rho^2 = sum |rho_ij|^2 for Hermitian rho
    return matrix_.squaredNorm();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()[0];
}

// -------------------------------------------------------- HermitianObservable

double HermitianObservable::spectral_radius() const noexcept {
    if (spectrum_.empty()) return 0.0;
    return std::max(std::abs(spectrum_.front().value), std::abs(spectrum_.back().value));
}

ComplexMatrix HermitianObservable::apply_function(const std::function<Complex(double)>& f) const {
    ComplexMatrix out = ComplexMatrix::Zero(dim(), dim());
    for (const auto& space : spectrum_) out += f(space.value) * space.projector;
    return out;
}

HermitianObservable HermitianObservable::scaled(double factor) const {
    HermitianObservable out = *this;
    out.matrix_ *= factor;
    for (auto& space : out.spectrum_) space.value *= factor;
    if (factor < 0.0) std::reverse(out.spectrum_.begin(), out.spectrum_.end());
    if (factor == 0.0) {
        // Everything collapses onto one eigenvalue.
        return spectral_decompose(out.matrix_);
    }
    return out;
}

HermitianObservable spectral_decompose(const ComplexMatrix& m, double group_tol) {
    require_square(m, "observable");
    if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, "observable has non-finite entries");
    const double herm = hermiticity_defect(m);
    if (herm > 1e-10) {
        std::ostringstream os;
        os << "||M - M^dag||_max = " << herm << " exceeds 1e-10";
        throw Error(ErrorCode::NotHermitian, os.str());
    }

    const Index n = m.rows();
    const ComplexMatrix sym = 0.5 * (m + m.adjoint());

    bool diagonal = true;
    for (Index i = 0; i < n && diagonal; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j && sym(i, j) != Complex(0.0)) { diagonal = false; break; }

    Eigen::VectorXd values(n);
    ComplexMatrix vectors(n, n);
    if (diagonal) {
        // Exact decomposition with unit-vector eigenbasis.
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return sym(a, a).real() < sym(b, b).real(); });
        vectors.setZero();
        for (Index k = 0; k < n; ++k) {
            const Index src = order[static_cast<std::size_t>(k)];
            values[k] = sym(src, src).real();
            vectors(src, k) = 1.0;
        }
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
        if (solver.info() != Eigen::Success) {
            throw Error(ErrorCode::NumericalResidue, "eigensolver did not converge");
        }
        values = solver.eigenvalues();
        vectors = solver.eigenvectors();
    }

    const double radius = std::max(std::abs(values[0]), std::abs(values[n - 1]));
    const double tol = group_tol > 0.0 ? group_tol : 1e-9 * std::max(1.0, radius);

    HermitianObservable out;
    out.matrix_ = sym;
    out.diagonal_ = diagonal;
    Index start = 0;
    while (start < n) {
        Index stop = start + 1;
        while (stop < n && values[stop] - values[stop - 1] <= tol) ++stop;
        Eigenspace space;
        space.multiplicity = stop - start;
        space.value = values.segment(start, space.multiplicity).mean();
        space.basis = vectors.middleCols(start, space.multiplicity);
        space.projector = space.basis * space.basis.adjoint();
        out.spectrum_.push_back(std::move(space));
        start = stop;
    }
    return out;
}

// ------------------------------------------------------------------ postulates

double expectation(const DensityMatrix& rho, const HermitianObservable& s) {
    require_same_dim(rho.dim(), s.dim(), "expectation");
    const Complex value = (rho.matrix() * s.matrix()).trace();
    const double tol = 1e-12 * std::max(1.0, s.spectral_radius());
    if (std::abs(value.imag()) > tol) {
        std::ostringstream os;
        os << "Tr(rho S) has imaginary residue " << value.imag();
        throw Error(ErrorCode::NumericalResidue, os.str());
    }
    return value.real();
}

double expectation(const StateVector& psi, const HermitianObservable& s) {
    require_same_dim(psi.dim(), s.dim(), "expectation");
    return psi.amplitudes().dot(s.matrix() * psi.amplitudes()).real();
}

std::vector<BornOutcome> born_probabilities(const StateVector& psi, const HermitianObservable& s) {
    require_same_dim(psi.dim(), s.dim(), "born_probabilities");
    std::vector<BornOutcome> out;
    out.reserve(s.outcome_count());
    for (const auto& space : s.spectrum()) {
        out.push_back({space.value, (space.basis.adjoint() * psi.amplitudes()).squaredNorm()});
    }
    return out;
}

StateVector reduce(const StateVector& psi, const HermitianObservable& s, std::size_t outcome) {
    require_same_dim(psi.dim(), s.dim(), "reduce");
    if (outcome >= s.outcome_count()) {
        throw Error(ErrorCode::InvalidArgument, "outcome index out of range");
    }
    const auto& space = s.spectrum()[outcome];
    ComplexVector projected = space.projector * psi.amplitudes();
    const double p = projected.squaredNorm();
    if (p <= 1e-14) {
        std::ostringstream os;
        os << "outcome " << outcome << " (eigenvalue " << space.value << ") has probability " << p;
        throw Error(ErrorCode::ZeroProbabilityOutcome, os.str());
    }
    return StateVector::normalized(std::move(projected));
}

bool is_pure(const DensityMatrix& rho, double tol) {
    const ComplexMatrix& m = rho.matrix();
    return max_abs(m * m - m) <= tol;
}

StateVector evolve_unitary(const StateVector& psi, const ComplexMatrix& u, double tol) {
    require_unitary(u, tol);
    require_same_dim(psi.dim(), u.rows(), "evolve_unitary");
    return StateVector::normalized(u * psi.amplitudes());
}

DensityMatrix evolve_unitary(const DensityMatrix& rho, const ComplexMatrix& u, double tol) {
    require_unitary(u, tol);
    require_same_dim(rho.dim(), u.rows(), "evolve_unitary");
    // U^{-1} = U^dag for a unitary
    return DensityMatrix::projected(u * rho.matrix() * u.adjoint());
}

ComplexMatrix hamiltonian_step(const HermitianObservable& h, double dt) {
    const Complex minus_i(0.0, -1.0);
    return h.apply_function([&](double s) { return std::exp(minus_i * s * dt); });
}

ComplexMatrix infinitesimal_unitary(const StateVector& psi, const ComplexVector& dpsi, double tol) {
    require_same_dim(psi.dim(), dpsi.size(), "infinitesimal_unitary");
    const Complex overlap = psi.amplitudes().dot(dpsi);
    if (std::abs(overlap) > tol) {
        std::ostringstream os;
        os << "|<psi|dpsi>| = " << std::abs(overlap) << " exceeds " << tol;
        throw Error(ErrorCode::NotOrthogonal, os.str());
    }
    const ComplexVector& v = psi.amplitudes();
    ComplexMatrix u = ComplexMatrix::Identity(psi.dim(), psi.dim());
    u += dpsi * v.adjoint();
    u -= v * dpsi.adjoint();
    return u;
}

namespace {

// Great-circle leg between `from` and `to`, where <from|to> is real and >= 0.
void geodesic_leg(const ComplexVector& from, const ComplexVector& to, std::size_t steps,
                  std::vector<ComplexMatrix>& out) {
    const Index dim = from.size();
    const double c = std::clamp(from.dot(to).real(), -1.0, 1.0);
    const double theta = std::acos(c);
    if (theta < 1e-15) {
        for (std::size_t k = 0; k < steps; ++k) out.push_back(ComplexMatrix::Identity(dim, dim));
        return;
    }
    const ComplexVector u = (to - c * from) / std::sin(theta);
    const double h = theta / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const double a = static_cast<double>(k) * h;
        const StateVector point = StateVector::normalized(std::cos(a) * from + std::sin(a) * u);
        const ComplexVector tangent = h * (-std::sin(a) * from + std::cos(a) * u);
        out.push_back(infinitesimal_unitary(point, tangent, 1e-10));
    }
}

}  // namespace

std::vector<ComplexMatrix> unitary_path(const StateVector& from, const StateVector& to, std::size_t steps) {
    require_same_dim(from.dim(), to.dim(), "unitary_path");
    if (steps == 0) throw Error(ErrorCode::InvalidArgument, "unitary_path needs at least one step");

    const ComplexVector& a = from.amplitudes();
    const ComplexVector& b = to.amplitudes();
    const Complex overlap = a.dot(b);
    std::vector<ComplexMatrix> out;
    out.reserve(steps);

    constexpr double orthogonal_tol = 1e-12;
    if (std::abs(overlap) > orthogonal_tol) {
        const Complex phase = overlap / std::abs(overlap);
        geodesic_leg(a, b * std::conj(phase), steps, out);
        return out;
    }
    if (from.dim() <= 2) {
        geodesic_leg(a, b, steps, out);
        return out;
    }

    Index via = -1;
    for (Index k = 0; k < from.dim(); ++k) {
        if (std::abs(a[k]) <= orthogonal_tol && std::abs(b[k]) <= orthogonal_tol) {
            via = k;
            break;
        }
    }
    if (via < 0) {
        throw Error(ErrorCode::AntipodalAmbiguity,
                    "orthogonal endpoints and no basis vector orthogonal to both");
    }
    if (steps < 2) {
        throw Error(ErrorCode::AntipodalAmbiguity, "routing through a basis vector needs at least two steps");
    }
    const ComplexVector mid = StateVector::basis(from.dim(), via).amplitudes();
    const std::size_t first = (steps + 1) / 2;
    geodesic_leg(a, mid, first, out);
    geodesic_leg(mid, b, steps - first, out);
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_square(a, "commutator operand");
    require_square(b, "commutator operand");
    require_same_dim(a.rows(), b.rows(), "commutator");
    return a * b - b * a;
}

}  // namespace bornlab
