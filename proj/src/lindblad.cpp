#include "bornlab/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bornlab {

LindbladSpec LindbladSpec::from_process(const StochasticProcessSpec& spec) {
    return {spec.hamiltonian, spec.collapse_ops, spec.sigma, spec.include_hamiltonian};
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const LindbladSpec& spec) {
    if (rho.rows() != spec.dim() || rho.cols() != spec.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "density matrix and Lindblad spec dimensions differ");
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    if (spec.include_hamiltonian) out += Complex(0.0, -1.0) * commutator(spec.hamiltonian.matrix(), rho);
    const double rate = spec.sigma * spec.sigma / 8.0;
    for (const auto& op : spec.collapse_ops) {
        if (op.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "collapse operator dimension");
        out -= rate * commutator(op.matrix(), commutator(op.matrix(), rho));
    }
    return out;
}

ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const LindbladSpec& spec) {
    return lindblad_rhs(rho.matrix(), spec);
}

namespace {

void rk4_step(ComplexMatrix& rho, const LindbladSpec& spec, double h) {
    const ComplexMatrix k1 = lindblad_rhs(rho, spec);
    const ComplexMatrix k2 = lindblad_rhs(rho + 0.5 * h * k1, spec);
    const ComplexMatrix k3 = lindblad_rhs(rho + 0.5 * h * k2, spec);
    const ComplexMatrix k4 = lindblad_rhs(rho + h * k3, spec);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

void integrate(ComplexMatrix& rho, const LindbladSpec& spec, double span, double dt) {
    if (span <= 0.0) return;
    const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    const double h = span / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) rk4_step(rho, spec, h);
}

DensityMatrix finish(const ComplexMatrix& rho) {
    DensityMatrix out = DensityMatrix::projected(rho);
    const double lowest = out.min_eigenvalue();
    if (lowest < -1e-8) {
        std::ostringstream os;
        os << "Lindblad solution has eigenvalue " << lowest;
        throw Error(ErrorCode::PositivityLost, os.str());
    }
    return out;
}

}  // namespace

DensityMatrix evolve_lindblad(const DensityMatrix& rho0, const LindbladSpec& spec, double t, double dt) {
    return evolve_lindblad_sampled(rho0, spec, {t}, dt).front();
}

std::vector<DensityMatrix> evolve_lindblad_sampled(const DensityMatrix& rho0, const LindbladSpec& spec,
                                                   const std::vector<double>& times, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "Lindblad step must be positive");
    if (rho0.dim() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "density matrix and Lindblad spec dimensions differ");
    std::vector<DensityMatrix> out;
    out.reserve(times.size());
    ComplexMatrix rho = rho0.matrix();
    double now = 0.0;
    for (double t : times) {
        if (!(t >= now)) throw Error(ErrorCode::InvalidArgument, "sample times must be ascending and non-negative");
        integrate(rho, spec, t - now, dt);
        now = t;
        out.push_back(finish(rho));
    }
    return out;
}

StationarityReport stationarity_check(const DensityMatrix& rho, const LindbladSpec& spec, double tol) {
    StationarityReport report;
    const ComplexMatrix& r = rho.matrix();
    report.rhs_norm = max_abs(lindblad_rhs(r, spec));
    const ComplexMatrix hr = commutator(spec.hamiltonian.matrix(), r);
    report.hamiltonian_commutator = max_abs(hr);
    report.cyclic_trace = std::abs((r * hr).trace());
    const double rate = spec.sigma * spec.sigma / 8.0;
    for (const auto& op : spec.collapse_ops) {
        const ComplexMatrix ar = commutator(op.matrix(), r);
        report.collapse_commutator = std::max(report.collapse_commutator, max_abs(ar));
        report.dissipation += rate * (ar * ar.adjoint()).trace().real();
    }
    report.is_stationary = report.rhs_norm <= tol;
    return report;
}

}  // namespace bornlab
