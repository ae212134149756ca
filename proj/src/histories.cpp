#include "bornlab/histories.hpp"

#include <algorithm>
#include <sstream>

namespace bornlab {

namespace {

constexpr double kStructureTol = 1e-10;

void check_projector(const ComplexMatrix& e, Index dim, std::size_t slot) {
    if (e.rows() != dim || e.cols() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "history projector dimension differs from the density matrix");
    }
    const double herm = hermiticity_defect(e);
    const double idem = max_abs(e * e - e);
    if (herm > kStructureTol || idem > kStructureTol) {
        std::ostringstream os;
        os << "event " << slot << " is not an orthogonal projector (Hermiticity defect " << herm
           << ", idempotency defect " << idem << ")";
        throw Error(ErrorCode::InvalidProjector, os.str());
    }
}

void check_unitary(const ComplexMatrix& u, Index dim, std::size_t slot) {
    if (u.rows() != dim || u.cols() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "history propagator dimension differs from the density matrix");
    }
    const double defect = unitarity_defect(u);
    if (defect > kStructureTol) {
        std::ostringstream os;
        os << "propagator " << slot << " has unitarity defect " << defect;
        throw Error(ErrorCode::NotUnitary, os.str());
    }
}

double chain_trace(const ComplexMatrix& chain, const DensityMatrix& rho) {
    const Complex p = (chain * rho.matrix() * chain.adjoint()).trace();
    if (std::abs(p.imag()) > 1e-12) {
        std::ostringstream os;
        os << "history probability has imaginary residue " << p.imag();
        throw Error(ErrorCode::NumericalResidue, os.str());
    }
    if (p.real() < -1e-10 || p.real() > 1.0 + 1e-10) {
        std::ostringstream os;
        os << "history probability " << p.real() << " outside [0, 1]";
        throw Error(ErrorCode::NumericalResidue, os.str());
    }
    return std::clamp(p.real(), 0.0, 1.0);
}

}  // namespace

double history_probability(const History& h) {
    const Index dim = h.initial.dim();
    ComplexMatrix chain = ComplexMatrix::Identity(dim, dim);
    for (std::size_t k = 0; k < h.events.size(); ++k) {
        check_unitary(h.events[k].propagator, dim, k);
        check_projector(h.events[k].projector, dim, k);
        chain = (h.events[k].projector * h.events[k].propagator * chain).eval();
    }
    return chain_trace(chain, h.initial);
}

std::vector<HistoryTerm> enumerate_histories(const DensityMatrix& rho, const std::vector<ComplexMatrix>& propagators,
                                             const std::vector<ProjectorFamily>& families) {
    const Index dim = rho.dim();
    if (propagators.size() != families.size()) {
        throw Error(ErrorCode::DimensionMismatch, "need one propagator per projector family");
    }
    for (std::size_t slot = 0; slot < families.size(); ++slot) {
        check_unitary(propagators[slot], dim, slot);
        if (families[slot].empty()) throw Error(ErrorCode::IncompleteFamily, "empty projector family");
        ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
        for (const auto& e : families[slot]) {
            check_projector(e, dim, slot);
            sum += e;
        }
        const double gap = max_abs(sum - ComplexMatrix::Identity(dim, dim));
        if (gap > kStructureTol) {
            std::ostringstream os;
            os << "family " << slot << " sums to identity only within " << gap;
            throw Error(ErrorCode::IncompleteFamily, os.str());
        }
    }

    std::vector<HistoryTerm> terms;
    std::vector<std::size_t> choice(families.size(), 0);
    // Depth-first over slots, reusing partial chain products.
    std::vector<ComplexMatrix> partial(families.size() + 1, ComplexMatrix::Identity(dim, dim));
    auto recurse = [&](auto&& self, std::size_t slot) -> void {
        if (slot == families.size()) {
            terms.push_back({choice, chain_trace(partial[slot], rho)});
            return;
        }
        for (std::size_t m = 0; m < families[slot].size(); ++m) {
            choice[slot] = m;
            partial[slot + 1] = families[slot][m] * propagators[slot] * partial[slot];
            self(self, slot + 1);
        }
    };
    recurse(recurse, 0);
    return terms;
}

double exhaustive_family_total(const DensityMatrix& rho, const std::vector<ComplexMatrix>& propagators,
                               const std::vector<ProjectorFamily>& families) {
    double total = 0.0;
    for (const auto& term : enumerate_histories(rho, propagators, families)) total += term.probability;
    return total;
}

ProjectorFamily spectral_family(const HermitianObservable& s) {
    ProjectorFamily family;
    for (const auto& space : s.spectrum()) family.push_back(space.projector);
    return family;
}

}  // namespace bornlab
