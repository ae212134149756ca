// histories.hpp
// Probability of a history of projected properties,
//
//   p = Tr[C rho C^dag],   C = E_n U_n ... E_1 U_1,
//
// where U_k propagates from the previous event time to t_k (Heisenberg
// picture made explicit).

#pragma once

#include <cstddef>
#include <vector>

#include "bornlab/hilbert.hpp"

namespace bornlab {

struct HistoryEvent {
    ComplexMatrix projector;   // E_k
    ComplexMatrix propagator;  // U_k, applied before E_k
};

struct History {
    DensityMatrix initial;
    std::vector<HistoryEvent> events;
};

double history_probability(const History& h);

// One complete orthogonal set of projectors per time slot.
using ProjectorFamily = std::vector<ComplexMatrix>;

struct HistoryTerm {
    std::vector<std::size_t> choice;  // family member index per slot
    double probability = 0.0;
};

// Probabilities of every history in the Cartesian product of the families,
// in lexicographic order of `choice` (last slot varies fastest).
std::vector<HistoryTerm> enumerate_histories(const DensityMatrix& rho, const std::vector<ComplexMatrix>& propagators,
                                             const std::vector<ProjectorFamily>& families);

// Sum of enumerate_histories; equals 1 for complete families.
double exhaustive_family_total(const DensityMatrix& rho, const std::vector<ComplexMatrix>& propagators,
                               const std::vector<ProjectorFamily>& families);

// Spectral projectors of an observable, a complete family by construction.
ProjectorFamily spectral_family(const HermitianObservable& s);

}  // namespace bornlab
