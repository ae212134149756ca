#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bornlab/histories.hpp"
#include "test_support.hpp"

using namespace bornlab;

namespace {

ComplexMatrix projector_onto(const ComplexVector& v) { return v * v.adjoint(); }

ComplexVector plus_x() { return ComplexVector::Ones(2) / std::sqrt(2.0); }

ComplexMatrix id(Index n) { return ComplexMatrix::Identity(n, n); }

// Random complete family: spectral projectors of a random Hermitian matrix,
// some eigenvectors merged into rank-2 projectors.
ProjectorFamily random_family(Index n, std::mt19937_64& gen) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(testing::hermitian(n, gen));
    const ComplexMatrix v = es.eigenvectors();
    ProjectorFamily family;
    Index k = 0;
    while (k < n) {
        const Index width = (k + 2 <= n && gen() % 2 == 0) ? 2 : 1;
        family.push_back(v.middleCols(k, width) * v.middleCols(k, width).adjoint());
        k += width;
    }
    return family;
}

// Pure-state route: squared norm of the projected, propagated vector.
double amplitude_route(const ComplexVector& psi, const std::vector<ComplexMatrix>& props,
                       const std::vector<const ComplexMatrix*>& events) {
    ComplexVector v = psi;
    for (std::size_t k = 0; k < events.size(); ++k) v = *events[k] * (props[k] * v);
    return v.squaredNorm();
}

}  // namespace

TEST_CASE("empty history has probability one") {
    std::mt19937_64 gen(31);
    History h{DensityMatrix::from_matrix(testing::density(3, gen)), {}};
    CHECK(history_probability(h) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("single events") {
    const DensityMatrix plus = DensityMatrix::from_pure(StateVector::normalized(plus_x()));
    CHECK(history_probability({plus, {{testing::diag({1.0, 0.0}), id(2)}}}) == doctest::Approx(0.5));
    CHECK(history_probability({plus, {{projector_onto(plus_x()), id(2)}}}) == doctest::Approx(1.0));

    SUBCASE("matches Born probabilities") {
        std::mt19937_64 gen(32);
        for (int trial = 0; trial < 50; ++trial) {
            const Index n = 2 + trial % 4;
            const StateVector psi = StateVector::normalized(testing::vector(n, gen));
            const HermitianObservable s = spectral_decompose(testing::hermitian(n, gen));
            const auto born = born_probabilities(psi, s);
            const ProjectorFamily family = spectral_family(s);
            REQUIRE(family.size() == born.size());
            for (std::size_t m = 0; m < family.size(); ++m) {
                const double p = history_probability({DensityMatrix::from_pure(psi), {{family[m], id(n)}}});
                CHECK(std::abs(p - born[m].probability) < 1e-12);
            }
        }
    }
}

TEST_CASE("orthogonal consecutive events have probability zero") {
    const DensityMatrix plus = DensityMatrix::from_pure(StateVector::normalized(plus_x()));
    History h{plus, {{testing::diag({1.0, 0.0}), id(2)}, {testing::diag({0.0, 1.0}), id(2)}}};
    CHECK(history_probability(h) == 0.0);
}

TEST_CASE("Hadamard between two sigma_z slots") {
    ComplexMatrix hadamard = testing::pauli_x() + testing::pauli_z();
    hadamard /= std::sqrt(2.0);
    const DensityMatrix ground = DensityMatrix::from_pure(StateVector::basis(2, 0));
    const ProjectorFamily z{testing::diag({1.0, 0.0}), testing::diag({0.0, 1.0})};
    const auto terms = enumerate_histories(ground, {id(2), hadamard}, {z, z});
    REQUIRE(terms.size() == 4);
    const double expected[] = {0.5, 0.5, 0.0, 0.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(terms[i].probability == doctest::Approx(expected[i]));
    CHECK(terms[1].choice == std::vector<std::size_t>{0, 1});
    CHECK(exhaustive_family_total(ground, {id(2), hadamard}, {z, z}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exhaustive families sum to one and match the amplitude route") {
    std::mt19937_64 gen(33);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 2 + trial % 4;
        const std::size_t slots = 1 + trial % 3;
        const StateVector psi = StateVector::normalized(testing::vector(n, gen));
        std::vector<ComplexMatrix> props;
        std::vector<ProjectorFamily> families;
        for (std::size_t s = 0; s < slots; ++s) {
            props.push_back(testing::unitary(n, gen));
            families.push_back(random_family(n, gen));
        }
        const auto terms = enumerate_histories(DensityMatrix::from_pure(psi), props, families);
        double total = 0.0;
        for (const auto& term : terms) {
            std::vector<const ComplexMatrix*> events;
            for (std::size_t s = 0; s < slots; ++s) events.push_back(&families[s][term.choice[s]]);
            CHECK(std::abs(term.probability - amplitude_route(psi.amplitudes(), props, events)) < 1e-12);
            CHECK(term.probability >= 0.0);
            total += term.probability;
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
}

TEST_CASE("adding an event never increases the probability") {
    std::mt19937_64 gen(34);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 3;
        const DensityMatrix rho = DensityMatrix::from_matrix(testing::density(n, gen));
        History h{rho, {}};
        double previous = 1.0;
        for (int k = 0; k < 4; ++k) {
            const ProjectorFamily family = random_family(n, gen);
            h.events.push_back({family[gen() % family.size()], testing::unitary(n, gen)});
            const double p = history_probability(h);
            CHECK(p <= previous + 1e-14);
            previous = p;
        }
    }
}

TEST_CASE("malformed inputs") {
    const DensityMatrix rho = DensityMatrix::from_pure(StateVector::basis(2, 0));
    const ProjectorFamily z{testing::diag({1.0, 0.0}), testing::diag({0.0, 1.0})};
    CHECK(testing::error_code([&] { enumerate_histories(rho, {id(2)}, {{testing::diag({1.0, 0.0})}}); }) ==
          testing::code(ErrorCode::IncompleteFamily));
    CHECK(testing::error_code([&] { enumerate_histories(rho, {id(2)}, {{}}); }) ==
          testing::code(ErrorCode::IncompleteFamily));
    CHECK(testing::error_code([&] { history_probability({rho, {{testing::diag({0.5, 0.0}), id(2)}}}); }) ==
          testing::code(ErrorCode::InvalidProjector));
    CHECK(testing::error_code([&] { history_probability({rho, {{testing::pauli_x(), id(2)}}}); }) ==
          testing::code(ErrorCode::InvalidProjector));
    CHECK(testing::error_code([&] { history_probability({rho, {{testing::diag({1.0, 0.0}), 2.0 * id(2)}}}); }) ==
          testing::code(ErrorCode::NotUnitary));
    CHECK(testing::error_code([&] { enumerate_histories(rho, {id(2), id(2)}, {z}); }) ==
          testing::code(ErrorCode::DimensionMismatch));
    CHECK(testing::error_code([&] { history_probability({rho, {{id(3), id(3)}}}); }) ==
          testing::code(ErrorCode::DimensionMismatch));
}

TEST_CASE("spectral family of a degenerate observable") {
    const ProjectorFamily family = spectral_family(spectral_decompose(testing::diag({1.0, 2.0, 1.0})));
    REQUIRE(family.size() == 2);
    ComplexMatrix sum = ComplexMatrix::Zero(3, 3);
    for (const auto& e : family) sum += e;
    CHECK(testing::max_abs(sum - id(3)) < 1e-12);
    CHECK(std::abs(family[0].trace().real() - 2.0) < 1e-12);
}
