#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bornlab/hilbert.hpp"
#include "test_support.hpp"

using namespace bornlab;
using testing::code;
using testing::error_code;

namespace {

StateVector plus_x() { return StateVector::normalized(ComplexVector::Ones(2)); }

Eigen::VectorXd sorted_eigenvalues(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("spectral decomposition of sigma_x") {
    const HermitianObservable s = spectral_decompose(testing::pauli_x());
    REQUIRE(s.outcome_count() == 2);
    CHECK(s.spectrum()[0].value == doctest::Approx(-1.0));
    CHECK(s.spectrum()[1].value == doctest::Approx(1.0));
    ComplexMatrix minus(2, 2), plus(2, 2);
    minus << 0.5, -0.5, -0.5, 0.5;
    plus << 0.5, 0.5, 0.5, 0.5;
    CHECK(testing::max_abs(s.spectrum()[0].projector - minus) < 1e-12);
    CHECK(testing::max_abs(s.spectrum()[1].projector - plus) < 1e-12);
}

TEST_CASE("identity(3) is one eigenspace of multiplicity 3") {
    const HermitianObservable s = spectral_decompose(ComplexMatrix::Identity(3, 3));
    REQUIRE(s.outcome_count() == 1);
    CHECK(s.spectrum()[0].value == doctest::Approx(1.0));
    CHECK(s.spectrum()[0].multiplicity == 3);
    CHECK(testing::max_abs(s.spectrum()[0].projector - ComplexMatrix::Identity(3, 3)) < 1e-14);
    CHECK(s.is_degenerate());
}

TEST_CASE("random Hermitian matrices are reconstructed from their projectors") {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + trial % 5;
        const ComplexMatrix m = testing::hermitian(n, gen);
        const HermitianObservable s = spectral_decompose(m);
        ComplexMatrix rebuilt = ComplexMatrix::Zero(n, n), total = ComplexMatrix::Zero(n, n);
        for (std::size_t a = 0; a < s.outcome_count(); ++a) {
            const auto& e = s.spectrum()[a];
            rebuilt += e.value * e.projector;
            total += e.projector;
            CHECK(testing::max_abs(e.projector * e.projector - e.projector) < 1e-10);
            CHECK(testing::max_abs(e.projector - e.projector.adjoint()) < 1e-10);
            for (std::size_t b = a + 1; b < s.outcome_count(); ++b)
                CHECK(testing::max_abs(e.projector * s.spectrum()[b].projector) < 1e-10);
            if (a > 0) CHECK(s.spectrum()[a - 1].value < e.value);
        }
        CHECK(testing::max_abs(rebuilt - m) < 1e-10);
        CHECK(testing::max_abs(total - ComplexMatrix::Identity(n, n)) < 1e-10);
    }
}

TEST_CASE("numerically split degeneracies are merged") {
    std::mt19937_64 gen(2);
    const ComplexMatrix u = testing::unitary(4, gen);
    ComplexMatrix m = u * testing::diag({2.0, 2.0, -1.0, 5.0}) * u.adjoint();
    m = 0.5 * (m + m.adjoint());
    const HermitianObservable s = spectral_decompose(m);
    REQUIRE(s.outcome_count() == 3);
    CHECK(s.spectrum()[0].value == doctest::Approx(-1.0));
    CHECK(s.spectrum()[1].multiplicity == 2);
    CHECK(s.spectrum()[1].projector.trace().real() == doctest::Approx(2.0));
}

TEST_CASE("non-Hermitian input is rejected") {
    ComplexMatrix m = testing::pauli_x();
    m(0, 1) = 2.0;
    CHECK(error_code([&] { spectral_decompose(m); }) == code(ErrorCode::NotHermitian));
}

TEST_CASE("expectation values") {
    const HermitianObservable z = spectral_decompose(testing::pauli_z());
    CHECK(std::abs(expectation(DensityMatrix::maximally_mixed(2), z)) < 1e-15);
    CHECK(expectation(DensityMatrix::from_matrix(testing::diag({0.25, 0.75})), z) == doctest::Approx(-0.5));
    CHECK(std::abs(expectation(DensityMatrix::from_pure(plus_x()), z)) < 1e-15);
    CHECK(std::abs(expectation(plus_x(), z)) < 1e-15);
    CHECK(error_code([&] { expectation(DensityMatrix::maximally_mixed(3), z); }) ==
          code(ErrorCode::DimensionMismatch));
}

TEST_CASE("Born probabilities") {
    const HermitianObservable z = spectral_decompose(testing::pauli_z());
    auto p = born_probabilities(plus_x(), z);
    REQUIRE(p.size() == 2);
    CHECK(p[0].eigenvalue == doctest::Approx(-1.0));
    CHECK(p[0].probability == doctest::Approx(0.5));
    CHECK(p[1].probability == doctest::Approx(0.5));

    p = born_probabilities(StateVector::basis(2, 0), z);
    CHECK(p[1].eigenvalue == doctest::Approx(1.0));
    CHECK(p[1].probability == doctest::Approx(1.0));
    CHECK(p[0].probability == 0.0);

    const std::vector<Complex> amps{std::sqrt(1.0 / 3.0), std::sqrt(2.0 / 3.0)};
    p = born_probabilities(StateVector::from_list(amps), z);
    CHECK(p[1].probability == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(p[0].probability == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + trial % 5;
        const HermitianObservable s = spectral_decompose(testing::hermitian(n, gen));
        const StateVector psi = StateVector::normalized(testing::vector(n, gen));
        double total = 0.0;
        for (const auto& o : born_probabilities(psi, s)) {
            CHECK(o.probability >= 0.0);
            total += o.probability;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        // oracle: squared moduli in the eigenbasis
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s.matrix());
        const ComplexVector c = es.eigenvectors().adjoint() * psi.amplitudes();
        CHECK(std::abs(born_probabilities(psi, s)[0].probability - std::norm(c[0])) < 1e-12);
    }
}

TEST_CASE("reduction") {
    const HermitianObservable z = spectral_decompose(testing::pauli_z());
    CHECK(reduce(plus_x(), z, 1).phase_distance(StateVector::basis(2, 0)) < 1e-14);
    const StateVector e = StateVector::basis(2, 1);
    CHECK(reduce(e, z, 0).phase_distance(e) < 1e-14);
    CHECK(error_code([&] { reduce(e, z, 1); }) == code(ErrorCode::ZeroProbabilityOutcome));

    const HermitianObservable s = spectral_decompose(testing::diag({1.0, 1.0, -1.0}));
    const std::vector<Complex> amps{Complex(0.3, 0.1), Complex(-0.5, 0.2), Complex(0.6, -0.4)};
    const StateVector psi = StateVector::from_list(amps);
    const StateVector r = reduce(psi, s, 1);  // eigenvalue +1
    const double keep = std::sqrt(std::norm(psi[0]) + std::norm(psi[1]));
    CHECK(std::abs(r[0] - psi[0] / keep) < 1e-14);
    CHECK(std::abs(r[1] - psi[1] / keep) < 1e-14);
    CHECK(std::abs(r[2]) < 1e-14);
    CHECK(born_probabilities(r, s)[1].probability == doctest::Approx(1.0));
    CHECK(reduce(r, s, 1).phase_distance(r) < 1e-14);
}

TEST_CASE("purity test") {
    CHECK(is_pure(DensityMatrix::from_pure(StateVector::basis(2, 0)), 1e-12));
    CHECK_FALSE(is_pure(DensityMatrix::maximally_mixed(2), 1e-12));
    CHECK_FALSE(is_pure(DensityMatrix::from_matrix(testing::diag({0.999, 0.001})), 1e-6));
}

TEST_CASE("density matrix validation") {
    CHECK(error_code([] { DensityMatrix::from_matrix(testing::diag({0.6, 0.6})); }) ==
          code(ErrorCode::InvalidArgument));
    CHECK(error_code([] { DensityMatrix::from_matrix(testing::diag({1.2, -0.2})); }) ==
          code(ErrorCode::PositivityLost));
    CHECK(error_code([] { DensityMatrix::from_matrix(testing::pauli_y() * Complex(0, 1) + testing::diag({0.5, 0.5})); }) ==
          code(ErrorCode::NotHermitian));
}

TEST_CASE("unitary evolution") {
    CHECK(evolve_unitary(StateVector::basis(2, 0), testing::pauli_x()).phase_distance(StateVector::basis(2, 1)) < 1e-15);
    const StateVector psi = plus_x();
    CHECK(evolve_unitary(psi, ComplexMatrix::Identity(2, 2)).phase_distance(psi) == 0.0);
    CHECK(error_code([] { evolve_unitary(StateVector::basis(2, 0), testing::diag({1.0, 2.0})); }) ==
          code(ErrorCode::NotUnitary));

    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + trial % 4;
        const DensityMatrix rho = DensityMatrix::from_matrix(testing::density(n, gen));
        const DensityMatrix out = evolve_unitary(rho, testing::unitary(n, gen));
        CHECK((sorted_eigenvalues(out.matrix()) - sorted_eigenvalues(rho.matrix())).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(out.matrix().trace().real() - 1.0) < 1e-12);
        CHECK(std::abs(out.purity() - rho.purity()) < 1e-12);
    }
}

TEST_CASE("Hamiltonian step") {
    const HermitianObservable z = spectral_decompose(testing::pauli_z());
    CHECK(testing::max_abs(hamiltonian_step(z, 0.0) - ComplexMatrix::Identity(2, 2)) == 0.0);
    CHECK(testing::max_abs(hamiltonian_step(z, std::numbers::pi) + ComplexMatrix::Identity(2, 2)) < 1e-15);

    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 2 + trial % 4;
        const HermitianObservable h = spectral_decompose(testing::hermitian(n, gen));
        const double t = 1.3;
        const ComplexMatrix u = hamiltonian_step(h, t);
        CHECK(unitarity_defect(u) < 1e-12);
        ComplexMatrix composed = ComplexMatrix::Identity(n, n);
        const std::size_t k = 1 + static_cast<std::size_t>(trial);
        const ComplexMatrix small = hamiltonian_step(h, t / static_cast<double>(k));
        for (std::size_t i = 0; i < k; ++i) composed = small * composed;
        CHECK(testing::max_abs(composed - u) < 1e-10);
        // oracle: Eigen's exponential via the eigensolver, independent of the grouping
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
        const ComplexVector phases =
            (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
        CHECK(testing::max_abs(es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() - u) < 1e-12);
        const DensityMatrix rho = DensityMatrix::from_matrix(testing::density(n, gen));
        CHECK(std::abs(expectation(evolve_unitary(rho, u), h) - expectation(rho, h)) < 1e-12);
    }
}

TEST_CASE("infinitesimal unitary") {
    const StateVector psi = StateVector::basis(2, 0);
    CHECK(testing::max_abs(infinitesimal_unitary(psi, ComplexVector::Zero(2)) - ComplexMatrix::Identity(2, 2)) == 0.0);
    for (double eps : {0.3, 1e-2, 1e-4}) {
        ComplexVector d = ComplexVector::Zero(2);
        d[1] = eps;
        const ComplexMatrix u = infinitesimal_unitary(psi, d);
        CHECK(unitarity_defect(u) <= 2 * eps * eps);
        CHECK((u * psi.amplitudes() - (psi.amplitudes() + d)).cwiseAbs().maxCoeff() == 0.0);
    }
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 100; ++trial) {
        const StateVector z = StateVector::normalized(testing::vector(4, gen));
        ComplexVector d = 1e-3 * testing::vector(4, gen);
        d -= z.amplitudes().dot(d) * z.amplitudes();
        const ComplexMatrix u = infinitesimal_unitary(z, d);
        CHECK((u * z.amplitudes() - (z.amplitudes() + d)).norm() < 1e-15);
    }
    ComplexVector bad(2);
    bad << 0.1, 0.0;
    CHECK(error_code([&] { infinitesimal_unitary(psi, bad); }) == code(ErrorCode::NotOrthogonal));
}

namespace {

double path_error(const StateVector& from, const StateVector& to, std::size_t k) {
    ComplexVector v = from.amplitudes();
    for (const auto& u : unitary_path(from, to, k)) v = u * v;
    const Complex overlap = to.amplitudes().dot(v);
    return (v - overlap / std::abs(overlap) * to.amplitudes()).norm();
}

}  // namespace

TEST_CASE("unitary path") {
    const StateVector same = StateVector::normalized(testing::diag({1.0, 2.0}).diagonal());
    for (const auto& u : unitary_path(same, same, 10))
        CHECK(testing::max_abs(u - ComplexMatrix::Identity(2, 2)) < 1e-15);

    // Each step lengthens the vector by a factor sqrt(1 + (theta/K)^2), so the
    // composed error is ~ theta^2 / (2K) with theta = pi/2.
    const StateVector zero = StateVector::basis(2, 0), one = StateVector::basis(2, 1);
    const double e100 = path_error(zero, one, 100);
    const double e200 = path_error(zero, one, 200);
    const double theta = std::numbers::pi / 2.0;
    CHECK(e100 == doctest::Approx(theta * theta / 200.0).epsilon(0.02));
    CHECK(e100 <= 0.013);
    CHECK(e200 / e100 == doctest::Approx(0.5).epsilon(0.2));

    // generic endpoints, relative phase absorbed
    std::mt19937_64 gen(7);
    const StateVector a = StateVector::normalized(testing::vector(3, gen));
    const StateVector b = StateVector::normalized(testing::vector(3, gen));
    CHECK(path_error(a, b, 400) / path_error(a, b, 200) == doctest::Approx(0.5).epsilon(0.2));
    for (const auto& u : unitary_path(a, b, 50)) CHECK(unitarity_defect(u) < 1e-3);
}

TEST_CASE("antipodal endpoints") {
    // dim 3: routes through |2>, the only basis vector orthogonal to both
    const StateVector a = StateVector::basis(3, 0), b = StateVector::basis(3, 1);
    const auto path = unitary_path(a, b, 200);
    CHECK(path.size() == 200);
    ComplexVector v = a.amplitudes();
    for (std::size_t k = 0; k < 100; ++k) v = path[k] * v;
    CHECK(std::abs(v[2]) / v.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(path_error(a, b, 200) < 0.03);

    const std::vector<Complex> full{1.0, 1.0, 1.0};
    const std::vector<Complex> other{1.0, -1.0, 0.0};
    CHECK(error_code([&] {
              unitary_path(StateVector::from_list(full), StateVector::from_list(other), 10);
          }) == code(ErrorCode::AntipodalAmbiguity));
    CHECK(error_code([&] { unitary_path(a, b, 1); }) == code(ErrorCode::AntipodalAmbiguity));
}

TEST_CASE("no single unitary sends one state to two orthogonal targets") {
    std::mt19937_64 gen(8);
    const ComplexVector up = StateVector::basis(2, 0).amplitudes(), down = StateVector::basis(2, 1).amplitudes();
    for (int trial = 0; trial < 1000; ++trial) {
        const Index n = 2 + trial % 3;
        const ComplexMatrix u = testing::unitary(n, gen);
        const ComplexVector x = testing::vector(n, gen), y = testing::vector(n, gen);
        CHECK(std::abs((u * x).dot(u * y) - x.dot(y)) <= 1e-10);
        if (n == 2) {
            const ComplexVector image = u * x;
            CHECK(std::max((image - up).norm(), (image - down).norm()) >= std::sqrt(0.5));
        }
    }
}

TEST_CASE("commutators") {
    CHECK(testing::max_abs(commutator(testing::pauli_x(), testing::pauli_y()) - Complex(0, 2) * testing::pauli_z()) <
          1e-15);
    const ComplexMatrix a = testing::pauli_x() + testing::pauli_z();
    CHECK(testing::max_abs(commutator(a, a)) == 0.0);
    CHECK(testing::max_abs(commutator(testing::diag({1, 2, 3}), testing::diag({-4, 0.5, 7}))) == 0.0);
    CHECK(error_code([] { commutator(testing::pauli_x(), ComplexMatrix::Identity(3, 3)); }) ==
          code(ErrorCode::DimensionMismatch));
}

TEST_CASE("phase distance ignores global phase") {
    const StateVector a = plus_x();
    const StateVector b = StateVector::normalized(a.amplitudes() * std::polar(1.0, 0.7));
    CHECK(a.phase_distance(b) < 1e-15);
    CHECK(a.phase_distance(StateVector::normalized(testing::diag({1.0, -1.0}).diagonal())) ==
          doctest::Approx(std::sqrt(2.0)));
}
