#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "bornlab/lindblad.hpp"
#include "test_support.hpp"

using namespace bornlab;

namespace {

LindbladSpec make_spec(const ComplexMatrix& h, std::vector<ComplexMatrix> ops, double sigma) {
    LindbladSpec spec;
    spec.hamiltonian = spectral_decompose(h);
    for (const auto& a : ops) spec.collapse_ops.push_back(spectral_decompose(a));
    spec.sigma = sigma;
    return spec;
}

// Generator on column-major vec(rho): vec(X rho Y) = (Y^T kron X) vec(rho).
ComplexMatrix superoperator(const LindbladSpec& spec) {
    const Index n = spec.dim();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const ComplexMatrix& h = spec.hamiltonian.matrix();
    ComplexMatrix l = Complex(0, -1) * (Eigen::kroneckerProduct(id, h).eval() -
                                        Eigen::kroneckerProduct(h.transpose(), id).eval());
    for (const auto& op : spec.collapse_ops) {
        const ComplexMatrix a = op.matrix();
        const ComplexMatrix a2 = a * a;
        const ComplexMatrix double_comm = Eigen::kroneckerProduct(id, a2).eval() -
                                          2.0 * Eigen::kroneckerProduct(a.transpose(), a).eval() +
                                          Eigen::kroneckerProduct(a2.transpose(), id).eval();
        l -= spec.sigma * spec.sigma / 8.0 * double_comm;
    }
    return l;
}

ComplexMatrix exact_evolution(const ComplexMatrix& rho0, const LindbladSpec& spec, double t) {
    const Index n = rho0.rows();
    const ComplexMatrix propagator = (superoperator(spec) * Complex(t, 0)).exp();
    const ComplexVector v = propagator * Eigen::Map<const ComplexVector>(rho0.data(), n * n);
    return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

}  // namespace

TEST_CASE("right-hand side matches the superoperator and is traceless Hermitian") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + trial % 4;
        const LindbladSpec spec =
            make_spec(testing::hermitian(n, gen), {testing::hermitian(n, gen), testing::hermitian(n, gen)}, 0.9);
        const ComplexMatrix rho = testing::density(n, gen);
        const ComplexMatrix rhs = lindblad_rhs(rho, spec);
        const ComplexVector expected = superoperator(spec) * Eigen::Map<const ComplexVector>(rho.data(), n * n);
        CHECK(testing::max_abs(rhs - Eigen::Map<const ComplexMatrix>(expected.data(), n, n)) < 1e-12);
        CHECK(std::abs(rhs.trace()) < 1e-12);
        CHECK(testing::max_abs(rhs - rhs.adjoint()) < 1e-12);
    }
}

TEST_CASE("commuting states have zero right-hand side") {
    const LindbladSpec spec = make_spec(testing::diag({0.0, 1.0, 3.0}), {testing::diag({2.0, -1.0, 0.5})}, 2.0);
    CHECK(testing::max_abs(lindblad_rhs(DensityMatrix::from_matrix(testing::diag({0.2, 0.3, 0.5})), spec)) == 0.0);
}

TEST_CASE("two-level closed form") {
    for (double omega : {0.5, 1.0, 2.0}) {
        const double sigma = 1.0;
        const LindbladSpec spec = make_spec(testing::diag({0.0, omega}), {testing::diag({0.0, omega})}, sigma);
        const DensityMatrix rho0 = DensityMatrix::from_pure(StateVector::normalized(testing::diag({1.0, 2.0}).diagonal()));
        const double rate = sigma * sigma * omega * omega / 8.0;
        std::vector<double> times;
        for (int k = 0; k <= 25; ++k) times.push_back(5.0 / rate * k / 25.0);
        const auto rhos = evolve_lindblad_sampled(rho0, spec, times, 1e-2);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const Complex expected = rho0.matrix()(0, 1) * std::exp(Complex(-rate * times[i], omega * times[i]));
            CHECK(std::abs(rhos[i].matrix()(0, 1) - expected) / std::abs(expected) < 1e-6);
            CHECK(std::abs(rhos[i].matrix()(0, 0) - rho0.matrix()(0, 0)) < 1e-12);
        }
    }
}

TEST_CASE("RK4 against the exact exponential") {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 2 + trial % 3;
        const LindbladSpec spec = make_spec(testing::hermitian(n, gen), {testing::hermitian(n, gen)}, 0.8);
        const DensityMatrix rho0 = DensityMatrix::from_matrix(testing::density(n, gen));
        const DensityMatrix rho = evolve_lindblad(rho0, spec, 2.0, 1e-3);
        CHECK(testing::max_abs(rho.matrix() - exact_evolution(rho0.matrix(), spec, 2.0)) < 1e-8);
        CHECK(std::abs(rho.matrix().trace() - 1.0) < 1e-10);
    }
}

TEST_CASE("sigma = 0 is unitary conjugation") {
    std::mt19937_64 gen(23);
    const HermitianObservable h = spectral_decompose(testing::hermitian(3, gen));
    LindbladSpec spec;
    spec.hamiltonian = h;
    spec.collapse_ops = {spectral_decompose(testing::hermitian(3, gen))};
    spec.sigma = 0.0;
    const DensityMatrix rho0 = DensityMatrix::from_matrix(testing::density(3, gen));
    const double t = 10.0 / h.spectral_radius();
    const DensityMatrix rho = evolve_lindblad(rho0, spec, t, 1e-3);
    CHECK(testing::max_abs(rho.matrix() - evolve_unitary(rho0, hamiltonian_step(h, t)).matrix()) < 1e-8);
    CHECK(testing::max_abs(evolve_lindblad(rho0, spec, 0.0, 1e-3).matrix() - rho0.matrix()) < 1e-15);
}

TEST_CASE("RK4 is fourth order") {
    std::mt19937_64 gen(24);
    const LindbladSpec spec = make_spec(testing::hermitian(3, gen), {testing::hermitian(3, gen)}, 1.0);
    const DensityMatrix rho0 = DensityMatrix::from_matrix(testing::density(3, gen));
    const double t = 1.0, dt = 0.05;
    const ComplexMatrix reference = evolve_lindblad(rho0, spec, t, dt / 8).matrix();
    const double e1 = testing::max_abs(evolve_lindblad(rho0, spec, t, dt).matrix() - reference);
    const double e2 = testing::max_abs(evolve_lindblad(rho0, spec, t, dt / 2).matrix() - reference);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.25));
}

TEST_CASE("energy-driven long-time limit is the Born mixture") {
    const LindbladSpec spec = make_spec(testing::diag({0.0, 1.0}), {testing::diag({0.0, 1.0})}, 1.0);
    const std::vector<Complex> amps{std::sqrt(0.3), std::sqrt(0.7)};
    const DensityMatrix rho = evolve_lindblad(DensityMatrix::from_pure(StateVector::from_list(amps)), spec, 300.0, 1e-2);
    CHECK(testing::max_abs(rho.matrix() - testing::diag({0.3, 0.7})) < 1e-12);
}

TEST_CASE("stationarity check") {
    SUBCASE("functions of H are stationary when A = H") {
        std::mt19937_64 gen(25);
        for (int trial = 0; trial < 100; ++trial) {
            const Index n = 2 + trial % 4;
            const ComplexMatrix hm = testing::hermitian(n, gen);
            const LindbladSpec spec = make_spec(hm, {hm}, 1.5);
            std::uniform_real_distribution<double> beta(0.1, 2.0);
            const double b = beta(gen);
            const ComplexMatrix f = spec.hamiltonian.apply_function([b](double e) { return Complex(std::exp(-b * e)); });
            const StationarityReport r = stationarity_check(DensityMatrix::from_matrix(f / f.trace().real(), 1e-10), spec, 1e-12);
            CHECK(r.is_stationary);
            CHECK(r.rhs_norm <= 1e-12);
            CHECK(r.hamiltonian_commutator <= 1e-6 * n);
            CHECK(r.collapse_commutator <= 1e-6 * n);
            CHECK(r.dissipation >= -1e-14);
        }
    }
    SUBCASE("|+x> under sigma_z") {
        const LindbladSpec spec = make_spec(testing::pauli_z(), {testing::pauli_z()}, 1.0);
        const StationarityReport r =
            stationarity_check(DensityMatrix::from_pure(StateVector::normalized(ComplexVector::Ones(2))), spec, 1e-12);
        CHECK_FALSE(r.is_stationary);
        CHECK(r.collapse_commutator == doctest::Approx(1.0));
        // (1/8) Tr XX^dag with X = [sigma_z, |+x><+x|] = [[0, 1], [-1, 0]]
        CHECK(r.dissipation == doctest::Approx(0.25));
    }
    SUBCASE("random states: non-negative dissipation and cyclic trace") {
        std::mt19937_64 gen(26);
        for (int trial = 0; trial < 100; ++trial) {
            const Index n = 2 + trial % 4;
            const LindbladSpec spec = make_spec(testing::hermitian(n, gen), {testing::hermitian(n, gen)}, 1.0);
            const StationarityReport r = stationarity_check(DensityMatrix::from_matrix(testing::density(n, gen)), spec, 1e-12);
            CHECK(r.dissipation > 0.0);
            CHECK(r.cyclic_trace <= 1e-12);
            CHECK_FALSE(r.is_stationary);
        }
    }
}
