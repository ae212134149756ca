#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "bornlab/scenario.hpp"

namespace bornlab {

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail << what;
        }
    }
};

ComplexMatrix random_matrix(Index n, RandomStream& rng) {
    ComplexMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
    return m;
}

ComplexMatrix random_hermitian(Index n, RandomStream& rng) {
    const ComplexMatrix m = random_matrix(n, rng);
    return 0.5 * (m + m.adjoint());
}

ComplexMatrix random_unitary(Index n, RandomStream& rng) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n, rng));
    return qr.householderQ();
}

StateVector random_state(Index n, RandomStream& rng) {
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = Complex(rng.next_gaussian(), rng.next_gaussian());
    return StateVector::normalized(v);
}

DensityMatrix random_density(Index n, RandomStream& rng) {
    const ComplexMatrix g = random_matrix(n, rng);
    ComplexMatrix r = g * g.adjoint();
    r /= r.trace().real();
    return DensityMatrix::projected(r);
}

ComplexMatrix diag(std::initializer_list<double> values) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
    Index k = 0;
    for (double v : values) m(k, k) = v, ++k;
    return m;
}

StochasticProcessSpec energy_driven_qubit(double sigma, double dt, std::uint64_t seed) {
    StochasticProcessSpec spec;
    spec.hamiltonian = spectral_decompose(diag({0.0, 1.0}));
    spec.collapse_ops = {spec.hamiltonian};
    spec.sigma = sigma;
    spec.dt = dt;
    spec.seed = seed;
    return spec;
}

using Property = std::function<void(Check&)>;

void prop_rng_known_answer(Check& c) {
    const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    c.expect(out == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u},
             "Philox4x32-10 zero-counter block differs from the reference vector");
}

void prop_gaussian_moments(Check& c) {
    RandomStream rng(2024, 0);
    const std::size_t n = 200000;
    const double dt = 1e-3;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = generate_noise(1, dt, rng).values[0];
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    c.detail << "mean " << mean << ", variance/dt " << var / dt;
    c.expect(std::abs(mean) <= 4.0 * std::sqrt(dt / n), "; mean outside 4 standard errors");
    c.expect(std::abs(var / dt - 1.0) <= 0.02, "; variance off by more than 2%");
}

void prop_spectral(Check& c) {
    RandomStream rng(11, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        const Index n = 2 + trial % 5;
        ComplexMatrix m = random_hermitian(n, rng);
        if (trial % 3 == 0) {
            // force a degenerate pair
            const ComplexMatrix u = random_unitary(n, rng);
            Eigen::VectorXd ev(n);
            for (Index k = 0; k < n; ++k) ev[k] = static_cast<double>(k / 2);
            m = u * ev.cast<Complex>().asDiagonal() * u.adjoint();
            m = 0.5 * (m + m.adjoint());
        }
        const HermitianObservable s = spectral_decompose(m);
        ComplexMatrix sum = ComplexMatrix::Zero(n, n), rebuilt = ComplexMatrix::Zero(n, n);
        for (const auto& e : s.spectrum()) {
            sum += e.projector;
            rebuilt += e.value * e.projector;
            worst = std::max(worst, max_abs(e.projector * e.projector - e.projector));
            for (const auto& f : s.spectrum())
                if (&e != &f) worst = std::max(worst, max_abs(e.projector * f.projector));
        }
        worst = std::max({worst, max_abs(sum - ComplexMatrix::Identity(n, n)), max_abs(rebuilt - m)});
        for (std::size_t k = 1; k < s.outcome_count(); ++k)
            c.expect(s.spectrum()[k - 1].value < s.spectrum()[k].value, "eigenvalues not ascending; ");
    }
    c.detail << "worst defect " << worst;
    c.expect(worst <= 1e-10, "; projector identities violated");
}

void prop_born(Check& c) {
    RandomStream rng(12, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = 2 + trial % 4;
        const HermitianObservable s = spectral_decompose(random_hermitian(n, rng));
        const StateVector psi = random_state(n, rng);
        double total = 0.0;
        for (const auto& o : born_probabilities(psi, s)) {
            c.expect(o.probability >= 0.0, "negative probability; ");
            total += o.probability;
        }
        worst = std::max(worst, std::abs(total - 1.0));
        const StateVector r = reduce(psi, s, static_cast<std::size_t>(trial) % s.outcome_count());
        worst = std::max(worst, std::abs(born_probabilities(r, s)[static_cast<std::size_t>(trial) % s.outcome_count()].probability - 1.0));
    }
    c.detail << "worst defect " << worst;
    c.expect(worst <= 1e-12, "; probabilities do not sum to 1 or reduction not sharp");
}

void prop_hamiltonian_step(Check& c) {
    RandomStream rng(13, 0);
    double energy = 0.0, semigroup = 0.0, unitary = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 2 + trial % 4;
        const HermitianObservable h = spectral_decompose(random_hermitian(n, rng));
        const DensityMatrix rho = random_density(n, rng);
        const ComplexMatrix u = hamiltonian_step(h, 0.7);
        unitary = std::max(unitary, unitarity_defect(u));
        energy = std::max(energy, std::abs(expectation(evolve_unitary(rho, u), h) - expectation(rho, h)));
        ComplexMatrix composed = ComplexMatrix::Identity(n, n);
        const ComplexMatrix small = hamiltonian_step(h, 0.7 / 16);
        for (int k = 0; k < 16; ++k) composed = small * composed;
        semigroup = std::max(semigroup, max_abs(composed - u));
    }
    c.detail << "energy drift " << energy << ", semigroup " << semigroup << ", unitarity " << unitary;
    c.expect(energy <= 1e-12 && semigroup <= 1e-10 && unitary <= 1e-12, "; tolerance exceeded");
}

void prop_unitary_no_go(Check& c) {
    RandomStream rng(14, 0);
    double worst = 0.0, closest = 10.0;
    const StateVector up = StateVector::basis(2, 0), down = StateVector::basis(2, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        const Index n = 2 + trial % 3;
        const ComplexMatrix u = random_unitary(n, rng);
        const StateVector a = random_state(n, rng), b = random_state(n, rng);
        const Complex before = a.amplitudes().dot(b.amplitudes());
        const Complex after = (u * a.amplitudes()).dot(u * b.amplitudes());
        worst = std::max(worst, std::abs(after - before));
        if (n == 2) {
            const ComplexVector image = u * a.amplitudes();
            closest = std::min(closest, std::max((image - up.amplitudes()).norm(), (image - down.amplitudes()).norm()));
        }
    }
    c.detail << "inner-product drift " << worst << ", best joint distance to both targets " << closest;
    c.expect(worst <= 1e-10, "; inner products not preserved");
    c.expect(closest >= std::sqrt(0.5) - 1e-12, "; a unitary came within 0.7 of two orthogonal targets");
}

void prop_infinitesimal_unitary(Check& c) {
    const StateVector psi = StateVector::basis(2, 0);
    double worst_map = 0.0;
    bool bound = true;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        ComplexVector dpsi = ComplexVector::Zero(2);
        dpsi[1] = eps;
        const ComplexMatrix u = infinitesimal_unitary(psi, dpsi);
        bound = bound && unitarity_defect(u) <= 2 * eps * eps;
        worst_map = std::max(worst_map, (u * psi.amplitudes() - (psi.amplitudes() + dpsi)).cwiseAbs().maxCoeff());
    }
    c.detail << "map error " << worst_map;
    c.expect(bound, "; unitarity defect above 2 eps^2");
    c.expect(worst_map == 0.0, "; U psi != psi + dpsi exactly");
}

void prop_unitary_path(Check& c) {
    const StateVector from = StateVector::basis(2, 0), to = StateVector::basis(2, 1);
    auto error = [&](std::size_t k) {
        ComplexVector v = from.amplitudes();
        for (const auto& u : unitary_path(from, to, k)) v = u * v;
        // v is not normalized; compare the raw image with the target ray
        const Complex overlap = to.amplitudes().dot(v);
        const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
        return (v - phase * to.amplitudes()).norm();
    };
    const double e100 = error(100), e200 = error(200);
    c.detail << "error(100) " << e100 << ", ratio " << e200 / e100;
    c.expect(std::abs(e200 / e100 - 0.5) <= 0.1, "; error not O(1/K)");
}

void prop_norm_cancellation(Check& c) {
    // With increments of exactly +-sqrt(dt) the dt and dW terms of d<z|z> cancel,
    // leaving an O(dt^(3/2)) defect.
    RandomStream rng(15, 0);
    StochasticProcessSpec spec;
    spec.hamiltonian = spectral_decompose(random_hermitian(3, rng));
    spec.collapse_ops = {spectral_decompose(random_hermitian(3, rng))};
    spec.sigma = 1.0;
    const StateVector z = random_state(3, rng);
    std::vector<double> logs_dt, logs_defect;
    for (double dt : {1e-3, 1e-4, 1e-5}) {
        spec.dt = dt;
        double total = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double sign = (rng.next_u32() & 1u) ? 1.0 : -1.0;
            total += std::abs(step_pure_detailed(z, spec, NoiseIncrement{{sign * std::sqrt(dt)}}).norm_defect);
        }
        logs_dt.push_back(std::log(dt));
        logs_defect.push_back(std::log(total / 200));
    }
    const double slope = (logs_defect.back() - logs_defect.front()) / (logs_dt.back() - logs_dt.front());
    c.detail << "log-log slope " << slope;
    c.expect(std::abs(slope - 1.5) <= 0.2, "; slope outside 1.5 +- 0.2");
}

void prop_fixed_point(Check& c) {
    StochasticProcessSpec spec = energy_driven_qubit(2.0, 1e-2, 0);
    const StateVector e1 = StateVector::basis(2, 1);
    const DriftDiffusion dd = drift_and_diffusion(e1, spec);
    const StateVector next = step_pure(e1, spec, NoiseIncrement{{0.37}});
    c.detail << "diffusion norm " << dd.diffusion[0].norm() << ", phase distance " << next.phase_distance(e1);
    c.expect(dd.diffusion[0].norm() == 0.0 && next.phase_distance(e1) <= 1e-12, "; eigenstate moved");
}

void prop_single_step_martingale(Check& c) {
    StochasticProcessSpec spec = energy_driven_qubit(1.0, 1e-2, 0);
    const StateVector z = StateVector::normalized(ComplexVector::Ones(2));
    RandomStream rng(16, 0);
    const std::size_t n = 100000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const StateVector next = step_pure(z, spec, generate_noise(1, spec.dt, rng));
        const double change = std::norm(next[1]) - 0.5;
        sum += change;
        sq += change * change;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    c.detail << "mean change " << mean << " (se " << se << ")";
    c.expect(std::abs(mean) <= 4.0 * se, "; weight drifts beyond 4 standard errors");
}

void prop_pure_density(Check& c) {
    RandomStream rng(17, 0);
    StochasticProcessSpec spec;
    spec.hamiltonian = spectral_decompose(random_hermitian(3, rng));
    for (int j = 0; j < 2; ++j) {
        const ComplexMatrix a = random_hermitian(3, rng);
        spec.collapse_ops.push_back(spectral_decompose(a / spectral_decompose(a).spectral_radius()));
    }
    // Starting from a pure state, the Euler density step lets the null eigenvalues
    // random-walk by ~(sigma^2 / 4) sqrt(2 dt t); keep that well inside the -1e-6 guard.
    spec.sigma = 0.1;
    double errors[2];
    for (int level = 0; level < 2; ++level) {
        spec.dt = level == 0 ? 2e-6 : 1e-6;
        StateVector z = StateVector::basis(3, 0);
        DensityMatrix rho = DensityMatrix::from_pure(z);
        RandomStream noise(18, 0);
        const std::size_t steps = level == 0 ? 2500 : 5000;
        double worst = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            const NoiseIncrement dw = generate_noise_refined(2, spec.dt, level == 0 ? 2 : 1, noise);
            z = step_pure(z, spec, dw);
            rho = step_density(rho, spec, dw);
            const ComplexMatrix outer = z.amplitudes() * z.amplitudes().adjoint();
            worst = std::max(worst, max_abs(rho.matrix() - outer));
        }
        errors[level] = worst;
    }
    c.detail << "max |rho - zz*| " << errors[0] << " at dt 2e-6, " << errors[1] << " at dt 1e-6";
    c.expect(errors[0] <= 1e-3 && errors[1] < errors[0], "; pure and density evolutions disagree");
}

void prop_lindblad_identities(Check& c) {
    RandomStream rng(19, 0);
    double trace = 0.0, cyclic = 0.0, min_dissipation = 1.0, commutators = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + trial % 4;
        LindbladSpec spec;
        spec.hamiltonian = spectral_decompose(random_hermitian(n, rng));
        spec.collapse_ops = {spec.hamiltonian, spectral_decompose(random_hermitian(n, rng))};
        spec.sigma = 1.3;
        const DensityMatrix rho = random_density(n, rng);
        trace = std::max(trace, std::abs(lindblad_rhs(rho, spec).trace()));
        const StationarityReport rep = stationarity_check(rho, spec, 1e-12);
        cyclic = std::max(cyclic, rep.cyclic_trace);
        min_dissipation = std::min(min_dissipation, rep.dissipation);

        LindbladSpec energy;
        energy.hamiltonian = spec.hamiltonian;
        energy.collapse_ops = {spec.hamiltonian};
        energy.sigma = 1.3;
        const ComplexMatrix f = energy.hamiltonian.apply_function([](double e) { return Complex(std::exp(-e)); });
        const DensityMatrix stationary = DensityMatrix::from_matrix(f / f.trace().real(), 1e-10);
        const StationarityReport s = stationarity_check(stationary, energy, 1e-12);
        c.expect(s.is_stationary, "f(H) not stationary; ");
        commutators = std::max({commutators, s.hamiltonian_commutator, s.collapse_commutator});
    }
    c.detail << "trace " << trace << ", cyclic " << cyclic << ", min dissipation " << min_dissipation
             << ", stationary commutators " << commutators;
    c.expect(trace <= 1e-12 && cyclic <= 1e-12, "; identities violated");
    c.expect(min_dissipation > 0.0, "; dissipation not positive for non-commuting states");
}

void prop_lindblad_closed_form(Check& c) {
    const double omega = 1.0, sigma = 1.0;
    LindbladSpec spec;
    spec.hamiltonian = spectral_decompose(diag({0.0, omega}));
    spec.collapse_ops = {spec.hamiltonian};
    spec.sigma = sigma;
    const DensityMatrix rho0 = DensityMatrix::from_pure(StateVector::normalized(ComplexVector::Ones(2)));
    const double horizon = 5.0 * 8.0 / (sigma * sigma * omega * omega);
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(horizon * k / 20.0);
    const auto rhos = evolve_lindblad_sampled(rho0, spec, times, 1e-2);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double expected = 0.5 * std::exp(-sigma * sigma * omega * omega * times[i] / 8.0);
        worst = std::max(worst, std::abs(std::abs(rhos[i].matrix()(0, 1)) - expected) / expected);
    }
    c.detail << "worst relative error " << worst;
    c.expect(worst <= 1e-6, "; closed form not matched");
}

void prop_histories(Check& c) {
    RandomStream rng(20, 0);
    double completeness = 0.0, born = 0.0, growth = -1.0;
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = 2 + trial % 3;
        const DensityMatrix rho = random_density(n, rng);
        const std::vector<ComplexMatrix> props = {random_unitary(n, rng), random_unitary(n, rng)};
        const std::vector<ProjectorFamily> families = {spectral_family(spectral_decompose(random_hermitian(n, rng))),
                                                       spectral_family(spectral_decompose(random_hermitian(n, rng)))};
        completeness = std::max(completeness, std::abs(exhaustive_family_total(rho, props, families) - 1.0));

        const StateVector psi = random_state(n, rng);
        const HermitianObservable s = spectral_decompose(random_hermitian(n, rng));
        const ComplexMatrix u = random_unitary(n, rng);
        const StateVector evolved = evolve_unitary(psi, u);
        const auto probs = born_probabilities(evolved, s);
        for (std::size_t k = 0; k < s.outcome_count(); ++k) {
            History h{DensityMatrix::from_pure(psi), {HistoryEvent{s.spectrum()[k].projector, u}}};
            const double p = history_probability(h);
            born = std::max(born, std::abs(p - probs[k].probability));
            h.events.push_back(HistoryEvent{families[0][0], props[0]});
            growth = std::max(growth, history_probability(h) - p);
        }
    }
    c.detail << "completeness " << completeness << ", born mismatch " << born << ", refinement growth " << growth;
    c.expect(completeness <= 1e-10 && born <= 1e-12 && growth <= 1e-12, "; tolerance exceeded");
}

void prop_chi_square(Check& c) {
    const auto fair = chi_square_counts({1000, 1000}, {0.5, 0.5});
    const auto biased = chi_square_counts({1300, 700}, {0.5, 0.5});
    c.detail << "fair " << fair.statistic << ", biased " << biased.statistic;
    c.expect(fair.statistic == 0.0 && fair.pass, "; fair coin rejected");
    c.expect(std::abs(biased.statistic - 180.0) <= 1e-9 && !biased.pass, "; biased counts not rejected");
}

void prop_ensemble_martingale(Check& c, unsigned threads) {
    const StochasticProcessSpec spec = energy_driven_qubit(1.0, 1e-3, 5);
    EnsembleOptions o;
    o.trajectories = 300;
    o.t_max = 2.0;
    o.trajectory.record_until = 2.0;
    o.trajectory.sample_stride = 250;
    o.threads = threads;
    const StateVector psi0 = StateVector::from_list(std::vector<Complex>{std::sqrt(0.3), std::sqrt(0.7)});
    const EnsembleSummary s = run_ensemble(spec, psi0, o);
    double worst = 0.0;
    bool variance_ok = true;
    for (std::size_t i = 0; i < s.sample_times.size(); ++i) {
        const double se = std::max(s.weights_stderr[i][1], 1e-15);
        worst = std::max(worst, std::abs(s.mean_weights[i][1] - 0.7) / se);
        if (i > 0 && s.mean_energy_variance[i] > s.mean_energy_variance[i - 1] + 2 * s.energy_variance_stderr[i])
            variance_ok = false;
    }
    c.detail << "worst |E<P_1>(t) - 0.7| / se " << worst;
    c.expect(worst <= 3.0 || s.sample_times.size() <= 1, "; eigenspace weight is not a martingale");
    c.expect(variance_ok, "; energy variance increased");
}

void prop_thread_determinism(Check& c, unsigned threads) {
    const StochasticProcessSpec spec = energy_driven_qubit(2.0, 2e-3, 99);
    const StateVector psi0 = StateVector::normalized(ComplexVector::Ones(2));
    auto run = [&](unsigned t) {
        EnsembleOptions o;
        o.trajectories = 48;
        o.t_max = 40.0;
        o.trajectory.record_until = 1.0;
        o.threads = t;
        o.bootstrap_resamples = 50;
        return run_ensemble(spec, psi0, o);
    };
    const EnsembleSummary a = run(1);
    const EnsembleSummary b = run(std::max(3u, threads));
    bool same = a.outcome_counts == b.outcome_counts && a.hitting_times == b.hitting_times &&
                a.mean_weights == b.mean_weights && a.weights_stderr == b.weights_stderr;
    for (std::size_t i = 0; same && i < a.mean_density.size(); ++i)
        same = a.mean_density[i].matrix() == b.mean_density[i].matrix();
    c.expect(same, "ensemble results differ between 1 and several threads");
}

void prop_scenario_round_trip(Check& c) {
    std::size_t n = 0;
    for (const auto& p : preset_catalog()) {
        if (p.kind != "scenario") continue;
        const Scenario s = scenario_preset(p.name);
        c.expect(parse_scenario(emit_scenario(s)) == s, "round trip changed preset " + p.name + "; ");
        ++n;
    }
    c.detail << n << " scenario presets";
}

}  // namespace

std::vector<PropertyResult> run_verify_suite(unsigned threads) {
    const std::vector<std::pair<std::string, Property>> properties = {
        {"rng-known-answer", prop_rng_known_answer},
        {"gaussian-increment-moments", prop_gaussian_moments},
        {"spectral-projector-identities", prop_spectral},
        {"born-probabilities-normalized", prop_born},
        {"hamiltonian-step-conserves-energy", prop_hamiltonian_step},
        {"unitary-no-go", prop_unitary_no_go},
        {"infinitesimal-unitary", prop_infinitesimal_unitary},
        {"unitary-path-first-order", prop_unitary_path},
        {"norm-defect-order", prop_norm_cancellation},
        {"eigenstate-fixed-point", prop_fixed_point},
        {"single-step-martingale", prop_single_step_martingale},
        {"pure-density-equivalence", prop_pure_density},
        {"lindblad-identities-and-stationarity", prop_lindblad_identities},
        {"lindblad-two-level-decoherence", prop_lindblad_closed_form},
        {"histories-completeness-and-born", prop_histories},
        {"chi-square-arithmetic", prop_chi_square},
        {"ensemble-weight-martingale", [threads](Check& c) { prop_ensemble_martingale(c, threads); }},
        {"thread-count-determinism", [threads](Check& c) { prop_thread_determinism(c, threads); }},
        {"scenario-round-trip", prop_scenario_round_trip},
    };
    std::vector<PropertyResult> results;
    for (const auto& [name, body] : properties) {
        Check c;
        try {
            body(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << " threw " << e.what();
        }
        results.push_back({name, c.ok, c.detail.str()});
    }
    return results;
}

}  // namespace bornlab
