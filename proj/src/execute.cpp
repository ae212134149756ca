#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bornlab/scenario.hpp"

namespace bornlab {

namespace {

// Shortest round-trip representation, independent of locale and stream state.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string join_path(const std::string& prefix, const char* suffix) { return prefix + suffix; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out << content;
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::size_t max_outcomes(const std::vector<WeightCurve>& curves) {
    std::size_t n = 0;
    for (const auto& c : curves)
        for (const auto& w : c.weights) n = std::max(n, w.size());
    return n;
}

nlohmann::json amplitude_json(const StateVector& psi) {
    nlohmann::json a = nlohmann::json::array();
    for (Index k = 0; k < psi.dim(); ++k) a.push_back({psi[k].real(), psi[k].imag()});
    return a;
}

std::string prefix_of(const Scenario& s) { return s.output.empty() ? s.name : s.output; }

}  // namespace

std::string emit_weight_curves(const std::vector<WeightCurve>& curves, const std::string& prefix) {
    const std::size_t n = max_outcomes(curves);
    std::string out = "trajectory_index,t";
    for (std::size_t k = 0; k < n; ++k) out += ",P" + std::to_string(k);
    out += "\n";
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.times.size(); ++i) {
            out += std::to_string(c.index) + "," + num(c.times[i]);
            for (std::size_t k = 0; k < n; ++k) out += "," + (k < c.weights[i].size() ? num(c.weights[i][k]) : "");
            out += "\n";
        }
    }
    const std::string path = join_path(prefix, "_weights.csv");
    write_file(path, out);
    return path;
}

std::string emit_born_bars(const EnsembleSummary& summary, const std::string& prefix) {
    std::string out = "outcome,eigenvalue,count,frequency,born_probability,binomial_stderr\n";
    std::size_t resolved = 0;
    for (const auto& [k, c] : summary.outcome_counts) resolved += c;
    for (std::size_t k = 0; k < summary.eigenvalues.size(); ++k) {
        const auto it = summary.outcome_counts.find(k);
        const std::size_t count = it == summary.outcome_counts.end() ? 0 : it->second;
        const double freq = resolved ? static_cast<double>(count) / static_cast<double>(resolved) : 0.0;
        const double p = k < summary.born_prediction.size() ? summary.born_prediction[k] : 0.0;
        const double se = resolved ? std::sqrt(p * (1.0 - p) / static_cast<double>(resolved)) : 0.0;
        out += std::to_string(k) + "," + num(summary.eigenvalues[k]) + "," + std::to_string(count) + "," + num(freq) +
               "," + num(p) + "," + num(se) + "\n";
    }
    const std::string path = join_path(prefix, "_born.csv");
    write_file(path, out);
    return path;
}

std::string emit_outcomes(const EnsembleSummary& summary, const std::string& prefix) {
    std::string out = "trajectory_index,outcome,hitting_time\n";
    for (const auto& t : summary.trajectories) {
        out += std::to_string(t.index) + ",";
        out += t.outcome ? std::to_string(*t.outcome) : "unresolved";
        out += ",";
        if (t.hitting_time) out += num(*t.hitting_time);
        out += "\n";
    }
    const std::string path = join_path(prefix, "_outcomes.csv");
    write_file(path, out);
    return path;
}

std::string emit_scaling(const ScalingFit& fit, const std::string& prefix) {
    std::string out = "delta_e,t_r_median,log_delta_e,log_t_r,log_t_r_fit,resolved,unresolved\n";
    for (const auto& p : fit.points) {
        const double x = std::log(p.delta_e);
        out += num(p.delta_e) + "," + num(p.t_r_median) + "," + num(x) + "," + num(std::log(p.t_r_median)) + "," +
               num(fit.intercept + fit.slope * x) + "," + std::to_string(p.resolved) + "," +
               std::to_string(p.unresolved) + "\n";
    }
    const std::string path = join_path(prefix, "_scaling.csv");
    write_file(path, out);
    return path;
}

std::string emit_scaling_fit(const ScalingFit& fit, const std::string& prefix) {
    std::string out = "slope,slope_stderr,intercept,sigma,points\n";
    if (!fit.points.empty()) {
        out += num(fit.slope) + "," + num(fit.slope_stderr) + "," + num(fit.intercept) + "," + num(fit.sigma) + "," +
               std::to_string(fit.points.size()) + "\n";
    }
    const std::string path = join_path(prefix, "_scaling_fit.csv");
    write_file(path, out);
    return path;
}

std::string emit_trajectory_jsonl(const TrajectoryRecord& record, const std::string& prefix) {
    std::string out;
    for (std::size_t i = 0; i < record.times.size(); ++i) {
        nlohmann::json line = {{"t", record.times[i]},
                               {"amplitudes", amplitude_json(record.states[i])},
                               {"projector_weights", record.projector_weights[i]}};
        out += line.dump() + "\n";
    }
    nlohmann::json tail = {{"steps", record.steps}};
    tail["outcome"] = record.outcome ? nlohmann::json(*record.outcome) : nlohmann::json(nullptr);
    tail["hitting_time"] = record.hitting_time ? nlohmann::json(*record.hitting_time) : nlohmann::json(nullptr);
    out += tail.dump() + "\n";
    const std::string path = join_path(prefix, "_trajectory.jsonl");
    write_file(path, out);
    return path;
}

std::string emit_summary_json(const EnsembleSummary& summary, const std::optional<LindbladComparison>& lindblad,
                              const std::optional<ChiSquareResult>& chi, const std::string& prefix) {
    using nlohmann::json;
    json doc;
    doc["seed"] = summary.seed;
    doc["n_trajectories"] = summary.n_trajectories;
    doc["eigenvalues"] = summary.eigenvalues;
    json counts = json::array();
    for (std::size_t k = 0; k < summary.eigenvalues.size(); ++k) {
        const auto it = summary.outcome_counts.find(k);
        counts.push_back(it == summary.outcome_counts.end() ? 0 : it->second);
    }
    doc["outcome_counts"] = counts;
    doc["unresolved"] = summary.unresolved;
    doc["born_prediction"] = summary.born_prediction;
    doc["hitting_time_median"] = summary.hitting_times.empty() ? json(nullptr) : json(median(summary.hitting_times));
    doc["sample_times"] = summary.sample_times;
    json rho = json::array();
    for (const auto& m : summary.mean_density) {
        json rows = json::array();
        for (Index i = 0; i < m.dim(); ++i) {
            json row = json::array();
            for (Index j = 0; j < m.dim(); ++j) row.push_back({m.matrix()(i, j).real(), m.matrix()(i, j).imag()});
            rows.push_back(row);
        }
        rho.push_back(rows);
    }
    doc["mean_density"] = rho;
    doc["mean_weights"] = summary.mean_weights;
    doc["weights_stderr"] = summary.weights_stderr;
    doc["mean_energy"] = summary.mean_energy;
    doc["energy_stderr"] = summary.energy_stderr;
    doc["mean_energy_variance"] = summary.mean_energy_variance;
    json failures = json::array();
    for (const auto& f : summary.failures)
        failures.push_back({{"trajectory_index", f.index}, {"code", to_string(f.code)}, {"message", f.message}});
    doc["failures"] = failures;
    if (lindblad) {
        doc["lindblad"] = {{"max_deviation", lindblad->max_deviation},
                           {"stat_error", lindblad->stat_error},
                           {"worst_time", lindblad->worst_time}};
    }
    if (chi) {
        doc["chi_square"] = {{"statistic", chi->statistic},
                             {"dof", chi->dof},
                             {"critical", chi->critical},
                             {"pass", chi->pass}};
    }
    const std::string path = join_path(prefix, "_summary.json");
    write_file(path, doc.dump(2) + "\n");
    return path;
}

namespace {

std::string emit_mean_curves(const EnsembleSummary& summary, const std::string& prefix) {
    const std::size_t n = summary.eigenvalues.size();
    std::string out = "t";
    for (std::size_t k = 0; k < n; ++k) out += ",mean_P" + std::to_string(k) + ",stderr_P" + std::to_string(k);
    out += ",mean_energy,energy_stderr,mean_energy_variance,energy_variance_stderr\n";
    for (std::size_t i = 0; i < summary.sample_times.size(); ++i) {
        out += num(summary.sample_times[i]);
        for (std::size_t k = 0; k < n; ++k)
            out += "," + num(summary.mean_weights[i][k]) + "," + num(summary.weights_stderr[i][k]);
        out += "," + num(summary.mean_energy[i]) + "," + num(summary.energy_stderr[i]) + "," +
               num(summary.mean_energy_variance[i]) + "," + num(summary.energy_variance_stderr[i]) + "\n";
    }
    const std::string path = prefix + "_mean.csv";
    write_file(path, out);
    return path;
}

std::string emit_histories(const std::vector<HistoryTerm>& terms, std::size_t slots, const std::string& prefix) {
    std::string out = "history_index";
    for (std::size_t k = 0; k < slots; ++k) out += ",slot" + std::to_string(k);
    out += ",probability\n";
    for (std::size_t i = 0; i < terms.size(); ++i) {
        out += std::to_string(i);
        for (std::size_t c : terms[i].choice) out += "," + std::to_string(c);
        out += "," + num(terms[i].probability) + "\n";
    }
    const std::string path = prefix + "_histories.csv";
    write_file(path, out);
    return path;
}

EnsembleOptions ensemble_options(const Scenario& s, unsigned threads) {
    EnsembleOptions o;
    o.trajectories = static_cast<std::size_t>(s.trajectories);
    o.t_max = s.t_max;
    o.trajectory.epsilon = s.epsilon;
    o.trajectory.sample_stride = static_cast<std::size_t>(s.sample_stride);
    o.trajectory.record_until = s.record_until;
    o.threads = threads;
    return o;
}

ExecutionReport run_simulate(const Scenario& s) {
    const StochasticProcessSpec spec = build_process(s);
    const StateVector psi0 = resolve_state(s.initial_state, s.hilbert_dim);
    TrajectoryOptions options;
    options.epsilon = s.epsilon;
    options.sample_stride = static_cast<std::size_t>(s.sample_stride);
    options.record_until = s.record_until;
    RandomStream stream(s.seed, 0);
    const TrajectoryRecord record = run_trajectory(spec, psi0, s.t_max, options, stream);

    const std::string prefix = prefix_of(s);
    ExecutionReport report;
    report.files.push_back(emit_trajectory_jsonl(record, prefix));
    report.files.push_back(emit_weight_curves({WeightCurve{0, record.times, record.projector_weights}}, prefix));
    std::ostringstream os;
    os << "steps: " << record.steps << "\n";
    if (record.outcome) {
        os << "outcome: " << *record.outcome << " (eigenvalue " << num(spec.pointer_observable().spectrum()[*record.outcome].value)
           << ") at t = " << num(*record.hitting_time) << "\n";
    } else {
        os << "outcome: unresolved at t_max = " << num(s.t_max) << "\n";
    }
    report.text = os.str();
    return report;
}

ExecutionReport run_ensemble_mode(const Scenario& s, unsigned threads) {
    const StochasticProcessSpec spec = build_process(s);
    const StateVector psi0 = resolve_state(s.initial_state, s.hilbert_dim);
    EnsembleOptions options = ensemble_options(s, threads);
    options.weight_curves = std::min<std::size_t>(options.trajectories, 20);
    const EnsembleSummary summary = run_ensemble(spec, psi0, options);

    std::optional<LindbladComparison> lindblad;
    if (summary.sample_times.size() > 1 && summary.n_trajectories > 1) lindblad = compare_mean_to_lindblad(summary, spec);
    std::optional<ChiSquareResult> chi;
    if (summary.unresolved == 0 && summary.n_trajectories > 0 && summary.eigenvalues.size() > 1) {
        chi = chi_square_born(summary);
    }

    const std::string prefix = prefix_of(s);
    ExecutionReport report;
    report.files.push_back(emit_summary_json(summary, lindblad, chi, prefix));
    report.files.push_back(emit_outcomes(summary, prefix));
    report.files.push_back(emit_born_bars(summary, prefix));
    report.files.push_back(emit_weight_curves(summary.weight_curves, prefix));
    report.files.push_back(emit_mean_curves(summary, prefix));
    report.passed = summary.failures.empty();

    std::ostringstream os;
    os << "trajectories: " << summary.n_trajectories << " completed, " << summary.failures.size() << " failed, "
       << summary.unresolved << " unresolved\n";
    std::size_t resolved = 0;
    for (const auto& [k, c] : summary.outcome_counts) resolved += c;
    for (std::size_t k = 0; k < summary.eigenvalues.size(); ++k) {
        const auto it = summary.outcome_counts.find(k);
        const std::size_t count = it == summary.outcome_counts.end() ? 0 : it->second;
        os << "  outcome " << k << " (eigenvalue " << num(summary.eigenvalues[k]) << "): " << count;
        if (resolved) os << " freq " << num(static_cast<double>(count) / static_cast<double>(resolved));
        os << " born " << num(summary.born_prediction[k]) << "\n";
    }
    if (!summary.hitting_times.empty()) os << "median hitting time: " << num(median(summary.hitting_times)) << "\n";
    if (chi) os << "chi2: " << num(chi->statistic) << " (dof " << chi->dof << ", critical " << num(chi->critical) << ") "
                << (chi->pass ? "pass" : "fail") << "\n";
    if (lindblad) os << "lindblad max deviation: " << num(lindblad->max_deviation) << " (bootstrap se "
                     << num(lindblad->stat_error) << ")\n";
    for (const auto& f : summary.failures)
        os << "failure: trajectory " << f.index << ": " << to_string(f.code) << ": " << f.message << "\n";
    report.text = os.str();
    return report;
}

ExecutionReport run_scaling_mode(const Scenario& s, unsigned threads) {
    const StochasticProcessSpec base = build_process(s);
    const StateVector psi0 = resolve_state(s.initial_state, s.hilbert_dim);
    const ScalingFit fit = estimate_reduction_scaling(gap_family(base, psi0, s.energy_scales), ensemble_options(s, threads));

    const std::string prefix = prefix_of(s);
    ExecutionReport report;
    report.files.push_back(emit_scaling(fit, prefix));
    report.files.push_back(emit_scaling_fit(fit, prefix));
    std::ostringstream os;
    for (const auto& p : fit.points)
        os << "delta_e " << num(p.delta_e) << ": median t_R " << num(p.t_r_median) << " (" << p.resolved
           << " resolved, " << p.unresolved << " unresolved)\n";
    os << "slope: " << num(fit.slope) << " +/- " << num(fit.slope_stderr) << "\n";
    report.text = os.str();
    return report;
}

ExecutionReport run_histories_mode(const Scenario& s) {
    const ComplexMatrix hm = resolve_operator(s.hamiltonian, s.hilbert_dim);
    const HermitianObservable h = spectral_decompose(hm);
    const DensityMatrix rho = DensityMatrix::from_pure(resolve_state(s.initial_state, s.hilbert_dim));
    std::vector<ComplexMatrix> propagators;
    std::vector<ProjectorFamily> families;
    for (const auto& slot : s.history_slots) {
        propagators.push_back(hamiltonian_step(h, slot.time));
        if (slot.family) {
            families.push_back(spectral_family(spectral_decompose(resolve_operator(*slot.family, s.hilbert_dim, &hm))));
        } else {
            ProjectorFamily f;
            for (const auto& p : slot.projectors) f.push_back(resolve_operator(p, s.hilbert_dim));
            families.push_back(std::move(f));
        }
    }
    const auto terms = enumerate_histories(rho, propagators, families);
    const std::string prefix = prefix_of(s);
    ExecutionReport report;
    report.files.push_back(emit_histories(terms, families.size(), prefix));
    double total = 0.0;
    for (const auto& t : terms) total += t.probability;
    std::ostringstream os;
    os << terms.size() << " histories, total probability " << num(total) << "\n";
    report.text = os.str();
    return report;
}

ExecutionReport run_verify_mode(unsigned threads) {
    ExecutionReport report;
    std::ostringstream os;
    std::size_t failed = 0;
    for (const auto& r : run_verify_suite(threads)) {
        os << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) os << ": " << r.detail;
        os << "\n";
        if (!r.passed) ++failed;
    }
    os << (failed ? std::to_string(failed) + " properties failed\n" : std::string("all properties passed\n"));
    report.passed = failed == 0;
    report.text = os.str();
    return report;
}

}  // namespace

ExecutionReport execute(const Scenario& scenario, unsigned threads) {
    if (auto problems = validate_scenario(scenario); !problems.empty()) {
        std::string msg = "scenario '" + scenario.name + "' is invalid:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw Error(ErrorCode::ValidationError, msg);
    }
    try {
        ExecutionReport report;
        switch (scenario.mode) {
            case Mode::Simulate: report = run_simulate(scenario); break;
            case Mode::Ensemble: report = run_ensemble_mode(scenario, threads); break;
            case Mode::Scaling: report = run_scaling_mode(scenario, threads); break;
            case Mode::Histories: report = run_histories_mode(scenario); break;
            case Mode::Verify: report = run_verify_mode(threads); break;
        }
        std::string warnings;
        for (const auto& w : scenario_warnings(scenario)) warnings += "warning: " + w + "\n";
        report.text = warnings + report.text;
        return report;
    } catch (const Error& e) {
        // Error::what() already carries the code name; keep only the message part.
        std::string what = e.what();
        const std::string head = std::string(to_string(e.code())) + ": ";
        if (what.rfind(head, 0) == 0) what.erase(0, head.size());
        throw Error(e.code(), "scenario '" + scenario.name + "' (" + to_string(scenario.mode) + "): " + what);
    }
}

}  // namespace bornlab
