#include "cwtrack/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>

namespace cwt {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

struct SolveArtifacts {
    ProblemExpansion expansion;
    QuadraticProgram qp;
    QpSolution solution;
    std::vector<double> effective_state_delays;
    std::vector<double> effective_input_delays;
    double rounding_max = 0.0;
};

VectorXd reference_at(const DelayedLqtProblem& p, double t) {
    return p.reference ? p.reference(t) : VectorXd::Zero(p.q);
}

struct WindowViolation {
    double worst = 0.0;                 // max over windows and sweep points
    std::vector<double> argmax_tau;     // per window; NaN when clean
    std::vector<double> violation;      // per window
};

WindowViolation dense_inequality_sweep(const DelayedLqtProblem& p, const WaveletBasis& basis,
                                       const CoeffVector& xbar, const CoeffVector& u) {
    WindowViolation out;
    const int per_sub = 10 * basis.M();
    for (const auto& w : p.constraints.window_inequalities) {
        double tau_a = w.t_begin / p.t_f, tau_b = w.t_end / p.t_f;
        std::set<double> taus{tau_a, tau_b};
        for (int n = 1; n <= basis.subintervals(); ++n) {
            double lo = (n - 1.0) / basis.subintervals();
            double hi = static_cast<double>(n) / basis.subintervals();
            if (hi <= tau_a + 1e-12 || lo >= tau_b - 1e-12) continue;
            for (int j = 1; j <= per_sub; ++j) {
                double xx = std::cos((2.0 * j - 1.0) * kPi / (2.0 * per_sub));
                double tau = (xx + 2.0 * n - 1.0) / std::ldexp(1.0, basis.k());
                if (tau >= tau_a - 1e-12 && tau <= tau_b + 1e-12) taus.insert(tau);
            }
        }
        double worst = -std::numeric_limits<double>::infinity();
        double at = std::numeric_limits<double>::quiet_NaN();
        for (double tau : taus) {
            double t = tau * p.t_f;
            double val = 0.0;
            if (w.state_coef)
                val += w.state_coef(t).dot(xbar.reconstruct(tau) + reference_at(p, t));
            if (w.input_coef) val += w.input_coef(t).dot(u.reconstruct(tau));
            double viol = val - w.bound(t);
            if (viol > worst) {
                worst = viol;
                at = tau;
            }
        }
        out.violation.push_back(worst);
        out.argmax_tau.push_back(at);
        out.worst = std::max(out.worst, worst);
    }
    out.worst = std::max(out.worst, 0.0);
    return out;
}

SolveArtifacts transcribe_and_solve(const DelayedLqtProblem& problem, int k, int M,
                                    bool round_delays, const SolveOptions& opts,
                                    const std::vector<double>& reference_breakpoints,
                                    double* rounding_max_out) {
    WaveletBasis basis(k, M);

    std::vector<int> n_state, n_input;
    double rounding_max = 0.0;
    GridCheck grid = validate_grid(problem, k);
    if (grid.ok) {
        n_state = grid.n_state;
        n_input = grid.n_input;
    } else if (round_delays) {
        DelayRounding rounding = cwt::round_delays(problem, k);
        n_state = rounding.n_state;
        n_input = rounding.n_input;
        rounding_max = rounding.max_abs_perturbation;
    } else {
        throw std::runtime_error(
            "delay grid misaligned: " +
            (grid.diagnostic.empty() ? std::string("use --round-delays") : grid.diagnostic));
    }
    if (rounding_max_out) *rounding_max_out = rounding_max;

    SolveArtifacts art{
        expand_problem(problem, basis, n_state, n_input, reference_breakpoints)};
    art.rounding_max = rounding_max;
    const double width = problem.t_f / basis.subintervals();
    for (int n : n_state) art.effective_state_delays.push_back(n * width);
    for (int n : n_input) art.effective_input_delays.push_back(n * width);

    // constraint generation: re-solve with the dense-sweep violation maxima
    // added as sample points until the sweep is clean (or the pass cap hits);
    // only the inequality rows change between passes
    std::vector<std::vector<double>> extra(problem.constraints.window_inequalities.size());
    const int q = problem.q, r = problem.r, s = basis.dim();
    art.qp = assemble(art.expansion);
    const int base_samples = problem.inequality_samples_per_subinterval > 0
                                 ? problem.inequality_samples_per_subinterval
                                 : basis.M();
    for (int pass = 0;; ++pass) {
        if (pass > 0) {
            ConstraintRows ineq = assemble_inequalities(basis, problem.constraints,
                                                        art.expansion, base_samples, &extra);
            art.qp.G_in = std::move(ineq.rows);
            art.qp.h_in = std::move(ineq.rhs);
        }
        art.solution = solve_convex_qp(art.qp, opts);
        if (art.solution.status != SolveStatus::Optimal || extra.empty()) break;
        CoeffVector xbar(basis, q, art.solution.chi.head(q * s));
        CoeffVector u(basis, r, art.solution.chi.tail(r * s));
        WindowViolation sweep = dense_inequality_sweep(problem, basis, xbar, u);
        bool added = false;
        for (size_t wi = 0; wi < sweep.violation.size(); ++wi) {
            if (sweep.violation[wi] > 1e-7 && std::isfinite(sweep.argmax_tau[wi])) {
                extra[wi].push_back(sweep.argmax_tau[wi]);
                added = true;
            }
        }
        if (!added || pass >= 40) break;
    }
    return art;
}

void write_csv_matrix(const std::string& path, const MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << "\n";
    }
}

} // namespace

RunResult solve_problem(const DelayedLqtProblem& problem, int k, int M, bool round_delays,
                        const SolveOptions& opts,
                        const std::vector<double>& reference_breakpoints) {
    RunResult res;
    problem.validate();
    SolveArtifacts art = transcribe_and_solve(problem, k, M, round_delays, opts,
                                              reference_breakpoints, nullptr);
    const auto& sol = art.solution;
    res.status = sol.status;
    res.iterations = sol.iterations;
    res.residuals = sol.residuals;
    res.unknowns = art.qp.num_vars();
    res.delay_rounding_max = art.rounding_max;
    res.chi = sol.chi;
    if (sol.status != SolveStatus::Optimal) {
        res.exit_code = kExitSolver;
        res.error = std::string("solver status: ") + to_string(sol.status);
        return res;
    }
    res.j_star_qp = sol.objective;

    const WaveletBasis& basis = art.expansion.basis;
    const int q = problem.q, r = problem.r, s = basis.dim();
    CoeffVector xbar(basis, q, sol.chi.head(q * s));
    CoeffVector u(basis, r, sol.chi.tail(r * s));
    CoeffVector xfull(basis, q, VectorXd(sol.chi.head(q * s) + art.expansion.Gamma));
    res.state_poly = to_piecewise_poly(xfull, problem.t_f);
    res.control_poly = to_piecewise_poly(u, problem.t_f);

    // Simpson cost of the reconstructed pair in original coordinates
    {
        int nsteps = basis.subintervals();
        while (nsteps < 512) nsteps *= 2;
        Trajectory traj;
        traj.times.resize(nsteps + 1);
        traj.states.resize(q, nsteps + 1);
        traj.controls.resize(r, nsteps + 1);
        for (int i = 0; i <= nsteps; ++i) {
            double tau = static_cast<double>(i) / nsteps;
            double t = tau * problem.t_f;
            traj.times[i] = t;
            traj.states.col(i) = xbar.reconstruct(tau) + reference_at(problem, t);
            traj.controls.col(i) = u.reconstruct(tau);
        }
        res.j_star_quadrature = evaluate_cost(problem, traj);
    }

    res.constraint_violation_max = dense_inequality_sweep(problem, basis, xbar, u).worst;
    return res;
}

RunResult run(const RunConfig& config) {
    RunResult res;

    ProblemDocument doc;
    try {
        doc = parse_problem_file(config.problem_path);
    } catch (const std::exception& e) {
        res.exit_code = kExitParse;
        res.error = e.what();
        return res;
    }
    const DelayedLqtProblem& problem = doc.problem;

    int k = config.k > 0 ? config.k : doc.default_k;
    int M = config.M > 0 ? config.M : doc.default_M;
    if (k < 2 || M < 3) {
        res.exit_code = kExitParse;
        res.error = "resolution not specified: pass --k/--M or put k/M in the document";
        return res;
    }

    // grid validation surfaces as its own exit code
    GridCheck grid = validate_grid(problem, k);
    if (!grid.ok && !config.round_delays) {
        res.exit_code = kExitGrid;
        res.error = "delay grid misaligned at k = " + std::to_string(k) +
                    (grid.smallest_admissible_k > 0
                         ? "; smallest admissible k = " + std::to_string(grid.smallest_admissible_k)
                         : "; " + grid.diagnostic) +
                    " (or rerun with --round-delays)";
        return res;
    }

    SolveOptions opts;
    opts.tol = config.tol;
    opts.max_iter = config.max_iter;

    std::optional<SolveArtifacts> art_opt;
    try {
        art_opt = transcribe_and_solve(problem, k, M, config.round_delays, opts,
                                       doc.reference_breakpoints, nullptr);
    } catch (const std::exception& e) {
        res.exit_code = kExitParse;
        res.error = e.what();
        return res;
    }
    SolveArtifacts& art = *art_opt;

    res.status = art.solution.status;
    res.iterations = art.solution.iterations;
    res.residuals = art.solution.residuals;
    res.unknowns = art.qp.num_vars();
    res.delay_rounding_max = art.rounding_max;
    res.chi = art.solution.chi;

    fs::path out_dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::exists(out_dir)) {
        res.exit_code = kExitIo;
        res.error = "cannot create output directory " + out_dir.string();
        return res;
    }

    const WaveletBasis& basis = art.expansion.basis;
    const int q = problem.q, r = problem.r, s = basis.dim();

    if (config.dump_opmats) {
        write_csv_matrix((out_dir / "opmat_P.csv").string(), integration_matrix(basis));
        write_csv_matrix((out_dir / "opmat_C.csv").string(), gram_matrix(basis));
        write_csv_matrix((out_dir / "opmat_E1.csv").string(), endpoint_outer(basis));
        for (size_t i = 0; i < art.expansion.n_state.size(); ++i)
            write_csv_matrix((out_dir / ("opmat_D_state" + std::to_string(i) + ".csv")).string(),
                             delay_matrix(basis, art.expansion.n_state[i]));
        for (size_t i = 0; i < art.expansion.n_input.size(); ++i)
            write_csv_matrix((out_dir / ("opmat_D_input" + std::to_string(i) + ".csv")).string(),
                             delay_matrix(basis, art.expansion.n_input[i]));
    }
    if (config.dump_qp) {
        write_csv_matrix((out_dir / "qp_H.csv").string(), art.qp.H);
        write_csv_matrix((out_dir / "qp_Aeq.csv").string(), art.qp.A_eq);
        write_csv_matrix((out_dir / "qp_beq.csv").string(), art.qp.b_eq);
        if (art.qp.G_in.rows() > 0) {
            write_csv_matrix((out_dir / "qp_Gin.csv").string(), art.qp.G_in);
            write_csv_matrix((out_dir / "qp_hin.csv").string(), art.qp.h_in);
        }
    }

    if (art.solution.status != SolveStatus::Optimal) {
        res.exit_code = kExitSolver;
        res.error = std::string("solver status: ") + to_string(art.solution.status);
        json summary;
        summary["status"] = to_string(art.solution.status);
        summary["error"] = res.error;
        std::ofstream out(out_dir / "summary.json");
        out << summary.dump(2) << "\n";
        return res;
    }

    res.j_star_qp = art.solution.objective;

    CoeffVector xbar(basis, q, art.solution.chi.head(q * s));
    CoeffVector u(basis, r, art.solution.chi.tail(r * s));
    CoeffVector xfull(basis, q, VectorXd(art.solution.chi.head(q * s) + art.expansion.Gamma));
    res.state_poly = to_piecewise_poly(xfull, problem.t_f);
    res.control_poly = to_piecewise_poly(u, problem.t_f);

    // reconstructed trajectory at the export density (odd count for Simpson)
    int nsamp = std::max(config.samples, 2 * basis.subintervals());
    if (nsamp % 2 == 1) ++nsamp;
    Trajectory recon;
    recon.times.resize(nsamp + 1);
    recon.states.resize(q, nsamp + 1);
    recon.controls.resize(r, nsamp + 1);
    for (int i = 0; i <= nsamp; ++i) {
        double tau = static_cast<double>(i) / nsamp;
        double t = tau * problem.t_f;
        recon.times[i] = t;
        recon.states.col(i) = xbar.reconstruct(tau) + reference_at(problem, t);
        recon.controls.col(i) = u.reconstruct(tau);
    }
    res.j_star_quadrature = evaluate_cost(problem, recon);
    res.constraint_violation_max = dense_inequality_sweep(problem, basis, xbar, u).worst;

    // solution.csv: t, x1..xq, u1..ur, r1..rq, e (Euclidean tracking error)
    {
        std::ofstream out(out_dir / "solution.csv");
        if (!out) {
            res.exit_code = kExitIo;
            res.error = "cannot write solution.csv";
            return res;
        }
        out.precision(12);
        out << "t";
        for (int c = 1; c <= q; ++c) out << ",x" << c;
        for (int c = 1; c <= r; ++c) out << ",u" << c;
        for (int c = 1; c <= q; ++c) out << ",r" << c;
        out << ",e\n";
        for (int i = 0; i <= nsamp; ++i) {
            double t = recon.times[i];
            VectorXd rv = reference_at(problem, t);
            out << t;
            for (int c = 0; c < q; ++c) out << "," << recon.states(c, i);
            for (int c = 0; c < r; ++c) out << "," << recon.controls(c, i);
            for (int c = 0; c < q; ++c) out << "," << rv[c];
            out << "," << (recon.states.col(i) - rv).norm() << "\n";
        }
    }

    if (config.oracle_check) {
        int nsteps = basis.subintervals();
        while (nsteps < 512) nsteps *= 2;
        double step = problem.t_f / nsteps;
        auto control_fn = [&](double t) {
            return u.reconstruct(std::min(std::max(t / problem.t_f, 0.0), 1.0));
        };
        Trajectory oracle = integrate_dde(problem, control_fn, step,
                                          art.effective_state_delays,
                                          art.effective_input_delays);
        OracleReport rep;
        rep.j_star = evaluate_cost(problem, oracle);
        CompareReport cmp = compare(*res.state_poly, oracle, problem.compat_continuity);
        for (int c = 0; c < q; ++c) {
            double scale = std::max(cmp.oracle_scale[c], 1e-12);
            rep.max_rel_sup_error = std::max(rep.max_rel_sup_error, cmp.sup_error[c] / scale);
        }
        rep.max_interface_jump = cmp.max_interface_jump;
        res.oracle = rep;

        std::ofstream out(out_dir / "oracle.csv");
        out.precision(12);
        out << "t";
        for (int c = 1; c <= q; ++c) out << ",x" << c;
        for (int c = 1; c <= r; ++c) out << ",u" << c;
        out << "\n";
        for (int i = 0; i < oracle.times.size(); ++i) {
            out << oracle.times[i];
            for (int c = 0; c < q; ++c) out << "," << oracle.states(c, i);
            for (int c = 0; c < r; ++c) out << "," << oracle.controls(c, i);
            out << "\n";
        }
    }

    if (config.gnuplot) {
        std::ofstream out(out_dir / "plot.gp");
        out << "set datafile separator ','\n";
        out << "set key autotitle columnhead\n";
        out << "set xlabel 't'\n";
        out << "plot ";
        for (int c = 0; c < q; ++c)
            out << "'solution.csv' using 1:" << (2 + c) << " with lines, ";
        for (int c = 0; c < q; ++c)
            out << "'solution.csv' using 1:" << (2 + q + r + c) << " with lines dashtype 2"
                << (c + 1 < q ? ", " : "\n");
        out << "pause -1\n";
    }

    // summary.json (timestamp on its own line; everything else deterministic)
    {
        json summary;
        summary["problem"] = fs::path(config.problem_path).filename().string();
        summary["k"] = k;
        summary["M"] = M;
        summary["unknowns"] = res.unknowns;
        summary["j_star_qp"] = res.j_star_qp;
        summary["j_star_quadrature"] = res.j_star_quadrature;
        summary["solver"] = {
            {"status", to_string(res.status)},
            {"iterations", res.iterations},
            {"residuals",
             {{"stationarity", res.residuals.stationarity},
              {"primal_eq", res.residuals.primal_eq},
              {"primal_in", res.residuals.primal_in},
              {"complementarity", res.residuals.complementarity}}},
        };
        summary["constraint_violation_max"] = res.constraint_violation_max;
        if (res.delay_rounding_max > 0.0)
            summary["delay_rounding_perturbation"] = res.delay_rounding_max;
        if (res.oracle) {
            summary["oracle"] = {{"j_star", res.oracle->j_star},
                                 {"max_rel_sup_error", res.oracle->max_rel_sup_error},
                                 {"max_interface_jump", res.oracle->max_interface_jump}};
        }
        auto now = std::chrono::system_clock::now().time_since_epoch();
        summary["timestamp"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
        std::ofstream out(out_dir / "summary.json");
        if (!out) {
            res.exit_code = kExitIo;
            res.error = "cannot write summary.json";
            return res;
        }
        out << summary.dump(2) << "\n";
    }

    if (!config.quiet) {
        std::cout << "J* (qp) = " << res.j_star_qp
                  << "  J* (quadrature) = " << res.j_star_quadrature
                  << "  status = " << to_string(res.status) << "\n";
    }
    res.exit_code = kExitOk;
    return res;
}

} // namespace cwt
