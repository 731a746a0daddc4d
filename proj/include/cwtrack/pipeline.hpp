#pragma once

#include "cwtrack/dde.hpp"
#include "cwtrack/json_io.hpp"
#include "cwtrack/qp_solver.hpp"

#include <optional>
#include <string>

namespace cwt {

/// Exit codes of the `solve` subcommand.
enum ExitCode {
    kExitOk = 0,
    kExitParse = 2,
    kExitGrid = 3,
    kExitSolver = 4,
    kExitIo = 5,
};

struct RunConfig {
    std::string problem_path;
    int k = -1;                  // -1: take from the document
    int M = -1;
    std::string out_dir = ".";
    bool round_delays = false;
    bool oracle_check = false;
    int samples = 200;           // verification / export density
    bool dump_opmats = false;
    bool dump_qp = false;
    bool gnuplot = false;
    double tol = 1e-8;
    int max_iter = 100;
    bool quiet = false;
};

struct OracleReport {
    double j_star = 0.0;
    double max_rel_sup_error = 0.0;    // max over channels of sup-err / scale
    double max_interface_jump = 0.0;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string error;               // set when exit_code != 0
    double j_star_qp = 0.0;          // 1/2 chi' H chi
    double j_star_quadrature = 0.0;  // Simpson on the reconstructed pair
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    Residuals residuals;
    int unknowns = 0;
    double constraint_violation_max = 0.0;   // dense sweep, 10x density
    double delay_rounding_max = 0.0;
    std::optional<OracleReport> oracle;
    VectorXd chi;
    std::optional<PiecewisePoly> state_poly;    // of xbar + expanded reference
    std::optional<PiecewisePoly> control_poly;
};

/// Full pipeline: parse, validate the delay grid, expand, assemble, solve,
/// reconstruct, verify, write outputs (solution.csv, summary.json, optional
/// oracle.csv / dumps / plot script) under config.out_dir.
RunResult run(const RunConfig& config);

/// Library-level pipeline on an already-built problem (no file output).
RunResult solve_problem(const DelayedLqtProblem& problem, int k, int M, bool round_delays,
                        const SolveOptions& opts = {},
                        const std::vector<double>& reference_breakpoints = {});

} // namespace cwt
