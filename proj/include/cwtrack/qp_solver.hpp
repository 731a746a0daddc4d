#pragma once

#include "cwtrack/qp.hpp"

namespace cwt {

enum class SolveStatus { Optimal, MaxIter, Infeasible, NumericalFailure };

const char* to_string(SolveStatus s);

struct Residuals {
    double stationarity = 0.0;
    double primal_eq = 0.0;
    double primal_in = 0.0;
    double complementarity = 0.0;

    double max() const;
};

struct QpSolution {
    VectorXd chi;
    VectorXd lambda_eq;
    VectorXd mu_in;
    double objective = 0.0;
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
    Residuals residuals;
    double tikhonov_shift = 0.0;   // nonzero when the KKT solve needed one
    int pruned_rows = 0;
    std::vector<double> merit_history;   // interior-point path only
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 100;
};

/// Equality-constrained path: symmetric indefinite factorization of the KKT
/// system with iterative refinement.  Redundant equality rows are pruned by
/// rank-revealing QR when the first factorization fails or leaves a large
/// residual; a Tikhonov ladder (1e-10 .. 1e-6 on H) covers persistent
/// singularity.
QpSolution solve_equality_qp(const QuadraticProgram& qp, const SolveOptions& opts = {});

/// Mehrotra predictor-corrector primal-dual interior point; falls back to
/// solve_equality_qp when there are no inequality rows.
QpSolution solve_convex_qp(const QuadraticProgram& qp, const SolveOptions& opts = {});

/// Recomputed from scratch; matches QpSolution::residuals to 1e-12.
Residuals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol);

} // namespace cwt
