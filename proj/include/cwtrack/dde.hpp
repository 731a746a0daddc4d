#pragma once

#include "cwtrack/problem.hpp"

namespace cwt {

/// Sampled state/control history on [0, t_f].
struct Trajectory {
    VectorXd times;      // strictly increasing, first 0, last t_f
    MatrixXd states;     // q x N
    MatrixXd controls;   // r x N
};

/// Fixed-step classical 4th-order integration of the delayed dynamics under
/// a given control, reading delayed states from the stored history (cubic
/// Hermite between nodes) and delayed controls from the control function
/// itself.  `step` must divide every delay and t_f.
///
/// When the problem carries a control-derivative matrix B_u, the smooth
/// variable z = x - B_u u is integrated and x recovered afterwards, which
/// keeps control jumps out of the integrator.
Trajectory integrate_dde(const DelayedLqtProblem& problem, const VectorFunc& control,
                         double step);

/// As above with the problem's delays overridden (rounded effective delays).
Trajectory integrate_dde(const DelayedLqtProblem& problem, const VectorFunc& control,
                         double step, const std::vector<double>& state_delays,
                         const std::vector<double>& input_delays);

/// 1/2 xbar(tf)' T xbar(tf) + 1/2 int (xbar' Q xbar + u' R u) dt by composite
/// Simpson on the trajectory grid; requires an odd sample count.
double evaluate_cost(const DelayedLqtProblem& problem, const Trajectory& trajectory);

struct CompareReport {
    VectorXd sup_error;           // per state channel
    VectorXd l2_error;
    VectorXd oracle_scale;        // sup |oracle| per channel
    double max_interface_jump = 0.0;   // reconstructed state, when compat was on
};

/// Reconstruction-vs-oracle errors, sampled on the oracle grid.
CompareReport compare(const PiecewisePoly& reconstructed_state, const Trajectory& oracle,
                      bool compat_enforced);

} // namespace cwt
