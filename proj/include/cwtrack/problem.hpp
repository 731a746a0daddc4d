#pragma once

#include "cwtrack/basis.hpp"
#include "cwtrack/opmat.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cwt {

using MatrixFunc = std::function<MatrixXd(double)>;
using VectorFunc = std::function<VectorXd(double)>;
using ScalarFunc = std::function<double(double)>;

MatrixFunc constant_matrix(MatrixXd m);
VectorFunc constant_vector(VectorXd v);

/// One delayed term of the dynamics: M(t) x(t - h) or M(t) u(t - h).
struct DelayedTerm {
    MatrixFunc coefficient;  // q x q (state) or q x r (input), original time
    double delay = 0.0;      // time units
};

struct PointEquality {
    double time = 0.0;               // original time in [0, t_f]
    VectorXd state_coef;             // length q (may be empty -> zero)
    VectorXd input_coef;             // length r (may be empty -> zero)
    double value = 0.0;              // on the unshifted variables
};

struct TerminalEquality {
    VectorXd state_coef;             // length q
    double value = 0.0;
};

struct WindowInequality {
    double t_begin = 0.0, t_end = 0.0;   // original time window
    VectorFunc state_coef;               // length-q row as a function of t (may be null)
    VectorFunc input_coef;               // length-r row (may be null)
    ScalarFunc bound;                    // upper bound function of t
};

struct ConstraintSet {
    std::vector<PointEquality> point_equalities;
    std::vector<TerminalEquality> terminal_equalities;
    std::vector<WindowInequality> window_inequalities;

    bool empty() const {
        return point_equalities.empty() && terminal_equalities.empty() &&
               window_inequalities.empty();
    }
};

/// Linear time-varying tracking problem with multiple state/input delays:
///   xdot = A(t) x + sum A_mu(t) x(t - h_mu) + B(t) u + sum B_nu(t) u(t - h_nu)
/// with quadratic index  1/2 xbar(tf)' T xbar(tf)
///                     + 1/2 int ( xbar' Q xbar + u' R u ) dt,
/// xbar = x - reference.  All functions take original (unscaled) time.
struct DelayedLqtProblem {
    int q = 0;                            // state dimension
    int r = 0;                            // control dimension
    MatrixFunc A;                         // q x q
    MatrixFunc B;                         // q x r
    std::vector<DelayedTerm> delayed_state_terms;
    std::vector<DelayedTerm> delayed_input_terms;
    VectorFunc initial_state_fn;          // f(t) on [-h_x, 0]; may be null
    VectorFunc initial_control_fn;        // g(t) on [-h_u, 0]; may be null
    VectorXd x0;                          // length q
    MatrixXd Q;                           // q x q, PSD
    MatrixFunc R;                         // r x r, PD for every sampled t
    bool R_time_varying = false;
    MatrixXd T;                           // q x q, PSD
    VectorFunc reference;                 // q components; null = zero
    double t_f = 1.0;
    ConstraintSet constraints;
    bool compat_continuity = true;
    /// Optional control-derivative coefficient: dynamics carry + B_u udot.
    std::optional<MatrixXd> control_derivative; // q x r
    /// Enforcement density for window inequalities; -1 means M per subinterval.
    int inequality_samples_per_subinterval = -1;

    double max_state_delay() const;
    double max_input_delay() const;

    /// Structural checks: dimensions, Q/T symmetric PSD, R(t) symmetric PD at
    /// assembly sample points, delays within [0, t_f], f(0) = x0 when both
    /// are supplied.  Throws std::invalid_argument on violation.
    void validate() const;
};

/// Problem data re-parameterized on tau in [0, 1].
struct NormalizedProblem {
    const DelayedLqtProblem* source = nullptr;
    double t_f = 1.0;
    std::vector<double> tau_state_delays;
    std::vector<double> tau_input_delays;

    MatrixXd A_at(double tau) const { return source->A(tau * t_f); }
    MatrixXd B_at(double tau) const { return source->B(tau * t_f); }
    VectorXd reference_at(double tau) const;
};

NormalizedProblem rescale(const DelayedLqtProblem& problem);

struct GridCheck {
    bool ok = false;
    std::vector<int> n_state;    // integer shifts per delayed state term
    std::vector<int> n_input;
    int smallest_admissible_k = -1;   // -1: none up to k = 16
    std::string diagnostic;
};

/// A delay aligns iff 2^(k-1) h / t_f is a nonnegative integer <= 2^(k-1).
GridCheck validate_grid(const DelayedLqtProblem& problem, int k);

/// Delay-rounding report for --round-delays.
struct DelayRounding {
    std::vector<int> n_state;
    std::vector<int> n_input;
    std::vector<double> state_perturbation;  // h_effective - h_requested
    std::vector<double> input_perturbation;
    double max_abs_perturbation = 0.0;
};

DelayRounding round_delays(const DelayedLqtProblem& problem, int k);

/// All wavelet-coefficient images of the problem data used by the QP.
struct ProblemExpansion {
    WaveletBasis basis;
    const DelayedLqtProblem* problem = nullptr;
    double t_f = 1.0;
    std::vector<int> n_state;                 // integer delay shifts
    std::vector<int> n_input;
    MatrixXd A_tilde;                         // qs x qs
    std::vector<MatrixXd> A_mu_tilde;         // qs x qs each
    MatrixXd B_tilde;                         // qs x rs
    std::vector<MatrixXd> B_nu_tilde;         // qs x rs each
    VectorXd Gamma;                           // qs
    VectorXd X0;                              // qs
    std::vector<VectorXd> F_mu;               // qs, zero past n_mu blocks
    std::vector<VectorXd> G_nu;               // rs
    std::optional<MatrixXd> R_tilde;          // rs x rs when R is time-varying
};

/// Expand every piece of problem data in the basis.  `shifts` must come from
/// validate_grid (exact alignment) or round_delays.
ProblemExpansion expand_problem(const DelayedLqtProblem& problem, const WaveletBasis& basis,
                                const std::vector<int>& n_state, const std::vector<int>& n_input,
                                const std::vector<double>& reference_breakpoints = {});

/// Output-tracking reformulation: appends p states z = C_y x + D_y u, puts
/// Q_y on the new block, and returns the B_u adjustment when D_y != 0.
struct OutputReform {
    DelayedLqtProblem problem;     // augmented, q grows by rows(C_y)
    bool has_derivative_adjustment = false;
};

OutputReform output_to_state_reform(const DelayedLqtProblem& problem, const MatrixXd& C_y,
                                    const MatrixXd& D_y, const MatrixXd& Q_y,
                                    const VectorFunc& r_y);

} // namespace cwt
