#pragma once

#include "cwtrack/problem.hpp"

namespace cwt {

/// min 1/2 chi' H chi  s.t.  A_eq chi = b_eq,  G_in chi <= h_in,
/// chi = [Xbar; U] of size (q + r) s.
struct QuadraticProgram {
    MatrixXd H;
    MatrixXd A_eq;
    VectorXd b_eq;
    MatrixXd G_in;        // 0 x n when empty
    VectorXd h_in;
    int q = 0, r = 0, s = 0;
    double t_f = 1.0;

    int num_vars() const { return (q + r) * s; }
};

/// Hessian of the transcribed index: state block t_f (C x Q) + E1 x T,
/// control block t_f (C x R), or the symmetrized product form for
/// time-varying R.  Throws if the symmetrized result is indefinite beyond
/// -1e-8.
MatrixXd assemble_hessian(const ProblemExpansion& expansion);

/// Dynamics rows over [Xbar; U] and their right-hand side.
struct DynamicsRows {
    MatrixXd state_block;    // qs x qs
    MatrixXd control_block;  // qs x rs
    VectorXd rhs;            // qs
};
DynamicsRows assemble_dynamics(const ProblemExpansion& expansion);

/// State-continuity rows at the 2^(k-1) - 1 interfaces, lifted over q
/// channels; right-hand side is zero.
MatrixXd assemble_compatibility(const WaveletBasis& basis, int q);

/// Point and terminal equality rows on the shifted variables.
struct ConstraintRows {
    MatrixXd rows;   // over [Xbar; U]
    VectorXd rhs;
};
ConstraintRows assemble_point_constraints(const WaveletBasis& basis,
                                          const ConstraintSet& constraints,
                                          const ProblemExpansion& expansion);

/// Window inequalities sampled at `samples_per_subinterval` Chebyshev-Gauss
/// points of every subinterval meeting the window, plus both endpoints.
/// `extra_taus`, when given, adds per-window sample points (normalized time);
/// the pipeline feeds dense-sweep violation maxima back through it.
ConstraintRows assemble_inequalities(const WaveletBasis& basis, const ConstraintSet& constraints,
                                     const ProblemExpansion& expansion,
                                     int samples_per_subinterval,
                                     const std::vector<std::vector<double>>* extra_taus = nullptr);

/// Adds the lifted control-derivative coefficient to the control block.
void apply_control_derivative_adjustment(DynamicsRows& rows, const MatrixXd& B_u,
                                         const WaveletBasis& basis);

/// Full assembly per the problem's flags and constraint set.
QuadraticProgram assemble(const ProblemExpansion& expansion,
                          const std::vector<std::vector<double>>* extra_window_taus = nullptr);

} // namespace cwt
