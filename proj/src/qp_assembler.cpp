#include "cwtrack/qp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cwt {

MatrixXd assemble_hessian(const ProblemExpansion& x) {
    const auto& p = *x.problem;
    const int q = p.q, r = p.r, s = x.basis.dim();
    const double t_f = x.t_f;

    MatrixXd C = gram_matrix(x.basis);
    MatrixXd E1 = endpoint_outer(x.basis);

    MatrixXd H = MatrixXd::Zero((q + r) * s, (q + r) * s);
    H.topLeftCorner(q * s, q * s) = t_f * kron(C, p.Q) + kron(E1, p.T);

    if (x.R_tilde) {
        MatrixXd CR = kron_lift(C, r) * (*x.R_tilde);
        H.bottomRightCorner(r * s, r * s) = t_f * 0.5 * (CR + CR.transpose());
    } else {
        H.bottomRightCorner(r * s, r * s) = t_f * kron(C, p.R(0.0));
    }

    // PSD guard: LLT of H + eps I succeeding bounds the spectrum above -eps.
    MatrixXd shifted = H + 1e-8 * MatrixXd::Identity(H.rows(), H.cols());
    Eigen::LLT<MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("assemble_hessian: result indefinite beyond -1e-8");
    return H;
}

DynamicsRows assemble_dynamics(const ProblemExpansion& x) {
    const auto& p = *x.problem;
    const int q = p.q, s = x.basis.dim();
    const double t_f = x.t_f;

    MatrixXd P = integration_matrix(x.basis);
    MatrixXd Phat_T = kron_lift(P.transpose(), q);

    DynamicsRows out;
    out.state_block = t_f * (Phat_T * x.A_tilde);
    out.control_block = t_f * (Phat_T * x.B_tilde);
    out.rhs = x.Gamma - x.X0 - t_f * (Phat_T * (x.A_tilde * x.Gamma));

    for (size_t i = 0; i < x.A_mu_tilde.size(); ++i) {
        MatrixXd D_T = delay_matrix(x.basis, x.n_state[i]).transpose();
        MatrixXd PA = t_f * (Phat_T * x.A_mu_tilde[i]);
        out.state_block += PA * kron_lift(D_T, q);
        out.rhs -= PA * (kron_lift(D_T, q) * x.Gamma) + PA * x.F_mu[i];
    }
    for (size_t i = 0; i < x.B_nu_tilde.size(); ++i) {
        MatrixXd D_T = delay_matrix(x.basis, x.n_input[i]).transpose();
        MatrixXd PB = t_f * (Phat_T * x.B_nu_tilde[i]);
        out.control_block += PB * kron_lift(D_T, p.r);
        out.rhs -= PB * x.G_nu[i];
    }
    out.state_block -= MatrixXd::Identity(q * s, q * s);

    if (p.control_derivative)
        apply_control_derivative_adjustment(out, *p.control_derivative, x.basis);
    return out;
}

void apply_control_derivative_adjustment(DynamicsRows& rows, const MatrixXd& B_u,
                                         const WaveletBasis& basis) {
    const int q = static_cast<int>(B_u.rows());
    const int r = static_cast<int>(B_u.cols());
    if (rows.control_block.rows() != q * basis.dim() ||
        rows.control_block.cols() != r * basis.dim())
        throw std::invalid_argument("control derivative adjustment: shape mismatch");
    for (int j = 0; j < basis.dim(); ++j)
        rows.control_block.block(j * q, j * r, q, r) += B_u;
}

MatrixXd assemble_compatibility(const WaveletBasis& basis, int q) {
    const int M = basis.M();
    const int nsub = basis.subintervals();
    MatrixXd rows = MatrixXd::Zero((nsub - 1) * q, basis.dim() * q);
    for (int i = 1; i < nsub; ++i) {
        double tau = static_cast<double>(i) / nsub;
        for (int m = 0; m < M; ++m) {
            double left = basis.eval_psi_unclamped(i, m, tau);
            double right = basis.eval_psi_unclamped(i + 1, m, tau);
            for (int c = 0; c < q; ++c) {
                rows((i - 1) * q + c, ((i - 1) * M + m) * q + c) = left;
                rows((i - 1) * q + c, (i * M + m) * q + c) = -right;
            }
        }
    }
    return rows;
}

namespace {

VectorXd reference_at(const ProblemExpansion& x, double tau) {
    const auto& p = *x.problem;
    return p.reference ? p.reference(tau * x.t_f) : VectorXd::Zero(p.q);
}

} // namespace

ConstraintRows assemble_point_constraints(const WaveletBasis& basis,
                                          const ConstraintSet& constraints,
                                          const ProblemExpansion& expansion) {
    const auto& p = *expansion.problem;
    const int q = p.q, r = p.r, s = basis.dim();
    std::vector<VectorXd> rows;
    std::vector<double> rhs;

    auto add_row = [&](double tau, const VectorXd& cx, const VectorXd& cu, double value) {
        VectorXd psi = basis.eval_vector(tau);
        VectorXd row = VectorXd::Zero((q + r) * s);
        double shift = 0.0;
        if (cx.size() > 0) {
            if (cx.size() != q) throw std::invalid_argument("point constraint: state row length");
            for (int j = 0; j < s; ++j)
                for (int c = 0; c < q; ++c) row[j * q + c] += psi[j] * cx[c];
            shift = cx.dot(reference_at(expansion, tau));
        }
        if (cu.size() > 0) {
            if (cu.size() != r) throw std::invalid_argument("point constraint: input row length");
            for (int j = 0; j < s; ++j)
                for (int c = 0; c < r; ++c) row[q * s + j * r + c] += psi[j] * cu[c];
        }
        rows.push_back(std::move(row));
        rhs.push_back(value - shift);
    };

    for (const auto& pe : constraints.point_equalities) {
        if (pe.time < 0.0 || pe.time > p.t_f)
            throw std::invalid_argument("point constraint: time outside [0, t_f]");
        add_row(pe.time / p.t_f, pe.state_coef, pe.input_coef, pe.value);
    }
    for (const auto& te : constraints.terminal_equalities)
        add_row(1.0, te.state_coef, VectorXd(), te.value);

    ConstraintRows out;
    out.rows = MatrixXd::Zero(static_cast<int>(rows.size()), (q + r) * s);
    out.rhs = VectorXd::Zero(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        out.rows.row(static_cast<int>(i)) = rows[i];
        out.rhs[static_cast<int>(i)] = rhs[i];
    }
    return out;
}

ConstraintRows assemble_inequalities(const WaveletBasis& basis, const ConstraintSet& constraints,
                                     const ProblemExpansion& expansion,
                                     int samples_per_subinterval,
                                     const std::vector<std::vector<double>>* extra_taus) {
    const auto& p = *expansion.problem;
    const int q = p.q, r = p.r, s = basis.dim();
    const int nsub = basis.subintervals();
    constexpr double kPi = 3.14159265358979323846;

    std::vector<VectorXd> rows;
    std::vector<double> rhs;

    for (size_t wi = 0; wi < constraints.window_inequalities.size(); ++wi) {
        const auto& w = constraints.window_inequalities[wi];
        if (w.t_begin < 0.0 || w.t_end > p.t_f || w.t_end <= w.t_begin)
            throw std::invalid_argument("window inequality: bad window");
        double tau_a = w.t_begin / p.t_f;
        double tau_b = w.t_end / p.t_f;

        std::set<double> taus{tau_a, tau_b};
        if (extra_taus && wi < extra_taus->size())
            for (double tau : (*extra_taus)[wi])
                if (tau >= tau_a - 1e-12 && tau <= tau_b + 1e-12) taus.insert(tau);
        for (int n = 1; n <= nsub; ++n) {
            double lo = static_cast<double>(n - 1) / nsub;
            double hi = static_cast<double>(n) / nsub;
            if (hi <= tau_a + 1e-12 || lo >= tau_b - 1e-12) continue;
            for (int j = 1; j <= samples_per_subinterval; ++j) {
                double xx = std::cos((2.0 * j - 1.0) * kPi / (2.0 * samples_per_subinterval));
                double tau = (xx + 2.0 * n - 1.0) / std::ldexp(1.0, basis.k());
                if (tau >= tau_a - 1e-12 && tau <= tau_b + 1e-12) taus.insert(tau);
            }
        }
        if (taus.empty()) throw std::invalid_argument("window inequality: empty sample set");

        for (double tau : taus) {
            double t = tau * p.t_f;
            VectorXd psi = basis.eval_vector(tau);
            VectorXd row = VectorXd::Zero((q + r) * s);
            double shift = 0.0;
            if (w.state_coef) {
                VectorXd cx = w.state_coef(t);
                if (cx.size() != q) throw std::invalid_argument("window inequality: state row length");
                for (int j = 0; j < s; ++j)
                    for (int c = 0; c < q; ++c) row[j * q + c] += psi[j] * cx[c];
                shift = cx.dot(reference_at(expansion, tau));
            }
            if (w.input_coef) {
                VectorXd cu = w.input_coef(t);
                if (cu.size() != r) throw std::invalid_argument("window inequality: input row length");
                for (int j = 0; j < s; ++j)
                    for (int c = 0; c < r; ++c) row[q * s + j * r + c] += psi[j] * cu[c];
            }
            rows.push_back(std::move(row));
            rhs.push_back(w.bound(t) - shift);
        }
    }

    ConstraintRows out;
    out.rows = MatrixXd::Zero(static_cast<int>(rows.size()), (q + r) * s);
    out.rhs = VectorXd::Zero(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        out.rows.row(static_cast<int>(i)) = rows[i];
        out.rhs[static_cast<int>(i)] = rhs[i];
    }
    return out;
}

QuadraticProgram assemble(const ProblemExpansion& x,
                          const std::vector<std::vector<double>>* extra_window_taus) {
    const auto& p = *x.problem;
    const int q = p.q, r = p.r, s = x.basis.dim();

    QuadraticProgram qp;
    qp.q = q;
    qp.r = r;
    qp.s = s;
    qp.t_f = x.t_f;
    qp.H = assemble_hessian(x);

    DynamicsRows dyn = assemble_dynamics(x);
    int n_rows = q * s;
    MatrixXd compat;
    if (p.compat_continuity) {
        compat = assemble_compatibility(x.basis, q);
        n_rows += static_cast<int>(compat.rows());
    }
    ConstraintRows pts = assemble_point_constraints(x.basis, p.constraints, x);
    n_rows += static_cast<int>(pts.rows.rows());

    qp.A_eq = MatrixXd::Zero(n_rows, (q + r) * s);
    qp.b_eq = VectorXd::Zero(n_rows);
    qp.A_eq.topLeftCorner(q * s, q * s) = dyn.state_block;
    qp.A_eq.block(0, q * s, q * s, r * s) = dyn.control_block;
    qp.b_eq.head(q * s) = dyn.rhs;
    int at = q * s;
    if (p.compat_continuity) {
        qp.A_eq.block(at, 0, compat.rows(), q * s) = compat;
        at += static_cast<int>(compat.rows());
    }
    if (pts.rows.rows() > 0) {
        qp.A_eq.block(at, 0, pts.rows.rows(), (q + r) * s) = pts.rows;
        qp.b_eq.segment(at, pts.rows.rows()) = pts.rhs;
    }

    int samples = p.inequality_samples_per_subinterval > 0
                      ? p.inequality_samples_per_subinterval
                      : x.basis.M();
    ConstraintRows ineq =
        assemble_inequalities(x.basis, p.constraints, x, samples, extra_window_taus);
    qp.G_in = std::move(ineq.rows);
    qp.h_in = std::move(ineq.rhs);
    return qp;
}

} // namespace cwt
