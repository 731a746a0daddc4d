#include "cwtrack/problem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace cwt {

MatrixFunc constant_matrix(MatrixXd m) {
    return [m = std::move(m)](double) { return m; };
}

VectorFunc constant_vector(VectorXd v) {
    return [v = std::move(v)](double) { return v; };
}

double DelayedLqtProblem::max_state_delay() const {
    double h = 0.0;
    for (const auto& term : delayed_state_terms) h = std::max(h, term.delay);
    return h;
}

double DelayedLqtProblem::max_input_delay() const {
    double h = 0.0;
    for (const auto& term : delayed_input_terms) h = std::max(h, term.delay);
    return h;
}

namespace {

void require_psd(const MatrixXd& m, const std::string& name) {
    if (m.rows() != m.cols()) throw std::invalid_argument(name + " must be square");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument(name + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(name + " must be positive semi-definite");
}

} // namespace

void DelayedLqtProblem::validate() const {
    if (q < 1 || r < 1) throw std::invalid_argument("problem: q and r must be positive");
    if (t_f <= 0.0) throw std::invalid_argument("problem: t_f must be positive");
    if (!A || !B) throw std::invalid_argument("problem: A and B are required");
    if (x0.size() != q) throw std::invalid_argument("problem: x0 must have length q");
    if (A(0.0).rows() != q || A(0.0).cols() != q)
        throw std::invalid_argument("problem: A(t) must be q x q");
    if (B(0.0).rows() != q || B(0.0).cols() != r)
        throw std::invalid_argument("problem: B(t) must be q x r");
    require_psd(Q, "Q");
    require_psd(T, "T");
    if (!R) throw std::invalid_argument("problem: R is required");
    for (double t : {0.0, 0.25 * t_f, 0.5 * t_f, 0.75 * t_f, t_f}) {
        MatrixXd rt = R(t);
        if (rt.rows() != r || rt.cols() != r)
            throw std::invalid_argument("problem: R(t) must be r x r");
        if ((rt - rt.transpose()).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("problem: R(t) must be symmetric");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(rt);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw std::invalid_argument("problem: R(t) must be positive definite");
        if (!R_time_varying) break;
    }
    for (const auto& term : delayed_state_terms) {
        if (term.delay < 0.0 || term.delay > t_f)
            throw std::invalid_argument("problem: state delay outside [0, t_f]");
        MatrixXd m = term.coefficient(0.0);
        if (m.rows() != q || m.cols() != q)
            throw std::invalid_argument("problem: delayed state coefficient must be q x q");
    }
    for (const auto& term : delayed_input_terms) {
        if (term.delay < 0.0 || term.delay > t_f)
            throw std::invalid_argument("problem: input delay outside [0, t_f]");
        MatrixXd m = term.coefficient(0.0);
        if (m.rows() != q || m.cols() != r)
            throw std::invalid_argument("problem: delayed input coefficient must be q x r");
    }
    if (initial_state_fn && !delayed_state_terms.empty()) {
        VectorXd f0 = initial_state_fn(0.0);
        if (f0.size() != q) throw std::invalid_argument("problem: f(t) must have q components");
        if ((f0 - x0).cwiseAbs().maxCoeff() > 1e-8)
            throw std::invalid_argument("problem: f(0) and x0 disagree beyond 1e-8");
    }
    if (control_derivative &&
        (control_derivative->rows() != q || control_derivative->cols() != r))
        throw std::invalid_argument("problem: control derivative matrix must be q x r");
}

VectorXd NormalizedProblem::reference_at(double tau) const {
    if (!source->reference) return VectorXd::Zero(source->q);
    return source->reference(tau * t_f);
}

NormalizedProblem rescale(const DelayedLqtProblem& problem) {
    if (problem.t_f <= 0.0) throw std::invalid_argument("rescale: t_f must be positive");
    NormalizedProblem n;
    n.source = &problem;
    n.t_f = problem.t_f;
    for (const auto& term : problem.delayed_state_terms)
        n.tau_state_delays.push_back(term.delay / problem.t_f);
    for (const auto& term : problem.delayed_input_terms)
        n.tau_input_delays.push_back(term.delay / problem.t_f);
    return n;
}

namespace {

bool aligned_shift(double h, double t_f, int k, int* n_out) {
    double exact = std::ldexp(1.0, k - 1) * h / t_f;
    int n = static_cast<int>(std::lround(exact));
    if (std::abs(exact - n) <= 1e-9 * std::max(1.0, std::abs(exact)) &&
        n >= 0 && n <= (1 << (k - 1))) {
        *n_out = n;
        return true;
    }
    return false;
}

} // namespace

GridCheck validate_grid(const DelayedLqtProblem& problem, int k) {
    GridCheck out;
    out.ok = true;
    for (const auto& term : problem.delayed_state_terms) {
        int n = 0;
        if (!aligned_shift(term.delay, problem.t_f, k, &n)) out.ok = false;
        out.n_state.push_back(n);
    }
    for (const auto& term : problem.delayed_input_terms) {
        int n = 0;
        if (!aligned_shift(term.delay, problem.t_f, k, &n)) out.ok = false;
        out.n_input.push_back(n);
    }
    if (out.ok) return out;

    for (int kk = std::max(k, 2); kk <= 16; ++kk) {
        bool all = true;
        int n = 0;
        for (const auto& term : problem.delayed_state_terms)
            all = all && aligned_shift(term.delay, problem.t_f, kk, &n);
        for (const auto& term : problem.delayed_input_terms)
            all = all && aligned_shift(term.delay, problem.t_f, kk, &n);
        if (all) {
            out.smallest_admissible_k = kk;
            out.diagnostic = "delays align on the dyadic grid at k = " + std::to_string(kk);
            return out;
        }
    }
    out.diagnostic = "no dyadic k <= 16 aligns the delays with the grid";
    return out;
}

DelayRounding round_delays(const DelayedLqtProblem& problem, int k) {
    DelayRounding out;
    const double width = problem.t_f / std::ldexp(1.0, k - 1);
    auto snap = [&](double h, std::vector<int>& ns, std::vector<double>& perturb) {
        int n = static_cast<int>(std::lround(h / width));
        n = std::min(std::max(n, 0), 1 << (k - 1));
        ns.push_back(n);
        perturb.push_back(n * width - h);
        out.max_abs_perturbation = std::max(out.max_abs_perturbation, std::abs(n * width - h));
    };
    for (const auto& term : problem.delayed_state_terms)
        snap(term.delay, out.n_state, out.state_perturbation);
    for (const auto& term : problem.delayed_input_terms)
        snap(term.delay, out.n_input, out.input_perturbation);
    return out;
}

namespace {

// Per-entry expansion of a matrix-valued function of original time, as
// (n, m)-indexed blocks.
std::vector<MatrixXd> expand_matrix_blocks(const WaveletBasis& basis, const MatrixFunc& fn,
                                           int rows, int cols, double t_f,
                                           const std::vector<double>& breakpoints = {}) {
    std::vector<MatrixXd> blocks(basis.dim(), MatrixXd::Zero(rows, cols));
    ExpandOptions opts;
    for (double tb : breakpoints) opts.breakpoints.push_back(tb / t_f);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            VectorXd coef = expand_scalar(
                basis, [&](double tau) { return fn(tau * t_f)(i, j); }, opts);
            for (int idx = 0; idx < basis.dim(); ++idx) blocks[idx](i, j) = coef[idx];
        }
    }
    return blocks;
}

} // namespace

ProblemExpansion expand_problem(const DelayedLqtProblem& problem, const WaveletBasis& basis,
                                const std::vector<int>& n_state, const std::vector<int>& n_input,
                                const std::vector<double>& reference_breakpoints) {
    if (n_state.size() != problem.delayed_state_terms.size() ||
        n_input.size() != problem.delayed_input_terms.size())
        throw std::invalid_argument("expand_problem: shift count mismatch");

    const int q = problem.q;
    const int r = problem.r;
    const double t_f = problem.t_f;

    ProblemExpansion x{basis};
    x.problem = &problem;
    x.t_f = t_f;
    x.n_state = n_state;
    x.n_input = n_input;

    x.A_tilde = block_product_matrix(basis, expand_matrix_blocks(basis, problem.A, q, q, t_f));
    x.B_tilde = block_product_matrix(basis, expand_matrix_blocks(basis, problem.B, q, r, t_f));

    // reference Gamma (zero reference allowed)
    {
        ExpandOptions opts;
        for (double tb : reference_breakpoints) opts.breakpoints.push_back(tb / t_f);
        std::vector<std::function<double(double)>> chans;
        for (int c = 0; c < q; ++c) {
            chans.push_back([&problem, c, t_f](double tau) {
                return problem.reference ? problem.reference(tau * t_f)[c] : 0.0;
            });
        }
        x.Gamma = expand_vector(basis, chans, opts).data();
    }
    x.X0 = constant_expansion(basis, problem.x0).data();

    for (size_t i = 0; i < problem.delayed_state_terms.size(); ++i) {
        const auto& term = problem.delayed_state_terms[i];
        x.A_mu_tilde.push_back(
            block_product_matrix(basis, expand_matrix_blocks(basis, term.coefficient, q, q, t_f)));
        const int n_mu = n_state[i];
        const double tau_mu = static_cast<double>(n_mu) / basis.subintervals();
        VectorXd f_mu = VectorXd::Zero(q * basis.dim());
        if (n_mu > 0) {
            if (!problem.initial_state_fn)
                throw std::invalid_argument("expand_problem: delayed state term needs f(t)");
            ExpandOptions opts;
            for (int n = 1; n <= n_mu; ++n) opts.blocks.push_back(n);
            std::vector<std::function<double(double)>> chans;
            for (int c = 0; c < q; ++c)
                chans.push_back([&problem, c, tau_mu, t_f](double tau) {
                    return problem.initial_state_fn((tau - tau_mu) * t_f)[c];
                });
            f_mu = expand_vector(basis, chans, opts).data();
        }
        x.F_mu.push_back(std::move(f_mu));
    }

    for (size_t i = 0; i < problem.delayed_input_terms.size(); ++i) {
        const auto& term = problem.delayed_input_terms[i];
        x.B_nu_tilde.push_back(
            block_product_matrix(basis, expand_matrix_blocks(basis, term.coefficient, q, r, t_f)));
        const int n_nu = n_input[i];
        const double tau_nu = static_cast<double>(n_nu) / basis.subintervals();
        VectorXd g_nu = VectorXd::Zero(r * basis.dim());
        if (n_nu > 0) {
            if (!problem.initial_control_fn)
                throw std::invalid_argument("expand_problem: delayed input term needs g(t)");
            ExpandOptions opts;
            for (int n = 1; n <= n_nu; ++n) opts.blocks.push_back(n);
            std::vector<std::function<double(double)>> chans;
            for (int c = 0; c < r; ++c)
                chans.push_back([&problem, c, tau_nu, t_f](double tau) {
                    return problem.initial_control_fn((tau - tau_nu) * t_f)[c];
                });
            g_nu = expand_vector(basis, chans, opts).data();
        }
        x.G_nu.push_back(std::move(g_nu));
    }

    if (problem.R_time_varying)
        x.R_tilde = block_product_matrix(basis, expand_matrix_blocks(basis, problem.R, r, r, t_f));

    return x;
}

OutputReform output_to_state_reform(const DelayedLqtProblem& problem, const MatrixXd& C_y,
                                    const MatrixXd& D_y, const MatrixXd& Q_y,
                                    const VectorFunc& r_y) {
    const int q = problem.q;
    const int r = problem.r;
    const int p = static_cast<int>(C_y.rows());
    if (C_y.cols() != q) throw std::invalid_argument("output_to_state_reform: C_y must be p x q");
    if (D_y.rows() != p || D_y.cols() != r)
        throw std::invalid_argument("output_to_state_reform: D_y must be p x r");
    if (Q_y.rows() != p || Q_y.cols() != p)
        throw std::invalid_argument("output_to_state_reform: Q_y must be p x p");
    {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(C_y);
        if (qr.rank() < p)
            throw std::invalid_argument("output_to_state_reform: C_y must have full row rank");
    }

    OutputReform out;
    DelayedLqtProblem& aug = out.problem;
    aug = problem;
    aug.q = q + p;

    // z = C_y x + D_y u; zdot rows come from C_y * (dynamics rows);
    // the D_y udot part becomes the control-derivative adjustment.
    auto lift_state_matrix = [q, p, &C_y](const MatrixFunc& fn) {
        return MatrixFunc([fn, q, p, C_y](double t) {
            MatrixXd m = fn(t);
            MatrixXd out = MatrixXd::Zero(q + p, q + p);
            out.topLeftCorner(q, q) = m;
            out.block(q, 0, p, q) = C_y * m;
            return out;
        });
    };
    auto lift_input_matrix = [q, p, &C_y](const MatrixFunc& fn) {
        return MatrixFunc([fn, q, p, C_y](double t) {
            MatrixXd m = fn(t);
            MatrixXd out(q + p, m.cols());
            out.topRows(q) = m;
            out.bottomRows(p) = C_y * m;
            return out;
        });
    };

    aug.A = lift_state_matrix(problem.A);
    aug.B = lift_input_matrix(problem.B);
    aug.delayed_state_terms.clear();
    for (const auto& term : problem.delayed_state_terms)
        aug.delayed_state_terms.push_back({lift_state_matrix(term.coefficient), term.delay});
    aug.delayed_input_terms.clear();
    for (const auto& term : problem.delayed_input_terms)
        aug.delayed_input_terms.push_back({lift_input_matrix(term.coefficient), term.delay});

    aug.x0 = VectorXd(q + p);
    aug.x0.head(q) = problem.x0;
    aug.x0.tail(p) = C_y * problem.x0;   // the D_y u(0) part cancels in the transcription

    if (problem.initial_state_fn) {
        auto f = problem.initial_state_fn;
        auto g = problem.initial_control_fn;
        aug.initial_state_fn = [f, g, C_y, D_y, q, p](double t) {
            VectorXd base = f(t);
            VectorXd out(q + p);
            out.head(q) = base;
            out.tail(p) = C_y * base;
            if (g) out.tail(p) += D_y * g(t);
            return out;
        };
    }

    aug.Q = MatrixXd::Zero(q + p, q + p);
    aug.Q.bottomRightCorner(p, p) = Q_y;
    aug.T = MatrixXd::Zero(q + p, q + p);
    aug.T.topLeftCorner(q, q) = problem.T;

    aug.reference = [r_y, q, p](double t) {
        VectorXd out = VectorXd::Zero(q + p);
        out.tail(p) = r_y(t);
        return out;
    };

    if (D_y.cwiseAbs().maxCoeff() > 0.0) {
        MatrixXd bu = MatrixXd::Zero(q + p, r);
        bu.bottomRows(p) = D_y;
        aug.control_derivative = bu;
        out.has_derivative_adjustment = true;
    } else {
        aug.control_derivative.reset();
        out.has_derivative_adjustment = false;
    }
    return out;
}

} // namespace cwt
