#include "cwtrack/qp_solver.hpp"

#include <Eigen/QR>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <lapacke.h>
#include <set>
#include <stdexcept>
#include <vector>

namespace cwt {

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

double Residuals::max() const {
    return std::max(std::max(stationarity, primal_eq), std::max(primal_in, complementarity));
}

namespace {

/// Symmetric indefinite solve (Bunch-Kaufman) with stored factorization.
class SymmetricIndefiniteSolver {
public:
    /// Returns false when the factorization reports singularity.
    bool factor(const MatrixXd& m) {
        n_ = static_cast<int>(m.rows());
        a_ = m;   // column-major; lower triangle referenced
        ipiv_.resize(n_);
        lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n_, a_.data(), n_, ipiv_.data());
        return info == 0;
    }

    VectorXd solve(const VectorXd& rhs) const {
        VectorXd x = rhs;
        LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n_, 1, a_.data(), n_, ipiv_.data(), x.data(), n_);
        return x;
    }

private:
    int n_ = 0;
    MatrixXd a_;
    std::vector<lapack_int> ipiv_;
};

struct KktSolveResult {
    bool ok = false;
    VectorXd chi;
    VectorXd lambda;
    double shift = 0.0;
};

// Solve [[H + shift I, A'], [A, 0]] [chi; lambda] = [g; b] with two rounds of
// iterative refinement.
KktSolveResult solve_kkt(const MatrixXd& H, const MatrixXd& A, const VectorXd& g,
                         const VectorXd& b, double shift) {
    const int n = static_cast<int>(H.rows());
    const int m = static_cast<int>(A.rows());
    MatrixXd kkt = MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = H;
    if (shift > 0.0) kkt.topLeftCorner(n, n) += shift * MatrixXd::Identity(n, n);
    kkt.block(n, 0, m, n) = A;
    kkt.block(0, n, n, m) = A.transpose();

    SymmetricIndefiniteSolver solver;
    KktSolveResult out;
    if (!solver.factor(kkt)) return out;

    VectorXd rhs(n + m);
    rhs.head(n) = g;
    rhs.tail(m) = b;
    VectorXd sol = solver.solve(rhs);
    for (int pass = 0; pass < 2; ++pass) {
        VectorXd resid = rhs - kkt.selfadjointView<Eigen::Lower>() * sol;
        sol += solver.solve(resid);
    }
    if (!sol.allFinite()) return out;
    out.ok = true;
    out.chi = sol.head(n);
    out.lambda = sol.tail(m);
    out.shift = shift;
    return out;
}

// Independent equality rows by rank-revealing QR of A'.
std::vector<int> independent_rows(const MatrixXd& A, double threshold) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
    qr.setThreshold(threshold);
    int rank = static_cast<int>(qr.rank());
    std::vector<int> keep(qr.colsPermutation().indices().data(),
                          qr.colsPermutation().indices().data() + rank);
    std::sort(keep.begin(), keep.end());
    return keep;
}

Residuals compute_residuals(const QuadraticProgram& qp, const VectorXd& chi,
                            const VectorXd& lambda, const VectorXd& mu) {
    Residuals res;
    VectorXd stat = qp.H.selfadjointView<Eigen::Lower>() * chi;
    if (qp.A_eq.rows() > 0) stat += qp.A_eq.transpose() * lambda;
    if (qp.G_in.rows() > 0) stat += qp.G_in.transpose() * mu;
    res.stationarity = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
    if (qp.A_eq.rows() > 0)
        res.primal_eq = (qp.A_eq * chi - qp.b_eq).cwiseAbs().maxCoeff();
    if (qp.G_in.rows() > 0) {
        VectorXd slack = qp.h_in - qp.G_in * chi;
        res.primal_in = std::max(0.0, (-slack).maxCoeff());
        res.complementarity = (mu.array() * slack.array()).abs().maxCoeff();
    }
    return res;
}

} // namespace

Residuals kkt_residuals(const QuadraticProgram& qp, const QpSolution& sol) {
    return compute_residuals(qp, sol.chi, sol.lambda_eq, sol.mu_in);
}

QpSolution solve_equality_qp(const QuadraticProgram& qp, const SolveOptions& opts) {
    if (qp.G_in.rows() > 0)
        throw std::invalid_argument("solve_equality_qp: inequality rows present");

    QpSolution sol;
    const int n = static_cast<int>(qp.H.rows());
    const VectorXd zero_g = VectorXd::Zero(n);

    MatrixXd A = qp.A_eq;
    VectorXd b = qp.b_eq;

    auto attempt = [&](const MatrixXd& Am, const VectorXd& bm, double shift) {
        return solve_kkt(qp.H, Am, zero_g, bm, shift);
    };

    KktSolveResult r = attempt(A, b, 0.0);
    bool pruned = false;
    double shifts[] = {0.0, 1e-10, 1e-8, 1e-6};
    size_t shift_idx = 0;

    auto acceptable = [&](const KktSolveResult& rr) {
        if (!rr.ok) return false;
        double scale = std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
        double resid = A.rows() ? (A * rr.chi - b).cwiseAbs().maxCoeff() : 0.0;
        return resid <= 1e-6 * scale;
    };

    while (!acceptable(r)) {
        if (!pruned) {
            // prune dependent rows, checking the dropped ones for consistency
            std::vector<int> keep = independent_rows(A, 1e-10);
            if (static_cast<int>(keep.size()) < A.rows()) {
                MatrixXd A2(keep.size(), A.cols());
                VectorXd b2(keep.size());
                for (size_t i = 0; i < keep.size(); ++i) {
                    A2.row(static_cast<int>(i)) = A.row(keep[i]);
                    b2[static_cast<int>(i)] = b[keep[i]];
                }
                // consistency of the full system against a least-squares solution
                VectorXd lsq = A.colPivHouseholderQr().solve(b);
                double gap = (A * lsq - b).cwiseAbs().maxCoeff();
                if (gap > 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
                    sol.status = SolveStatus::Infeasible;
                    sol.chi = VectorXd::Zero(n);
                    return sol;
                }
                sol.pruned_rows = static_cast<int>(A.rows() - A2.rows());
                A = std::move(A2);
                b = std::move(b2);
            }
            pruned = true;
            r = attempt(A, b, 0.0);
            continue;
        }
        if (++shift_idx >= std::size(shifts)) break;
        r = attempt(A, b, shifts[shift_idx]);
    }

    if (!acceptable(r)) {
        sol.status = SolveStatus::NumericalFailure;
        sol.chi = VectorXd::Zero(n);
        return sol;
    }

    sol.chi = r.chi;
    sol.tikhonov_shift = r.shift;
    // report multipliers on the original row set (zero for pruned rows)
    sol.lambda_eq = VectorXd::Zero(qp.A_eq.rows());
    if (A.rows() == qp.A_eq.rows()) {
        sol.lambda_eq = r.lambda;
    } else {
        std::vector<int> keep = independent_rows(qp.A_eq, 1e-10);
        for (size_t i = 0; i < keep.size() && static_cast<int>(i) < r.lambda.size(); ++i)
            sol.lambda_eq[keep[i]] = r.lambda[static_cast<int>(i)];
    }
    sol.mu_in = VectorXd::Zero(0);
    sol.objective = 0.5 * sol.chi.dot(qp.H.selfadjointView<Eigen::Lower>() * sol.chi);
    sol.iterations = 1;
    sol.residuals = compute_residuals(qp, sol.chi, sol.lambda_eq, sol.mu_in);
    sol.status = SolveStatus::Optimal;
    return sol;
}

QpSolution solve_convex_qp(const QuadraticProgram& qp, const SolveOptions& opts) {
    const int m_in = static_cast<int>(qp.G_in.rows());
    if (m_in == 0) return solve_equality_qp(qp, opts);

    const int n = static_cast<int>(qp.H.rows());
    const int m_eq = static_cast<int>(qp.A_eq.rows());
    const MatrixXd& H = qp.H;
    const MatrixXd& A = qp.A_eq;
    const MatrixXd& G = qp.G_in;
    const VectorXd& b = qp.b_eq;
    const VectorXd& h = qp.h_in;

    QpSolution sol;

    // initial point: least-squares on the equalities, unit slacks/multipliers
    VectorXd chi = m_eq > 0 ? VectorXd(A.colPivHouseholderQr().solve(b)) : VectorXd::Zero(n);
    VectorXd lambda = VectorXd::Zero(m_eq);
    VectorXd slack = (h - G * chi).cwiseMax(1.0);
    VectorXd mu = VectorXd::Ones(m_in);

    const double tol = opts.tol;
    const double ftb = 0.995;   // fraction to boundary

    auto merit = [&](const VectorXd& c, const VectorXd& l, const VectorXd& m,
                     const VectorXd& s) {
        VectorXd stat = H.selfadjointView<Eigen::Lower>() * c + G.transpose() * m;
        if (m_eq > 0) stat += A.transpose() * l;
        double rp = m_eq > 0 ? (A * c - b).cwiseAbs().maxCoeff() : 0.0;
        double rg = (G * c + s - h).cwiseAbs().maxCoeff();
        double gap = s.dot(m) / m_in;
        return std::max(std::max(stat.cwiseAbs().maxCoeff(), rp), std::max(rg, gap));
    };

    double mu_avg = 1.0;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        VectorXd r_d = H.selfadjointView<Eigen::Lower>() * chi + G.transpose() * mu;
        if (m_eq > 0) r_d += A.transpose() * lambda;
        VectorXd r_p = m_eq > 0 ? VectorXd(A * chi - b) : VectorXd::Zero(0);
        VectorXd r_g = G * chi + slack - h;
        mu_avg = slack.dot(mu) / m_in;

        sol.merit_history.push_back(merit(chi, lambda, mu, slack));
        if (sol.merit_history.back() <= tol) {
            sol.status = SolveStatus::Optimal;
            sol.iterations = iter - 1;
            break;
        }

        // augmented symmetric KKT; keeping the -S/M block explicit avoids
        // squaring the barrier scaling into the Hessian
        const int dim = n + m_eq + m_in;
        MatrixXd kkt = MatrixXd::Zero(dim, dim);
        kkt.topLeftCorner(n, n) = H;
        if (m_eq > 0) {
            kkt.block(n, 0, m_eq, n) = A;
            kkt.block(0, n, n, m_eq) = A.transpose();
        }
        kkt.block(n + m_eq, 0, m_in, n) = G;
        kkt.block(0, n + m_eq, n, m_in) = G.transpose();
        for (int i = 0; i < m_in; ++i)
            kkt(n + m_eq + i, n + m_eq + i) = -slack[i] / mu[i];
        SymmetricIndefiniteSolver solver;
        if (!solver.factor(kkt)) {
            for (int i = 0; i < n; ++i) kkt(i, i) += 1e-10;
            if (!solver.factor(kkt)) {
                sol.status = SolveStatus::NumericalFailure;
                break;
            }
        }

        auto newton_step = [&](const VectorXd& comp_target) {
            // comp_target: desired s.*mu update, i.e. solve
            //   S dmu + M ds = comp_target - S M e
            VectorXd rc = comp_target.array() - slack.array() * mu.array();
            VectorXd rhs(dim);
            rhs.head(n) = -r_d;
            if (m_eq > 0) rhs.segment(n, m_eq) = -r_p;
            rhs.tail(m_in) = -r_g - (rc.array() / mu.array()).matrix();
            VectorXd sol_v = solver.solve(rhs);
            for (int pass = 0; pass < 2; ++pass) {
                VectorXd resid = rhs - kkt.selfadjointView<Eigen::Lower>() * sol_v;
                sol_v += solver.solve(resid);
            }
            VectorXd dchi = sol_v.head(n);
            VectorXd dlambda = m_eq > 0 ? VectorXd(sol_v.segment(n, m_eq)) : VectorXd::Zero(0);
            VectorXd dmu = sol_v.tail(m_in);
            VectorXd ds = -r_g - G * dchi;
            return std::make_tuple(dchi, dlambda, ds, dmu);
        };

        // predictor
        auto [dchi_a, dlambda_a, ds_a, dmu_a] = newton_step(VectorXd::Zero(m_in));
        auto step_len = [&](const VectorXd& v, const VectorXd& dv) {
            double a = 1.0;
            for (int i = 0; i < v.size(); ++i)
                if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
            return a;
        };
        double alpha_aff = std::min(step_len(slack, ds_a), step_len(mu, dmu_a));
        double mu_aff = (slack + alpha_aff * ds_a).dot(mu + alpha_aff * dmu_a) / m_in;
        double sigma = std::pow(mu_aff / mu_avg, 3.0);

        // corrector with centering + second-order term
        VectorXd comp = VectorXd::Constant(m_in, sigma * mu_avg) -
                        (ds_a.array() * dmu_a.array()).matrix();
        auto [dchi, dlambda, ds, dmu] = newton_step(comp);

        double alpha = ftb * std::min(step_len(slack, ds), step_len(mu, dmu));
        alpha = std::min(alpha, 1.0);

        // merit safeguard: halve steps that would push the path backwards
        double m0 = sol.merit_history.back();
        double a = alpha;
        VectorXd chi_n, lambda_n, slack_n, mu_n;
        for (int cut = 0; cut < 10; ++cut) {
            chi_n = chi + a * dchi;
            lambda_n = lambda + a * dlambda;
            slack_n = slack + a * ds;
            mu_n = mu + a * dmu;
            if (iter <= 3 || merit(chi_n, lambda_n, mu_n, slack_n) <= m0 || a < 1e-8) break;
            a *= 0.5;
        }
        chi = chi_n;
        lambda = lambda_n;
        slack = slack_n;
        mu = mu_n;
        sol.iterations = iter;
        if (std::getenv("CWTRACK_IP_DEBUG"))
            std::fprintf(stderr, "ip iter %d merit %.3e alpha %.3e sigma %.3e mu %.3e\n", iter,
                         sol.merit_history.back(), a, sigma, mu_avg);

        // degenerate clustered actives can flatten progress entirely; stop
        // early and let the active-set polish finish the job
        size_t hn = sol.merit_history.size();
        if (hn >= 16 && sol.merit_history[hn - 1] > 0.9 * sol.merit_history[hn - 13]) break;
        if (iter == opts.max_iter) sol.status = SolveStatus::MaxIter;
    }

    sol.chi = chi;
    sol.lambda_eq = lambda;
    sol.mu_in = mu;

    // active-set polish: pin the constraints the central path identifies,
    // re-solve as an equality QP, and iterate the classic drop/add exchange
    // until the polished point is primal and dual feasible
    {
        std::set<int> active;
        for (int i = 0; i < m_in; ++i)
            if (mu[i] > slack[i]) active.insert(i);
        const double scale = std::max(1.0, h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
        for (int round = 0; round < 60; ++round) {
            std::vector<int> act(active.begin(), active.end());
            QuadraticProgram eq;
            eq.H = H;
            eq.A_eq.resize(m_eq + act.size(), n);
            eq.b_eq.resize(m_eq + act.size());
            if (m_eq > 0) {
                eq.A_eq.topRows(m_eq) = A;
                eq.b_eq.head(m_eq) = b;
            }
            for (size_t i = 0; i < act.size(); ++i) {
                eq.A_eq.row(m_eq + i) = G.row(act[i]);
                eq.b_eq[m_eq + i] = h[act[i]];
            }
            eq.G_in = MatrixXd::Zero(0, n);
            eq.h_in = VectorXd::Zero(0);
            QpSolution polished = solve_equality_qp(eq, opts);
            if (std::getenv("CWTRACK_IP_DEBUG"))
                std::fprintf(stderr, "polish round %d actives %zu status %s\n", round,
                             act.size(), to_string(polished.status));
            if (polished.status != SolveStatus::Optimal) break;

            // batch exchange: drop every negative multiplier, then add every
            // violated row; clustered samples make one-at-a-time exchanges crawl
            bool changed = false;
            for (size_t i = 0; i < act.size(); ++i) {
                if (polished.lambda_eq[m_eq + i] < -1e-9) {
                    active.erase(act[i]);
                    changed = true;
                }
            }
            if (changed) continue;
            VectorXd resid = G * polished.chi - h;
            for (int i = 0; i < m_in; ++i) {
                if (!active.count(i) && resid[i] > 1e-9 * scale) {
                    active.insert(i);
                    changed = true;
                }
            }
            if (changed) continue;
            // clean: adopt the polished point
            VectorXd mu_full = VectorXd::Zero(m_in);
            for (size_t i = 0; i < act.size(); ++i)
                mu_full[act[i]] = std::max(0.0, polished.lambda_eq[m_eq + i]);
            sol.chi = polished.chi;
            sol.lambda_eq =
                m_eq > 0 ? VectorXd(polished.lambda_eq.head(m_eq)) : VectorXd::Zero(0);
            sol.mu_in = mu_full;
            break;
        }
    }

    sol.objective = 0.5 * sol.chi.dot(H.selfadjointView<Eigen::Lower>() * sol.chi);
    sol.residuals = compute_residuals(qp, sol.chi, sol.lambda_eq, sol.mu_in);
    sol.status = sol.residuals.max() <= 10 * tol ? SolveStatus::Optimal : SolveStatus::MaxIter;
    return sol;
}

} // namespace cwt
