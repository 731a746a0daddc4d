#include "cwtrack/dde.hpp"

#include <cmath>
#include <stdexcept>

namespace cwt {

namespace {

bool divides(double step, double span) {
    if (span == 0.0) return true;
    double ratio = span / step;
    return std::abs(ratio - std::lround(ratio)) < 1e-9 * std::max(1.0, std::abs(ratio));
}

/// Dense history with cubic Hermite interpolation between stored nodes.
class History {
public:
    History(double step, VectorXd x0) : step_(step) {
        xs_.push_back(std::move(x0));
    }

    void push(VectorXd x, VectorXd f_prev, VectorXd f_new) {
        if (fs_.size() + 1 == xs_.size()) fs_.push_back(std::move(f_prev));
        xs_.push_back(std::move(x));
        fs_.push_back(std::move(f_new));
    }

    VectorXd at(double t) const {
        double pos = t / step_;
        int i = static_cast<int>(std::floor(pos + 1e-12));
        if (i >= static_cast<int>(xs_.size()) - 1) i = static_cast<int>(xs_.size()) - 2;
        if (i < 0) i = 0;
        double th = pos - i;
        if (th < 1e-12) return xs_[i];
        if (th > 1.0 - 1e-12 && i + 1 < static_cast<int>(xs_.size())) return xs_[i + 1];
        const VectorXd& x0 = xs_[i];
        const VectorXd& x1 = xs_[i + 1];
        const VectorXd& f0 = fs_[i];
        const VectorXd& f1 = fs_[std::min<size_t>(i + 1, fs_.size() - 1)];
        double h00 = (2 * th - 3) * th * th + 1;
        double h10 = ((th - 2) * th + 1) * th;
        double h01 = (3 - 2 * th) * th * th;
        double h11 = (th - 1) * th * th;
        return h00 * x0 + step_ * h10 * f0 + h01 * x1 + step_ * h11 * f1;
    }

private:
    double step_;
    std::vector<VectorXd> xs_;
    std::vector<VectorXd> fs_;
};

} // namespace

Trajectory integrate_dde(const DelayedLqtProblem& problem, const VectorFunc& control,
                         double step) {
    std::vector<double> hs, hu;
    for (const auto& term : problem.delayed_state_terms) hs.push_back(term.delay);
    for (const auto& term : problem.delayed_input_terms) hu.push_back(term.delay);
    return integrate_dde(problem, control, step, hs, hu);
}

Trajectory integrate_dde(const DelayedLqtProblem& problem, const VectorFunc& control,
                         double step, const std::vector<double>& state_delays,
                         const std::vector<double>& input_delays) {
    if (step <= 0.0) throw std::invalid_argument("integrate_dde: step must be positive");
    if (!divides(step, problem.t_f))
        throw std::invalid_argument("integrate_dde: step does not divide t_f");
    for (double h : state_delays)
        if (!divides(step, h))
            throw std::invalid_argument("integrate_dde: step does not divide a state delay");
    for (double h : input_delays)
        if (!divides(step, h))
            throw std::invalid_argument("integrate_dde: step does not divide an input delay");
    if (state_delays.size() != problem.delayed_state_terms.size() ||
        input_delays.size() != problem.delayed_input_terms.size())
        throw std::invalid_argument("integrate_dde: delay count mismatch");

    const int q = problem.q;
    const MatrixXd B_u =
        problem.control_derivative ? *problem.control_derivative : MatrixXd::Zero(q, problem.r);
    const bool has_bu = problem.control_derivative.has_value();

    auto u_at = [&](double t) -> VectorXd {
        if (t >= 0.0) return control(t);
        if (problem.initial_control_fn) return problem.initial_control_fn(t);
        return VectorXd::Zero(problem.r);
    };
    // x(t) for t <= 0 from the initial function (x-coordinates, not z)
    auto x_init = [&](double t) -> VectorXd {
        if (problem.initial_state_fn) return problem.initial_state_fn(t);
        return problem.x0;
    };

    // z = x - B_u u; dynamics in z stay smooth across control jumps:
    //   zdot = A z + (B + A B_u) u + sum A_mu x(t-h_mu) + sum B_nu u(t-h_nu)
    auto deriv = [&](double t, const VectorXd& z, const std::vector<VectorXd>& xd,
                     const VectorXd& u) -> VectorXd {
        MatrixXd At = problem.A(t);
        VectorXd dz = At * z + (problem.B(t) + At * B_u) * u;
        for (size_t i = 0; i < problem.delayed_state_terms.size(); ++i)
            dz += problem.delayed_state_terms[i].coefficient(t) * xd[i];
        for (size_t i = 0; i < problem.delayed_input_terms.size(); ++i)
            dz += problem.delayed_input_terms[i].coefficient(t) *
                  u_at(t - input_delays[i]);
        return dz;
    };

    const int nsteps = static_cast<int>(std::lround(problem.t_f / step));
    History hist(step, problem.x0);   // stores z; z(0) = x0 (feedthrough cancels)

    auto delayed_states = [&](double t) {
        std::vector<VectorXd> xd;
        for (size_t i = 0; i < problem.delayed_state_terms.size(); ++i) {
            double td = t - state_delays[i];
            if (td < 0.0)
                xd.push_back(x_init(td));
            else if (has_bu)
                xd.push_back(hist.at(td) + B_u * u_at(td));
            else
                xd.push_back(hist.at(td));
        }
        return xd;
    };

    VectorXd z = problem.x0;
    VectorXd f_prev = deriv(0.0, z, delayed_states(0.0), u_at(0.0));
    Trajectory traj;
    traj.times.resize(nsteps + 1);
    traj.states.resize(q, nsteps + 1);
    traj.controls.resize(problem.r, nsteps + 1);
    traj.times[0] = 0.0;
    traj.states.col(0) = z + (has_bu ? VectorXd(B_u * u_at(0.0)) : VectorXd::Zero(q));
    traj.controls.col(0) = u_at(0.0);

    for (int i = 0; i < nsteps; ++i) {
        double t0 = i * step;
        double tm = t0 + 0.5 * step;
        double t1 = t0 + step;
        auto xd0 = delayed_states(t0);
        auto xdm = delayed_states(tm);
        auto xd1 = delayed_states(t1);
        VectorXd u0 = u_at(t0), um = u_at(tm), u1 = u_at(t1);

        VectorXd k1 = deriv(t0, z, xd0, u0);
        VectorXd k2 = deriv(tm, z + 0.5 * step * k1, xdm, um);
        VectorXd k3 = deriv(tm, z + 0.5 * step * k2, xdm, um);
        VectorXd k4 = deriv(t1, z + step * k3, xd1, u1);
        VectorXd z_new = z + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        VectorXd f_new = deriv(t1, z_new, xd1, u1);
        hist.push(z_new, f_prev, f_new);
        f_prev = f_new;
        z = z_new;

        traj.times[i + 1] = t1;
        traj.states.col(i + 1) = z + (has_bu ? VectorXd(B_u * u1) : VectorXd::Zero(q));
        traj.controls.col(i + 1) = u1;
    }
    return traj;
}

double evaluate_cost(const DelayedLqtProblem& problem, const Trajectory& trajectory) {
    const int N = static_cast<int>(trajectory.times.size());
    if (N < 3 || N % 2 == 0)
        throw std::invalid_argument("evaluate_cost: composite Simpson needs an odd sample count");

    auto integrand = [&](int i) {
        double t = trajectory.times[i];
        VectorXd xbar = trajectory.states.col(i);
        if (problem.reference) xbar -= problem.reference(t);
        VectorXd u = trajectory.controls.col(i);
        return xbar.dot(problem.Q * xbar) + u.dot(problem.R(t) * u);
    };

    double h = trajectory.times[1] - trajectory.times[0];
    double acc = integrand(0) + integrand(N - 1);
    for (int i = 1; i < N - 1; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i);
    double integral = acc * h / 3.0;

    VectorXd xbar_f = trajectory.states.col(N - 1);
    if (problem.reference) xbar_f -= problem.reference(problem.t_f);
    return 0.5 * xbar_f.dot(problem.T * xbar_f) + 0.5 * integral;
}

CompareReport compare(const PiecewisePoly& reconstructed_state, const Trajectory& oracle,
                      bool compat_enforced) {
    const int q = static_cast<int>(oracle.states.rows());
    CompareReport rep;
    rep.sup_error = VectorXd::Zero(q);
    rep.l2_error = VectorXd::Zero(q);
    rep.oracle_scale = VectorXd::Zero(q);

    const int N = static_cast<int>(oracle.times.size());
    for (int i = 0; i < N; ++i) {
        VectorXd rec = reconstructed_state.eval(oracle.times[i]);
        for (int c = 0; c < q; ++c) {
            double err = std::abs(rec[c] - oracle.states(c, i));
            rep.sup_error[c] = std::max(rep.sup_error[c], err);
            rep.l2_error[c] += err * err;
            rep.oracle_scale[c] = std::max(rep.oracle_scale[c], std::abs(oracle.states(c, i)));
        }
    }
    double dt = N > 1 ? oracle.times[1] - oracle.times[0] : 0.0;
    for (int c = 0; c < q; ++c) rep.l2_error[c] = std::sqrt(rep.l2_error[c] * dt);

    if (compat_enforced) {
        const auto& breaks = reconstructed_state.breaks();
        for (size_t i = 1; i + 1 < breaks.size(); ++i) {
            double t = breaks[i];
            // evaluate both neighbouring pieces at the interface
            VectorXd vl = VectorXd::Zero(q), vr = VectorXd::Zero(q);
            const MatrixXd& cl = reconstructed_state.piece(static_cast<int>(i - 1));
            const MatrixXd& cr = reconstructed_state.piece(static_cast<int>(i));
            for (int d = static_cast<int>(cl.cols()) - 1; d >= 0; --d) vl = vl * t + cl.col(d);
            for (int d = static_cast<int>(cr.cols()) - 1; d >= 0; --d) vr = vr * t + cr.col(d);
            rep.max_interface_jump =
                std::max(rep.max_interface_jump, (vl - vr).cwiseAbs().maxCoeff());
        }
    }
    return rep;
}

} // namespace cwt
