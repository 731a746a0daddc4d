#include "cwtrack/dde.hpp"
#include "cwtrack/qp.hpp"
#include "cwtrack/qp_solver.hpp"
#include "golden_problems.hpp"

#include <cmath>
#include <doctest.h>

using namespace cwt;

TEST_CASE("method of steps on the textbook delay equation") {
    // xdot = -x(t-1), x = 1 on [-1, 0]: x(t) = 1 - t on [0, 1]
    DelayedLqtProblem p;
    p.q = 1;
    p.r = 1;
    p.t_f = 1.0;
    p.A = constant_matrix(MatrixXd::Zero(1, 1));
    p.B = constant_matrix(MatrixXd::Zero(1, 1));
    p.delayed_state_terms.push_back({constant_matrix(MatrixXd::Constant(1, 1, -1.0)), 1.0});
    p.initial_state_fn = constant_vector(VectorXd::Ones(1));
    p.x0 = VectorXd::Ones(1);
    p.Q = MatrixXd::Ones(1, 1);
    p.R = constant_matrix(MatrixXd::Ones(1, 1));
    p.T = MatrixXd::Zero(1, 1);

    auto zero_control = [](double) { return VectorXd::Zero(1); };
    Trajectory traj = integrate_dde(p, zero_control, 1.0 / 64);
    for (int i = 0; i < traj.times.size(); ++i)
        CHECK(traj.states(0, i) ==
              doctest::Approx(1.0 - traj.times[i]).epsilon(1e-10).scale(1.0));

    SUBCASE("zero dynamics give a constant trajectory") {
        DelayedLqtProblem flat = p;
        flat.delayed_state_terms.clear();
        Trajectory c = integrate_dde(flat, zero_control, 0.125);
        CHECK((c.states.row(0).array() - 1.0).abs().maxCoeff() < 1e-14);
    }

    SUBCASE("misaligned step is rejected") {
        CHECK_THROWS_AS(integrate_dde(p, zero_control, 0.3), std::invalid_argument);
    }
}

TEST_CASE("fourth-order convergence until roundoff") {
    // xdot = -x(t - 1/4) + sin(t), x = cos on [-1/4, 0]
    DelayedLqtProblem p;
    p.q = 1;
    p.r = 1;
    p.t_f = 1.0;
    p.A = constant_matrix(MatrixXd::Zero(1, 1));
    p.B = constant_matrix(MatrixXd::Ones(1, 1));
    p.delayed_state_terms.push_back({constant_matrix(MatrixXd::Constant(1, 1, -1.0)), 0.25});
    p.initial_state_fn = [](double t) { return VectorXd::Constant(1, std::cos(t)); };
    p.x0 = VectorXd::Ones(1);
    p.Q = MatrixXd::Ones(1, 1);
    p.R = constant_matrix(MatrixXd::Ones(1, 1));
    p.T = MatrixXd::Zero(1, 1);
    auto control = [](double t) { return VectorXd::Constant(1, std::sin(t)); };

    Trajectory fine = integrate_dde(p, control, 1.0 / 2048);
    auto value_at_end = [&](double step) {
        Trajectory t = integrate_dde(p, control, step);
        return t.states(0, t.times.size() - 1);
    };
    double ref = fine.states(0, fine.times.size() - 1);
    double e1 = std::abs(value_at_end(1.0 / 32) - ref);
    double e2 = std::abs(value_at_end(1.0 / 64) - ref);
    CHECK(e1 / e2 > 10.0);   // ~16x for a 4th-order scheme
}

TEST_CASE("evaluate_cost") {
    DelayedLqtProblem p;
    p.q = 1;
    p.r = 1;
    p.t_f = 2.0;
    p.A = constant_matrix(MatrixXd::Zero(1, 1));
    p.B = constant_matrix(MatrixXd::Ones(1, 1));
    p.x0 = VectorXd::Zero(1);
    p.Q = MatrixXd::Constant(1, 1, 2.0);
    p.R = constant_matrix(MatrixXd::Ones(1, 1));
    p.T = MatrixXd::Constant(1, 1, 3.0);

    SUBCASE("zero trajectory costs nothing") {
        Trajectory z;
        z.times = VectorXd::LinSpaced(9, 0.0, 2.0);
        z.states = MatrixXd::Zero(1, 9);
        z.controls = MatrixXd::Zero(1, 9);
        CHECK(evaluate_cost(p, z) == 0.0);
    }

    SUBCASE("quadratic state, quadrature is exact for polynomials") {
        // x(t) = t, u = 0: J = 3/2 x(2)^2/... T/2 * 4 + 1/2 int 2 t^2 = 6 + 8/3
        Trajectory t;
        int N = 9;
        t.times = VectorXd::LinSpaced(N, 0.0, 2.0);
        t.states.resize(1, N);
        t.controls = MatrixXd::Zero(1, N);
        for (int i = 0; i < N; ++i) t.states(0, i) = t.times[i];
        CHECK(evaluate_cost(p, t) == doctest::Approx(6.0 + 8.0 / 3.0).epsilon(1e-12));
    }

    SUBCASE("even sample count is rejected") {
        Trajectory t;
        t.times = VectorXd::LinSpaced(8, 0.0, 2.0);
        t.states = MatrixXd::Zero(1, 8);
        t.controls = MatrixXd::Zero(1, 8);
        CHECK_THROWS_AS(evaluate_cost(p, t), std::invalid_argument);
    }
}

TEST_CASE("compare reports sup errors and interface jumps") {
    WaveletBasis b(2, 5);
    CoeffVector c(b, 1, expand_scalar(b, [](double t) { return t * t; }));
    PiecewisePoly poly = to_piecewise_poly(c, 1.0);

    Trajectory exact;
    int N = 33;
    exact.times = VectorXd::LinSpaced(N, 0.0, 1.0);
    exact.states.resize(1, N);
    exact.controls = MatrixXd::Zero(1, N);
    for (int i = 0; i < N; ++i) exact.states(0, i) = exact.times[i] * exact.times[i];

    CompareReport same = compare(poly, exact, true);
    CHECK(same.sup_error[0] < 1e-9);
    CHECK(same.max_interface_jump < 1e-9);

    Trajectory shifted = exact;
    shifted.states.array() += 0.25;
    CompareReport moved = compare(poly, shifted, false);
    CHECK(moved.sup_error[0] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("cross-validation of the scalar benchmark solution") {
    DelayedLqtProblem p = golden::example1(false);
    WaveletBasis basis(2, 5);
    GridCheck g = validate_grid(p, 2);
    REQUIRE(g.ok);
    ProblemExpansion x = expand_problem(p, basis, g.n_state, g.n_input);
    QpSolution sol = solve_equality_qp(assemble(x));
    REQUIRE(sol.status == SolveStatus::Optimal);

    CoeffVector u(basis, 1, sol.chi.tail(basis.dim()));
    auto control = [&](double t) {
        return u.reconstruct(std::min(std::max(t, 0.0), 1.0));
    };
    Trajectory oracle = integrate_dde(p, control, 1.0 / 512);
    CoeffVector xfull(basis, 1, VectorXd(sol.chi.head(basis.dim()) + x.Gamma));
    PiecewisePoly poly = to_piecewise_poly(xfull, 1.0);
    CompareReport rep = compare(poly, oracle, true);
    CHECK(rep.sup_error[0] < 5e-3);

    // quadrature cost along the oracle trajectory stays near the QP objective
    double j_oracle = evaluate_cost(p, oracle);
    CHECK(j_oracle == doctest::Approx(sol.objective).epsilon(0.01));
}
