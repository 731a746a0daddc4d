#include "cwtrack/problem.hpp"

#include <cmath>
#include <doctest.h>

using namespace cwt;

namespace {
constexpr double kPi = 3.14159265358979323846;

DelayedLqtProblem small_delay_problem(double h, double t_f) {
    DelayedLqtProblem p;
    p.q = 1;
    p.r = 1;
    p.t_f = t_f;
    p.A = constant_matrix(MatrixXd::Zero(1, 1));
    p.B = constant_matrix(MatrixXd::Ones(1, 1));
    p.delayed_state_terms.push_back({constant_matrix(MatrixXd::Ones(1, 1)), h});
    p.initial_state_fn = constant_vector(VectorXd::Zero(1));
    p.x0 = VectorXd::Zero(1);
    p.Q = MatrixXd::Ones(1, 1);
    p.R = constant_matrix(MatrixXd::Ones(1, 1));
    p.T = MatrixXd::Zero(1, 1);
    return p;
}
} // namespace

TEST_CASE("rescale maps delays and data to tau") {
    DelayedLqtProblem p = small_delay_problem(1.0, 15.0);
    p.reference = [](double t) { return (VectorXd(1) << 0.2 * t).finished(); };
    NormalizedProblem n = rescale(p);
    CHECK(n.tau_state_delays[0] == doctest::Approx(1.0 / 15));
    CHECK(n.reference_at(0.5)[0] == doctest::Approx(1.5));    // 0.2 t -> 3 tau

    DelayedLqtProblem ident = small_delay_problem(0.25, 1.0);
    CHECK(rescale(ident).tau_state_delays[0] == doctest::Approx(0.25));

    DelayedLqtProblem ex3 = small_delay_problem(5.0, 20.0);
    CHECK(rescale(ex3).tau_state_delays[0] == doctest::Approx(0.25));

    DelayedLqtProblem bad = small_delay_problem(0.25, 1.0);
    bad.t_f = 0.0;
    CHECK_THROWS_AS(rescale(bad), std::invalid_argument);
}

TEST_CASE("grid validation") {
    SUBCASE("aligned case") {
        DelayedLqtProblem p = small_delay_problem(0.5, 1.0);
        p.delayed_input_terms.push_back({constant_matrix(MatrixXd::Ones(1, 1)), 0.5});
        p.initial_control_fn = constant_vector(VectorXd::Zero(1));
        GridCheck g = validate_grid(p, 2);
        CHECK(g.ok);
        CHECK(g.n_state[0] == 1);
        CHECK(g.n_input[0] == 1);
    }
    SUBCASE("irrational ratio never aligns") {
        DelayedLqtProblem p = small_delay_problem(1.0 / 3.0, 1.0);
        GridCheck g = validate_grid(p, 4);
        CHECK(!g.ok);
        CHECK(g.smallest_admissible_k == -1);
        CHECK(g.diagnostic.find("no dyadic k <= 16") != std::string::npos);
    }
    SUBCASE("misaligned at the requested k but fixable") {
        DelayedLqtProblem p = small_delay_problem(1.0 / 8.0, 1.0);
        GridCheck g = validate_grid(p, 2);
        CHECK(!g.ok);
        CHECK(g.smallest_admissible_k == 4);
    }
    SUBCASE("the benchmark misalignment: h=1, t_f=15, k=6") {
        DelayedLqtProblem p = small_delay_problem(1.0, 15.0);
        GridCheck g = validate_grid(p, 6);
        CHECK(!g.ok);
        CHECK(g.smallest_admissible_k == -1);
        DelayRounding rounding = round_delays(p, 6);
        CHECK(rounding.n_state[0] == 2);   // round(32/15)
        CHECK(rounding.state_perturbation[0] ==
              doctest::Approx(2.0 * 15.0 / 32.0 - 1.0));
    }
}

TEST_CASE("expansion faithfulness and F_mu structure") {
    DelayedLqtProblem p;
    p.q = 2;
    p.r = 1;
    p.t_f = 15.0;
    MatrixXd A(2, 2), A1(2, 2), B(2, 1), B1(2, 1);
    A << 0, 1, 2, -1;
    A1 << 0.05, 0, 0, 0.01;
    B << 0, 1;
    B1 << 0.01, -0.05;
    p.A = constant_matrix(A);
    p.B = constant_matrix(B);
    p.delayed_state_terms.push_back({constant_matrix(A1), 1.0});
    p.delayed_input_terms.push_back({constant_matrix(B1), 0.5});
    p.initial_state_fn = constant_vector((VectorXd(2) << -4.0, 0.0).finished());
    p.initial_control_fn = constant_vector(VectorXd::Zero(1));
    p.x0 = (VectorXd(2) << -4.0, 0.0).finished();
    p.Q = (MatrixXd(2, 2) << 2, 0, 0, 0).finished();
    p.R = constant_matrix(MatrixXd::Constant(1, 1, 0.05));
    p.T = MatrixXd::Zero(2, 2);
    p.reference = [](double t) { return (VectorXd(2) << 0.2 * t, 0.0).finished(); };
    p.validate();

    WaveletBasis basis(6, 8);
    DelayRounding rounding = round_delays(p, 6);
    ProblemExpansion x = expand_problem(p, basis, rounding.n_state, rounding.n_input);

    // constant plant: exact Kronecker structure
    CHECK((x.A_tilde - kron(MatrixXd::Identity(basis.dim(), basis.dim()), A))
              .cwiseAbs()
              .maxCoeff() < 1e-12);

    // printed F_1 of the benchmark: -sqrt(pi)/2 on the first two blocks,
    // channel 1 only, zero past n_mu blocks
    double expect = -std::sqrt(kPi) / 2.0;
    CHECK(x.F_mu[0][0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(x.F_mu[0][2 * 8 * 1] == doctest::Approx(expect).epsilon(1e-12)); // block 2, m=0, ch 1
    CHECK(x.F_mu[0].segment(2 * 2 * 8, x.F_mu[0].size() - 2 * 2 * 8).cwiseAbs().maxCoeff() ==
          0.0);
    for (int m = 1; m < 8; ++m) CHECK(x.F_mu[0][2 * m] == doctest::Approx(0.0).scale(1.0));

    // zero initial control gives a zero G_nu
    CHECK(x.G_nu[0].cwiseAbs().maxCoeff() == 0.0);

    // reconstruction of Gamma matches the reference within the Theorem-1 bound
    CoeffVector gamma(basis, 2, x.Gamma);
    for (int i = 0; i <= 100; ++i) {
        double tau = static_cast<double>(i) / 100;
        CHECK(gamma.reconstruct(tau)[0] ==
              doctest::Approx(0.2 * tau * 15.0).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("output-to-state reformulation") {
    // five-state plant mapped through a 2-output matrix: q grows 5 -> 7
    DelayedLqtProblem p;
    p.q = 5;
    p.r = 2;
    p.t_f = 6.0;
    p.A = constant_matrix(MatrixXd::Identity(5, 5));
    p.B = constant_matrix(MatrixXd::Ones(5, 2));
    p.x0 = VectorXd::Constant(5, 0.05);
    p.Q = MatrixXd::Zero(5, 5);
    p.R = constant_matrix(MatrixXd::Identity(2, 2));
    p.T = MatrixXd::Zero(5, 5);

    MatrixXd C_y(2, 5);
    C_y << 2, 0, 1, 0, 0, 0, 1.5, 0, 1.2, 1;
    MatrixXd D_y = MatrixXd::Zero(2, 2);
    MatrixXd Q_y = 1e3 * MatrixXd::Identity(2, 2);
    auto r_y = [](double t) { return (VectorXd(2) << std::sin(t), std::cos(t)).finished(); };

    OutputReform reform = output_to_state_reform(p, C_y, D_y, Q_y, r_y);
    CHECK(reform.problem.q == 7);
    CHECK(!reform.has_derivative_adjustment);
    CHECK(reform.problem.x0[5] == doctest::Approx(2 * 0.05 + 0.05));
    CHECK(reform.problem.x0[6] == doctest::Approx(1.5 * 0.05 + 1.2 * 0.05 + 0.05));
    // augmented dynamics rows are C_y times the original rows
    MatrixXd Aaug = reform.problem.A(0.0);
    CHECK((Aaug.block(5, 0, 2, 5) - C_y * MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK(Aaug.rightCols(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(reform.problem.Q.bottomRightCorner(2, 2).isApprox(Q_y));

    // reformulation consistency: z(t) tracks C_y x(t) for an arbitrary pair
    VectorXd xs = (VectorXd(5) << 0.3, -0.2, 0.9, 0.1, -0.5).finished();
    VectorXd z = C_y * xs;
    VectorXd aug(7);
    aug << xs, z;
    CHECK((reform.problem.A(1.0) * aug).head(5).isApprox((p.A(1.0) * xs)));
    CHECK((reform.problem.A(1.0) * aug).tail(2).isApprox(C_y * (p.A(1.0) * xs), 1e-12));

    SUBCASE("feedthrough produces the derivative adjustment") {
        MatrixXd D2(2, 2);
        D2 << 0, 0, -1, 0;
        OutputReform with_d = output_to_state_reform(p, C_y, D2, Q_y, r_y);
        CHECK(with_d.has_derivative_adjustment);
        REQUIRE(with_d.problem.control_derivative.has_value());
        CHECK((with_d.problem.control_derivative->bottomRows(2) - D2).cwiseAbs().maxCoeff() ==
              0.0);
    }

    SUBCASE("rank-deficient output map is rejected") {
        MatrixXd bad(2, 5);
        bad.setZero();
        bad.row(0) << 1, 0, 0, 0, 0;
        bad.row(1) << 2, 0, 0, 0, 0;
        CHECK_THROWS_AS(output_to_state_reform(p, bad, D_y, Q_y, r_y),
                        std::invalid_argument);
    }
}

TEST_CASE("the transformed-row example rows") {
    // A' rows of the 4-state plant augmented with its two outputs
    MatrixXd A(4, 4);
    A << -9, 4, 4.5, -2, -3, 0.4, 0.7, -6, 5, 0.3, 5, 3, 4, -2.5, 2, 3;
    MatrixXd B(4, 3);
    B << 1, 1.5, 0, 0.3, 2, 0.4, 0.3, -0.3, 0, -0.3, -1, 0.5;
    MatrixXd C_y(2, 4);
    C_y << 1, 0, 2, 1, -1, 1, 0, -1;

    VectorXd A1 = (C_y.row(0) * A).transpose();
    VectorXd B1 = (C_y.row(0) * B).transpose();
    CHECK(A1.isApprox((VectorXd(4) << 5.0, 2.1, 16.5, 7.0).finished(), 1e-12));
    CHECK(B1.isApprox((VectorXd(3) << 1.3, -0.1, 0.5).finished(), 1e-12));
}

TEST_CASE("problem validation catches bad weights") {
    DelayedLqtProblem p = small_delay_problem(0.5, 1.0);
    p.Q = (MatrixXd(1, 1) << -1.0).finished();
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    DelayedLqtProblem p2 = small_delay_problem(0.5, 1.0);
    p2.R = constant_matrix(MatrixXd::Zero(1, 1));
    CHECK_THROWS_AS(p2.validate(), std::invalid_argument);

    DelayedLqtProblem p3 = small_delay_problem(1.5, 1.0);
    CHECK_THROWS_AS(p3.validate(), std::invalid_argument);
}
