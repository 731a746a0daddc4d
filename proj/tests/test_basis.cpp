#include "cwtrack/basis.hpp"
#include "cwtrack/opmat.hpp"

#include <cmath>
#include <doctest.h>
#include <random>

using namespace cwt;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("basis rejects invalid resolution") {
    CHECK_THROWS_AS(WaveletBasis(1, 5), std::invalid_argument);
    CHECK_THROWS_AS(WaveletBasis(3, 2), std::invalid_argument);
    WaveletBasis b(2, 3);
    CHECK(b.dim() == 6);
    CHECK(WaveletBasis(4, 5).dim() == 40);
}

TEST_CASE("eval_psi matches the closed forms") {
    WaveletBasis b(2, 5);
    // constant wavelet sqrt(2^k/pi) on its subinterval
    CHECK(b.eval_psi(1, 0, 0.25) == doctest::Approx(2.0 / std::sqrt(kPi)).epsilon(1e-14));
    // outside support
    CHECK(b.eval_psi(2, 0, 0.25) == 0.0);
    // m = 2 at the subinterval midpoint: T_2(0) = -1
    CHECK(b.eval_psi(1, 2, 0.25) ==
          doctest::Approx(-std::sqrt(8.0 / kPi)).epsilon(1e-14));
    CHECK_THROWS_AS(b.eval_psi(0, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(b.eval_psi(1, 7, 0.1), std::invalid_argument);
}

TEST_CASE("closed-right interface convention") {
    WaveletBasis b(3, 4);
    CHECK(b.subinterval_of(0.25) == 1);
    CHECK(b.subinterval_of(0.25 + 1e-12) == 2);
    CHECK(b.subinterval_of(0.0) == 1);
    CHECK(b.subinterval_of(1.0) == 4);
    // psi of the right neighbour vanishes at the interface, its unclamped
    // (limit) value does not
    CHECK(b.eval_psi(2, 1, 0.25) == 0.0);
    // limit from the right: T_1(-1) = -1 and the m>=1 amplitude is sqrt(2^{k+1}/pi)
    CHECK(b.eval_psi_unclamped(2, 1, 0.25) ==
          doctest::Approx(-std::sqrt(16.0 / kPi)).epsilon(1e-13));
}

TEST_CASE("eval_vector support pattern") {
    WaveletBasis b(2, 5);
    VectorXd v = b.eval_vector(0.1);
    for (int i = 0; i < 5; ++i) CHECK(v[i] != 0.0);
    for (int i = 5; i < 10; ++i) CHECK(v[i] == 0.0);

    WaveletBasis b3(3, 4);
    VectorXd v3 = b3.eval_vector(0.9);
    for (int i = 0; i < 12; ++i) CHECK(v3[i] == 0.0);
    for (int i = 12; i < 16; ++i) CHECK(v3[i] != 0.0);
}

TEST_CASE("expand_scalar of a constant") {
    for (int k : {2, 3, 4}) {
        WaveletBasis b(k, 5);
        VectorXd c = expand_scalar(b, [](double) { return 1.0; });
        double expect = std::sqrt(kPi / std::pow(2.0, k));
        for (int n = 1; n <= b.subintervals(); ++n) {
            CHECK(c[b.index(n, 0)] == doctest::Approx(expect).epsilon(1e-13));
            for (int m = 1; m < 5; ++m) CHECK(std::abs(c[b.index(n, m)]) < 1e-13);
        }
    }
}

TEST_CASE("expand_scalar reproduces the printed reference expansion") {
    // piecewise-quadratic reference: 9t^2-6t+1 then 1/4
    WaveletBasis b(2, 5);
    auto r = [](double t) { return t < 0.5 ? 9 * t * t - 6 * t + 1 : 0.25; };
    VectorXd g = expand_scalar(b, r);
    double sp = std::sqrt(kPi);
    double s2p = std::sqrt(2 * kPi);
    VectorXd expect(10);
    expect << 11 * sp / 64, -3 * s2p / 32, 9 * s2p / 128, 0, 0, sp / 8, 0, 0, 0, 0;
    CHECK((g - expect).cwiseAbs().maxCoeff() < 1e-13);

    // shifted initial function t^2 - t + 5/4 on the first block only
    ExpandOptions opts;
    opts.blocks = {1};
    VectorXd f = expand_scalar(b, [](double t) { return t * t - t + 1.25; }, opts);
    CHECK(f[0] == doctest::Approx(35 * sp / 64).epsilon(1e-13));
    CHECK(f[1] == doctest::Approx(-s2p / 32).epsilon(1e-13));
    CHECK(f[2] == doctest::Approx(s2p / 128).epsilon(1e-13));
    for (int i = 3; i < 10; ++i) CHECK(std::abs(f[i]) < 1e-14);
}

TEST_CASE("expand_vector interleaves channels") {
    WaveletBasis b(2, 5);
    VectorXd x0(1);
    x0 << 1.0;
    CoeffVector c = constant_expansion(b, x0);
    VectorXd expect = VectorXd::Zero(10);
    expect[0] = expect[5] = std::sqrt(kPi) / 2.0;
    CHECK((c.data() - expect).cwiseAbs().maxCoeff() < 1e-14);

    // r(tau) = [3 tau, 0] at k=6, M=8 reproduces the printed block pattern
    WaveletBasis b6(6, 8);
    CoeffVector g = expand_vector(
        b6, {[](double t) { return 3.0 * t; }, [](double) { return 0.0; }});
    for (int n = 1; n <= 32; ++n) {
        CHECK(g.at(n, 0, 0) ==
              doctest::Approx(3.0 * (2 * n - 1) * std::sqrt(kPi) / 512).epsilon(1e-12));
        CHECK(g.at(n, 1, 0) == doctest::Approx(3.0 * std::sqrt(2 * kPi) / 1024).epsilon(1e-12));
        CHECK(g.at(n, 0, 1) == 0.0);
        for (int m = 2; m < 8; ++m) CHECK(std::abs(g.at(n, m, 0)) < 1e-14);
    }
}

TEST_CASE("expansion error surfaces the offending node") {
    WaveletBasis b(2, 4);
    CHECK_THROWS_AS(expand_scalar(b, [](double t) { return 1.0 / (t - t); }),
                    std::runtime_error);
}

TEST_CASE("reconstruct round-trips polynomials exactly") {
    WaveletBasis b(3, 6);
    VectorXd c = expand_scalar(b, [](double t) { return t * t * t; });
    CoeffVector cv(b, 1, c);
    CHECK(cv.reconstruct(0.37)[0] == doctest::Approx(0.050653).epsilon(1e-9));

    CoeffVector zero(b, 1);
    CHECK(zero.reconstruct(0.5)[0] == 0.0);

    WaveletBasis b2(2, 5);
    auto r = [](double t) { return t < 0.5 ? 9 * t * t - 6 * t + 1 : 0.25; };
    CoeffVector g(b2, 1, expand_scalar(b2, r));
    CHECK(g.reconstruct(0.25)[0] == doctest::Approx(0.0625).epsilon(1e-9));
}

TEST_CASE("polynomial reproduction property") {
    WaveletBasis b(3, 6);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> coef(5);
        for (auto& c : coef) c = dist(rng);
        auto f = [&](double t) {
            double acc = 0.0;
            for (int d = static_cast<int>(coef.size()) - 1; d >= 0; --d) acc = acc * t + coef[d];
            return acc;
        };
        CoeffVector cv(b, 1, expand_scalar(b, f));
        for (int i = 0; i <= 100; ++i) {
            double t = static_cast<double>(i) / 100;
            CHECK(cv.reconstruct(t)[0] == doctest::Approx(f(t)).epsilon(1e-9));
        }
    }
}

TEST_CASE("to_piecewise_poly is an exact basis change") {
    WaveletBasis b(2, 5);

    SUBCASE("constant function") {
        CoeffVector one(b, 1, expand_scalar(b, [](double) { return 1.0; }));
        PiecewisePoly p = to_piecewise_poly(one);
        for (int i = 0; i < p.pieces(); ++i) {
            CHECK(p.piece(i)(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
            for (int d = 1; d < 5; ++d) CHECK(std::abs(p.piece(i)(0, d)) < 1e-10);
        }
    }

    SUBCASE("printed reference pieces") {
        auto r = [](double t) { return t < 0.5 ? 9 * t * t - 6 * t + 1 : 0.25; };
        CoeffVector g(b, 1, expand_scalar(b, r));
        PiecewisePoly p = to_piecewise_poly(g);
        CHECK(p.piece(0)(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(p.piece(0)(0, 1) == doctest::Approx(-6.0).epsilon(1e-9));
        CHECK(p.piece(0)(0, 2) == doctest::Approx(9.0).epsilon(1e-9));
        CHECK(p.piece(1)(0, 0) == doctest::Approx(0.25).epsilon(1e-9));
        for (int d = 1; d < 5; ++d) CHECK(std::abs(p.piece(1)(0, d)) < 1e-9);
    }

    SUBCASE("random coefficients agree with reconstruction at 100 points") {
        std::mt19937 rng(3);
        std::normal_distribution<double> dist;
        VectorXd data(b.dim());
        for (int i = 0; i < data.size(); ++i) data[i] = dist(rng);
        CoeffVector cv(b, 1, data);
        PiecewisePoly p = to_piecewise_poly(cv);
        for (int i = 0; i <= 100; ++i) {
            double t = static_cast<double>(i) / 100;
            CHECK(p.eval(t)[0] == doctest::Approx(cv.reconstruct(t)[0]).epsilon(1e-10));
        }
    }
}

TEST_CASE("theorem-1 coefficient bounds") {
    SUBCASE("zero sup-norms give zero bounds") {
        WaveletBasis b(3, 4);
        VectorXd bounds = theorem1_coefficient_bounds(b, 0, 0, 0);
        CHECK(bounds.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("m = 1 bound at k = 2") {
        WaveletBasis b(2, 4);
        VectorXd bounds = theorem1_coefficient_bounds(b, 1.0, 1.0, 1.0);
        CHECK(bounds[b.index(1, 1)] == doctest::Approx(std::sqrt(kPi / 32.0)).epsilon(1e-14));
    }

    SUBCASE("computed coefficients of sin(2 pi t) obey the bounds") {
        WaveletBasis b(4, 8);
        VectorXd c = expand_scalar(b, [](double t) { return std::sin(2 * kPi * t); });
        VectorXd bounds =
            theorem1_coefficient_bounds(b, 1.0, 2 * kPi, 4 * kPi * kPi);
        for (int i = 0; i < c.size(); ++i) CHECK(std::abs(c[i]) <= bounds[i] + 1e-12);
    }
}

TEST_CASE("orthonormality under the Chebyshev weight") {
    WaveletBasis b(3, 6);
    // int psi_nm psi_nm' w_n dt via the theta substitution per subinterval
    QuadratureRule rule = gauss_legendre(64, 0.0, kPi);
    for (int n = 1; n <= b.subintervals(); ++n) {
        for (int m = 0; m < 6; ++m) {
            for (int m2 = m; m2 < 6; ++m2) {
                double acc = 0.0;
                for (int i = 0; i < rule.nodes.size(); ++i) {
                    double t = (std::cos(rule.nodes[i]) + 2 * n - 1) / 8.0;
                    acc += rule.weights[i] * b.eval_psi_unclamped(n, m, t) *
                           b.eval_psi_unclamped(n, m2, t) / 8.0;
                }
                CHECK(acc == doctest::Approx(m == m2 ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
            }
        }
    }
    // compact support: different subintervals never overlap
    for (double t : {0.1, 0.4, 0.7, 0.95})
        CHECK(b.eval_psi(1, 2, t) * b.eval_psi(3, 2, t) == 0.0);
}
