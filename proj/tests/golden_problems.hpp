#pragma once

// Programmatic builders of the benchmark tracking problems used across the
// unit and acceptance suites.

#include "cwtrack/problem.hpp"

#include <cmath>

namespace golden {

using namespace cwt;

// scalar plant with one state and one input delay, piecewise reference
inline DelayedLqtProblem example1(bool time_varying_R) {
    DelayedLqtProblem p;
    p.q = 1;
    p.r = 1;
    p.t_f = 1.0;
    p.A = [](double t) { return MatrixXd::Constant(1, 1, t * t); };
    p.B = constant_matrix(MatrixXd::Constant(1, 1, 2.0));
    p.delayed_state_terms.push_back(
        {[](double t) { return MatrixXd::Constant(1, 1, -3.0 * t); }, 0.5});
    p.delayed_input_terms.push_back({constant_matrix(MatrixXd::Constant(1, 1, 1.0)), 0.5});
    p.initial_state_fn = [](double t) { return VectorXd::Constant(1, t * t + 1.0); };
    p.initial_control_fn = [](double t) { return VectorXd::Constant(1, t + 1.0); };
    p.x0 = VectorXd::Constant(1, 1.0);
    p.Q = MatrixXd::Constant(1, 1, 2.0);
    if (time_varying_R) {
        p.R = [](double t) { return MatrixXd::Constant(1, 1, 0.01 / (5.0 * t + 1.0)); };
        p.R_time_varying = true;
    } else {
        p.R = constant_matrix(MatrixXd::Constant(1, 1, 0.01));
    }
    p.T = MatrixXd::Constant(1, 1, 0.5);
    p.reference = [](double t) {
        return VectorXd::Constant(1, t < 0.5 ? 9 * t * t - 6 * t + 1 : 0.25);
    };
    return p;
}

// two-state benchmark with small state and input delays over a long horizon
inline DelayedLqtProblem example2(double q_scale = 1.0, double r_scale = 1.0) {
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
    p.Q = (MatrixXd(2, 2) << 2.0 * q_scale, 0, 0, 0).finished();
    p.R = constant_matrix(MatrixXd::Constant(1, 1, 0.05 * r_scale));
    p.T = MatrixXd::Zero(2, 2);
    p.reference = [](double t) { return (VectorXd(2) << 0.2 * t, 0.0).finished(); };
    return p;
}

// output-tracking benchmark solved as state tracking on x1 after folding the
// output map into the weight, one state delay, exponential reference
inline DelayedLqtProblem example3(double h_x, double t_f) {
    DelayedLqtProblem p;
    p.q = 2;
    p.r = 1;
    p.t_f = t_f;
    MatrixXd A(2, 2), A1(2, 2), B(2, 1);
    A << 0, 1, -1, 1;
    A1 << -1, 0, 0.6, -1.5;
    B << 0, 2;
    p.A = constant_matrix(A);
    p.B = constant_matrix(B);
    p.delayed_state_terms.push_back({constant_matrix(A1), h_x});
    p.initial_state_fn = constant_vector((VectorXd(2) << 3.0, 0.0).finished());
    p.x0 = (VectorXd(2) << 3.0, 0.0).finished();
    p.Q = (MatrixXd(2, 2) << 8.0, 0, 0, 0).finished();
    p.R = constant_matrix(MatrixXd::Ones(1, 1));
    p.T = MatrixXd::Zero(2, 2);
    p.reference = [](double t) {
        return (VectorXd(2) << 0.3 * std::exp(-0.1 * t) - 0.15 * std::exp(-0.2 * t), 0.0)
            .finished();
    };
    return p;
}

// three-state time-varying plant with one delayed-state term; case selects
// the constraint set of the constrained benchmark
inline DelayedLqtProblem example6(double h_x) {
    DelayedLqtProblem p;
    p.q = 3;
    p.r = 1;
    p.t_f = 4.0;
    p.A = [](double t) {
        MatrixXd m(3, 3);
        m << 0, 1, 0, 0, 0, 1, std::cos(t), 0, 0;
        return m;
    };
    p.B = [](double t) {
        MatrixXd m(3, 1);
        m << 0, 0, 2.0 + std::sin(t);
        return m;
    };
    p.delayed_state_terms.push_back({[](double t) {
                                         MatrixXd m(3, 3);
                                         m << 0, -1, 0, -0.1 * t * t, 0, 0.5, std::exp(-t), 0, t;
                                         return m;
                                     },
                                     h_x});
    p.initial_state_fn = [](double t) {
        return (VectorXd(3) << 1.0, 0.0, std::sin(t)).finished();
    };
    p.x0 = (VectorXd(3) << 1.0, 0.0, 0.0).finished();
    p.Q = (MatrixXd(3, 3) << 100, 0, 0, 0, 0, 0, 0, 0, 0).finished();
    p.R = constant_matrix(MatrixXd::Ones(1, 1));
    p.T = (MatrixXd(3, 3) << 2, 0, 0, 0, 0, 0, 0, 0, 0).finished();
    p.reference = [](double t) { return (VectorXd(3) << std::cos(t), 0.0, 0.0).finished(); };
    return p;
}

// six-state augmented MIMO plant with control-derivative coupling and a
// discontinuous two-channel reference
inline DelayedLqtProblem example5() {
    DelayedLqtProblem p;
    p.q = 6;
    p.r = 3;
    p.t_f = 3.0;
    MatrixXd A(6, 6), B(6, 3), Bu(6, 3);
    A.setZero();
    A.topLeftCorner(4, 4) << -9, 4, 4.5, -2, -3, 0.4, 0.7, -6, 5, 0.3, 5, 3, 4, -2.5, 2, 3;
    A.block(4, 0, 1, 4) << 5.0, 2.1, 16.5, 7.0;
    A.block(5, 0, 1, 4) << 2.0, -1.1, -5.8, -7.0;
    B << 1, 1.5, 0, 0.3, 2, 0.4, 0.3, -0.3, 0, -0.3, -1, 0.5, 1.3, -0.1, 0.5, -0.4, 1.5, -0.1;
    Bu.setZero();
    Bu(5, 1) = -1.0;
    p.A = constant_matrix(A);
    p.B = constant_matrix(B);
    p.control_derivative = Bu;
    p.x0 = (VectorXd(6) << -0.25, -0.5, 0.25, -0.3, -0.05, 0.05).finished();
    p.Q = MatrixXd::Zero(6, 6);
    p.Q(4, 4) = p.Q(5, 5) = 1e4;
    p.R = constant_matrix(MatrixXd::Identity(3, 3));
    p.T = MatrixXd::Zero(6, 6);
    p.reference = [](double t) {
        VectorXd v = VectorXd::Zero(6);
        constexpr double pi = 3.14159265358979323846;
        if (t < 1.0)
            v[4] = std::cos(2 * pi * t);
        else if (t < 2.0)
            v[4] = 0.5 * t * t * (1.0 - t);
        else
            v[4] = 0.5 * std::cos(4 * pi * t) + 1.0;
        if (t < 1.0)
            v[5] = 1.2 * t * t * (1.0 - t);
        else if (t < 2.0)
            v[5] = std::cos(2 * pi * t);
        else
            v[5] = 0.2 * std::sin(4 * pi * t) - 0.5;
        return v;
    };
    p.compat_continuity = false;
    return p;
}

} // namespace golden
