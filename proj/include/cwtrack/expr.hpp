#pragma once

#include <memory>
#include <string>
#include <vector>

namespace cwt {

/// Small expression evaluator for problem documents.  Grammar over the
/// single variable `t`: +, -, *, /, ^, sin, cos, exp, and
/// piecewise(cond1, val1, ..., condN, valN, default) with conditions of the
/// form <expr> (< | <= | > | >=) <expr>.
class Expr {
public:
    static Expr parse(const std::string& text);
    static Expr constant(double v);

    Expr() = default;

    double eval(double t) const;

    /// Values of t where a piecewise condition of the form `t OP c` (or
    /// `c OP t`) switches branch.  Used to split quadrature panels.
    const std::vector<double>& breakpoints() const { return breakpoints_; }

    bool is_constant() const;
    const std::string& text() const { return text_; }

    struct Node;   // implementation detail, defined in expr.cpp

private:
    std::shared_ptr<const Node> root_;
    std::vector<double> breakpoints_;
    std::string text_;
};

} // namespace cwt
