#include "cwtrack/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace cwt {

struct Expr::Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Piecewise, Cmp };
    Op op = Op::Const;
    double value = 0.0;
    int cmp = 0; // 0: <   1: <=   2: >   3: >=
    std::vector<std::shared_ptr<const Node>> args;

    double eval(double t) const {
        switch (op) {
        case Op::Const: return value;
        case Op::Var: return t;
        case Op::Add: return args[0]->eval(t) + args[1]->eval(t);
        case Op::Sub: return args[0]->eval(t) - args[1]->eval(t);
        case Op::Mul: return args[0]->eval(t) * args[1]->eval(t);
        case Op::Div: return args[0]->eval(t) / args[1]->eval(t);
        case Op::Pow: return std::pow(args[0]->eval(t), args[1]->eval(t));
        case Op::Neg: return -args[0]->eval(t);
        case Op::Sin: return std::sin(args[0]->eval(t));
        case Op::Cos: return std::cos(args[0]->eval(t));
        case Op::Exp: return std::exp(args[0]->eval(t));
        case Op::Cmp: {
            double a = args[0]->eval(t), b = args[1]->eval(t);
            switch (cmp) {
            case 0: return a < b ? 1.0 : 0.0;
            case 1: return a <= b ? 1.0 : 0.0;
            case 2: return a > b ? 1.0 : 0.0;
            default: return a >= b ? 1.0 : 0.0;
            }
        }
        case Op::Piecewise:
            for (size_t i = 0; i + 1 < args.size(); i += 2)
                if (args[i]->eval(t) != 0.0) return args[i + 1]->eval(t);
            return args.back()->eval(t);
        }
        return 0.0;
    }
};

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : src_(normalize(text)) {}

    std::shared_ptr<const Expr::Node> parse(std::vector<double>& breakpoints) {
        breakpoints_ = &breakpoints;
        auto node = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw std::invalid_argument("expression: trailing input at '" + src_.substr(pos_) + "'");
        return node;
    }

private:
    using NodePtr = std::shared_ptr<const Expr::Node>;

    static std::string normalize(const std::string& in) {
        // map the typographic minus (U+2212) to '-'
        std::string out;
        for (size_t i = 0; i < in.size();) {
            if (i + 2 < in.size() && static_cast<unsigned char>(in[i]) == 0xE2 &&
                static_cast<unsigned char>(in[i + 1]) == 0x88 &&
                static_cast<unsigned char>(in[i + 2]) == 0x92) {
                out += '-';
                i += 3;
            } else {
                out += in[i++];
            }
        }
        return out;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    NodePtr make(Expr::Node::Op op, std::vector<NodePtr> args, double v = 0.0, int cmp = 0) {
        auto n = std::make_shared<Expr::Node>();
        n->op = op;
        n->args = std::move(args);
        n->value = v;
        n->cmp = cmp;
        return n;
    }

    NodePtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (consume('+'))
                lhs = make(Expr::Node::Op::Add, {lhs, parse_term()});
            else if (consume('-'))
                lhs = make(Expr::Node::Op::Sub, {lhs, parse_term()});
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            if (consume('*'))
                lhs = make(Expr::Node::Op::Mul, {lhs, parse_unary()});
            else if (consume('/'))
                lhs = make(Expr::Node::Op::Div, {lhs, parse_unary()});
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (consume('-')) return make(Expr::Node::Op::Neg, {parse_unary()});
        if (consume('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        if (consume('^')) {
            // right-associative; exponent may itself be unary-negative
            auto exp = parse_unary_power();
            return make(Expr::Node::Op::Pow, {base, exp});
        }
        return base;
    }

    NodePtr parse_unary_power() {
        if (consume('-')) return make(Expr::Node::Op::Neg, {parse_unary_power()});
        auto base = parse_primary();
        if (consume('^')) return make(Expr::Node::Op::Pow, {base, parse_unary_power()});
        return base;
    }

    NodePtr parse_comparison() {
        auto lhs = parse_expr();
        skip_ws();
        int cmp = -1;
        if (pos_ < src_.size()) {
            if (src_[pos_] == '<') {
                cmp = (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') ? 1 : 0;
                pos_ += (cmp == 1) ? 2 : 1;
            } else if (src_[pos_] == '>') {
                cmp = (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') ? 3 : 2;
                pos_ += (cmp == 3) ? 2 : 1;
            }
        }
        if (cmp < 0) throw std::invalid_argument("expression: expected comparison in piecewise");
        auto rhs = parse_expr();
        // record t-vs-constant switch points
        if (lhs->op == Expr::Node::Op::Var && rhs->op == Expr::Node::Op::Const)
            breakpoints_->push_back(rhs->value);
        else if (rhs->op == Expr::Node::Op::Var && lhs->op == Expr::Node::Op::Const)
            breakpoints_->push_back(lhs->value);
        return make(Expr::Node::Op::Cmp, {lhs, rhs}, 0.0, cmp);
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw std::invalid_argument("expression: unexpected end");
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v = std::stod(src_.substr(pos_), &used);
            pos_ += used;
            return make(Expr::Node::Op::Const, {}, v);
        }
        if (consume('(')) {
            auto inner = parse_expr();
            if (!consume(')')) throw std::invalid_argument("expression: missing ')'");
            return inner;
        }
        // identifier
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string id = src_.substr(start, pos_ - start);
        if (id.empty())
            throw std::invalid_argument(std::string("expression: unexpected character '") + c + "'");
        if (id == "t") return make(Expr::Node::Op::Var, {});
        if (id == "pi") return make(Expr::Node::Op::Const, {}, 3.14159265358979323846);
        if (id == "sin" || id == "cos" || id == "exp") {
            if (!consume('(')) throw std::invalid_argument("expression: expected '(' after " + id);
            auto arg = parse_expr();
            if (!consume(')')) throw std::invalid_argument("expression: missing ')'");
            auto op = id == "sin"   ? Expr::Node::Op::Sin
                      : id == "cos" ? Expr::Node::Op::Cos
                                    : Expr::Node::Op::Exp;
            return make(op, {arg});
        }
        if (id == "piecewise") {
            if (!consume('(')) throw std::invalid_argument("expression: expected '(' after piecewise");
            std::vector<NodePtr> args;
            for (;;) {
                // each item is either "cond, value" or the trailing default
                size_t save = pos_;
                NodePtr cond;
                try {
                    cond = parse_comparison();
                } catch (const std::invalid_argument&) {
                    pos_ = save;
                }
                if (cond) {
                    if (!consume(','))
                        throw std::invalid_argument("expression: piecewise condition needs a value");
                    args.push_back(cond);
                    args.push_back(parse_expr());
                    if (consume(',')) continue;
                    throw std::invalid_argument("expression: piecewise needs a default branch");
                }
                args.push_back(parse_expr());
                if (!consume(')')) throw std::invalid_argument("expression: missing ')' in piecewise");
                return make(Expr::Node::Op::Piecewise, std::move(args));
            }
        }
        throw std::invalid_argument("expression: unknown identifier '" + id + "'");
    }

    std::string src_;
    size_t pos_ = 0;
    std::vector<double>* breakpoints_ = nullptr;
};

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    Parser p(text);
    e.root_ = p.parse(e.breakpoints_);
    e.text_ = text;
    return e;
}

Expr Expr::constant(double v) {
    Expr e;
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Const;
    n->value = v;
    e.root_ = n;
    e.text_ = std::to_string(v);
    return e;
}

double Expr::eval(double t) const {
    if (!root_) throw std::logic_error("Expr: empty");
    return root_->eval(t);
}

bool Expr::is_constant() const {
    return root_ && root_->op == Node::Op::Const;
}

} // namespace cwt
