#include "cwtrack/json_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace cwt {

using nlohmann::json;

namespace {

Expr parse_entry(const json& j, const std::string& path) {
    try {
        if (j.is_number()) return Expr::constant(j.get<double>());
        if (j.is_string()) return Expr::parse(j.get<std::string>());
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    throw ParseError(path + ": expected a number or expression string");
}

/// rows x cols matrix of expressions from nested arrays (array of rows).
struct ExprMatrix {
    int rows = 0, cols = 0;
    std::vector<Expr> entries;   // row-major
    bool constant = true;

    MatrixXd eval(double t) const {
        MatrixXd m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = entries[i * cols + j].eval(t);
        return m;
    }

    std::vector<double> breakpoints() const {
        std::vector<double> out;
        for (const auto& e : entries)
            out.insert(out.end(), e.breakpoints().begin(), e.breakpoints().end());
        return out;
    }
};

ExprMatrix parse_matrix(const json& j, int rows, int cols, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ParseError(path + ": expected " + std::to_string(rows) + " rows");
    ExprMatrix m;
    m.rows = rows;
    m.cols = cols;
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError(path + "/" + std::to_string(i) + ": expected " +
                             std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) {
            m.entries.push_back(parse_entry(row[c], path + "/" + std::to_string(i) + "/" +
                                                        std::to_string(c)));
            m.constant = m.constant && m.entries.back().is_constant();
        }
    }
    return m;
}

std::vector<Expr> parse_vector_exprs(const json& j, int len, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != len)
        throw ParseError(path + ": expected an array of length " + std::to_string(len));
    std::vector<Expr> out;
    for (int i = 0; i < len; ++i)
        out.push_back(parse_entry(j[i], path + "/" + std::to_string(i)));
    return out;
}

VectorXd parse_numeric_vector(const json& j, int len, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != len)
        throw ParseError(path + ": expected an array of length " + std::to_string(len));
    VectorXd v(len);
    for (int i = 0; i < len; ++i) {
        if (!j[i].is_number())
            throw ParseError(path + "/" + std::to_string(i) + ": expected a number");
        v[i] = j[i].get<double>();
    }
    return v;
}

MatrixXd parse_numeric_matrix(const json& j, int rows, int cols, const std::string& path) {
    ExprMatrix m = parse_matrix(j, rows, cols, path);
    if (!m.constant) throw ParseError(path + ": must be numeric (no expressions)");
    return m.eval(0.0);
}

MatrixFunc matrix_func(ExprMatrix m) {
    if (m.constant) {
        MatrixXd v = m.eval(0.0);
        return constant_matrix(std::move(v));
    }
    return [m = std::move(m)](double t) { return m.eval(t); };
}

VectorFunc vector_func(std::vector<Expr> entries) {
    return [entries = std::move(entries)](double t) {
        VectorXd v(entries.size());
        for (size_t i = 0; i < entries.size(); ++i) v[i] = entries[i].eval(t);
        return v;
    };
}

} // namespace

ProblemDocument parse_problem(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("/: expected an object");

    auto require = [&](const char* key) -> const json& {
        if (!doc.contains(key)) throw ParseError(std::string("/") + key + ": missing");
        return doc[key];
    };

    ProblemDocument out;
    DelayedLqtProblem& p = out.problem;

    if (!require("q").is_number_integer()) throw ParseError("/q: expected an integer");
    if (!require("r").is_number_integer()) throw ParseError("/r: expected an integer");
    p.q = doc["q"].get<int>();
    p.r = doc["r"].get<int>();
    if (p.q < 1 || p.r < 1) throw ParseError("/q,/r: must be positive");

    if (!require("t_f").is_number() || doc["t_f"].get<double>() <= 0.0)
        throw ParseError("/t_f: expected a positive number");
    p.t_f = doc["t_f"].get<double>();

    p.A = matrix_func(parse_matrix(require("A"), p.q, p.q, "/A"));
    p.B = matrix_func(parse_matrix(require("B"), p.q, p.r, "/B"));
    p.x0 = parse_numeric_vector(require("x0"), p.q, "/x0");
    p.Q = parse_numeric_matrix(require("Q"), p.q, p.q, "/Q");
    p.T = parse_numeric_matrix(require("T"), p.q, p.q, "/T");

    {
        ExprMatrix rmat = parse_matrix(require("R"), p.r, p.r, "/R");
        p.R_time_varying = !rmat.constant;
        p.R = matrix_func(std::move(rmat));
    }

    if (doc.contains("delayed_state_terms")) {
        const json& arr = doc["delayed_state_terms"];
        if (!arr.is_array()) throw ParseError("/delayed_state_terms: expected an array");
        for (size_t i = 0; i < arr.size(); ++i) {
            std::string path = "/delayed_state_terms/" + std::to_string(i);
            if (!arr[i].is_object() || !arr[i].contains("A") || !arr[i].contains("h"))
                throw ParseError(path + ": expected {A, h}");
            DelayedTerm term;
            term.coefficient = matrix_func(parse_matrix(arr[i]["A"], p.q, p.q, path + "/A"));
            term.delay = arr[i]["h"].get<double>();
            p.delayed_state_terms.push_back(std::move(term));
        }
    }
    if (doc.contains("delayed_input_terms")) {
        const json& arr = doc["delayed_input_terms"];
        if (!arr.is_array()) throw ParseError("/delayed_input_terms: expected an array");
        for (size_t i = 0; i < arr.size(); ++i) {
            std::string path = "/delayed_input_terms/" + std::to_string(i);
            if (!arr[i].is_object() || !arr[i].contains("B") || !arr[i].contains("h"))
                throw ParseError(path + ": expected {B, h}");
            DelayedTerm term;
            term.coefficient = matrix_func(parse_matrix(arr[i]["B"], p.q, p.r, path + "/B"));
            term.delay = arr[i]["h"].get<double>();
            p.delayed_input_terms.push_back(std::move(term));
        }
    }

    if (doc.contains("f")) p.initial_state_fn = vector_func(parse_vector_exprs(doc["f"], p.q, "/f"));
    if (doc.contains("g"))
        p.initial_control_fn = vector_func(parse_vector_exprs(doc["g"], p.r, "/g"));

    if (doc.contains("reference")) {
        auto entries = parse_vector_exprs(doc["reference"], p.q, "/reference");
        for (const auto& e : entries)
            out.reference_breakpoints.insert(out.reference_breakpoints.end(),
                                             e.breakpoints().begin(), e.breakpoints().end());
        p.reference = vector_func(std::move(entries));
    }

    if (doc.contains("compat_continuity")) {
        if (!doc["compat_continuity"].is_boolean())
            throw ParseError("/compat_continuity: expected a boolean");
        p.compat_continuity = doc["compat_continuity"].get<bool>();
    }

    if (doc.contains("control_derivative_matrix"))
        p.control_derivative =
            parse_numeric_matrix(doc["control_derivative_matrix"], p.q, p.r,
                                 "/control_derivative_matrix");

    if (doc.contains("inequality_samples_per_subinterval"))
        p.inequality_samples_per_subinterval =
            doc["inequality_samples_per_subinterval"].get<int>();

    if (doc.contains("constraints")) {
        const json& c = doc["constraints"];
        if (!c.is_object()) throw ParseError("/constraints: expected an object");
        if (c.contains("point_equalities")) {
            const json& arr = c["point_equalities"];
            for (size_t i = 0; i < arr.size(); ++i) {
                std::string path = "/constraints/point_equalities/" + std::to_string(i);
                PointEquality pe;
                if (!arr[i].contains("t")) throw ParseError(path + "/t: missing");
                pe.time = arr[i]["t"].get<double>();
                if (arr[i].contains("state_coef"))
                    pe.state_coef = parse_numeric_vector(arr[i]["state_coef"], p.q,
                                                         path + "/state_coef");
                if (arr[i].contains("input_coef"))
                    pe.input_coef = parse_numeric_vector(arr[i]["input_coef"], p.r,
                                                         path + "/input_coef");
                if (!arr[i].contains("value")) throw ParseError(path + "/value: missing");
                pe.value = parse_entry(arr[i]["value"], path + "/value").eval(pe.time);
                p.constraints.point_equalities.push_back(std::move(pe));
            }
        }
        if (c.contains("terminal_equalities")) {
            const json& arr = c["terminal_equalities"];
            for (size_t i = 0; i < arr.size(); ++i) {
                std::string path = "/constraints/terminal_equalities/" + std::to_string(i);
                TerminalEquality te;
                te.state_coef =
                    parse_numeric_vector(arr[i]["state_coef"], p.q, path + "/state_coef");
                if (!arr[i].contains("value")) throw ParseError(path + "/value: missing");
                te.value = parse_entry(arr[i]["value"], path + "/value").eval(p.t_f);
                p.constraints.terminal_equalities.push_back(std::move(te));
            }
        }
        if (c.contains("window_inequalities")) {
            const json& arr = c["window_inequalities"];
            for (size_t i = 0; i < arr.size(); ++i) {
                std::string path = "/constraints/window_inequalities/" + std::to_string(i);
                WindowInequality w;
                if (!arr[i].contains("window") || !arr[i]["window"].is_array() ||
                    arr[i]["window"].size() != 2)
                    throw ParseError(path + "/window: expected [t_begin, t_end]");
                w.t_begin = arr[i]["window"][0].get<double>();
                w.t_end = arr[i]["window"][1].get<double>();
                if (arr[i].contains("state_coef")) {
                    auto entries =
                        parse_vector_exprs(arr[i]["state_coef"], p.q, path + "/state_coef");
                    w.state_coef = vector_func(std::move(entries));
                }
                if (arr[i].contains("input_coef")) {
                    auto entries =
                        parse_vector_exprs(arr[i]["input_coef"], p.r, path + "/input_coef");
                    w.input_coef = vector_func(std::move(entries));
                }
                if (!arr[i].contains("bound")) throw ParseError(path + "/bound: missing");
                Expr bound = parse_entry(arr[i]["bound"], path + "/bound");
                w.bound = [bound](double t) { return bound.eval(t); };
                p.constraints.window_inequalities.push_back(std::move(w));
            }
        }
    }

    if (doc.contains("k")) out.default_k = doc["k"].get<int>();
    if (doc.contains("M")) out.default_M = doc["M"].get<int>();

    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ParseError(std::string("problem validation: ") + e.what());
    }
    return out;
}

ProblemDocument parse_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem document: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

} // namespace cwt
