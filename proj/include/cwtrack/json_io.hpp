#pragma once

#include "cwtrack/expr.hpp"
#include "cwtrack/problem.hpp"

#include <string>

namespace cwt {

/// Schema violations carry the offending JSON path.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Parsed problem document plus the metadata that lives next to it.
struct ProblemDocument {
    DelayedLqtProblem problem;
    int default_k = -1;    // -1 when the document does not pin one
    int default_M = -1;
    std::vector<double> reference_breakpoints;   // original time
};

/// Parse a problem document (schema documented in the README).  Matrix and
/// vector entries may be numbers or expression strings over t.
ProblemDocument parse_problem(const std::string& json_text);
ProblemDocument parse_problem_file(const std::string& path);

} // namespace cwt
