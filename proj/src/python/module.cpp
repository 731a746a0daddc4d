#include "cwtrack/dde.hpp"
#include "cwtrack/json_io.hpp"
#include "cwtrack/opmat.hpp"
#include "cwtrack/pipeline.hpp"
#include "cwtrack/qp_solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cwt;

namespace {

py::dict run_result_to_dict(const RunResult& res) {
    py::dict d;
    d["exit_code"] = res.exit_code;
    d["error"] = res.error;
    d["j_star_qp"] = res.j_star_qp;
    d["j_star_quadrature"] = res.j_star_quadrature;
    d["status"] = std::string(to_string(res.status));
    d["iterations"] = res.iterations;
    d["unknowns"] = res.unknowns;
    d["constraint_violation_max"] = res.constraint_violation_max;
    d["delay_rounding_max"] = res.delay_rounding_max;
    d["chi"] = res.chi;
    if (res.oracle) {
        py::dict o;
        o["j_star"] = res.oracle->j_star;
        o["max_rel_sup_error"] = res.oracle->max_rel_sup_error;
        d["oracle"] = o;
    }
    return d;
}

} // namespace

PYBIND11_MODULE(_cwtrack, m) {
    m.doc() = "Chebyshev wavelet transcription of delayed linear-quadratic tracking problems";

    py::class_<WaveletBasis>(m, "WaveletBasis")
        .def(py::init<int, int>(), py::arg("k"), py::arg("M"))
        .def_property_readonly("k", &WaveletBasis::k)
        .def_property_readonly("M", &WaveletBasis::M)
        .def_property_readonly("dim", &WaveletBasis::dim)
        .def_property_readonly("subintervals", &WaveletBasis::subintervals)
        .def("eval_psi", &WaveletBasis::eval_psi, py::arg("n"), py::arg("m"), py::arg("t"))
        .def("eval_vector", &WaveletBasis::eval_vector, py::arg("t"));

    m.def(
        "expand_scalar",
        [](const WaveletBasis& basis, const std::function<double(double)>& f) {
            return expand_scalar(basis, f);
        },
        py::arg("basis"), py::arg("f"));
    m.def(
        "reconstruct",
        [](const WaveletBasis& basis, const VectorXd& coeffs, double t) {
            CoeffVector c(basis, 1, coeffs);
            return c.reconstruct(t)[0];
        },
        py::arg("basis"), py::arg("coeffs"), py::arg("t"));

    m.def("integration_matrix", &integration_matrix);
    m.def("gram_matrix", &gram_matrix);
    m.def("delay_matrix", &delay_matrix, py::arg("basis"), py::arg("n_v"));
    m.def("endpoint_outer", &endpoint_outer);
    m.def(
        "product_matrix",
        [](const WaveletBasis& basis, const VectorXd& coeffs) {
            return product_matrix(basis, CoeffVector(basis, 1, coeffs));
        },
        py::arg("basis"), py::arg("coeffs"));
    m.def("theorem1_coefficient_bounds", &theorem1_coefficient_bounds, py::arg("basis"),
          py::arg("rho0"), py::arg("rho1"), py::arg("rho"));

    m.def(
        "solve_document",
        [](const std::string& json_text, int k, int M, bool round_delays, double tol,
           int max_iter) {
            ProblemDocument doc = parse_problem(json_text);
            if (k < 0) k = doc.default_k;
            if (M < 0) M = doc.default_M;
            SolveOptions opts;
            opts.tol = tol;
            opts.max_iter = max_iter;
            RunResult res = solve_problem(doc.problem, k, M, round_delays, opts,
                                          doc.reference_breakpoints);
            return run_result_to_dict(res);
        },
        py::arg("json_text"), py::arg("k") = -1, py::arg("M") = -1,
        py::arg("round_delays") = false, py::arg("tol") = 1e-8, py::arg("max_iter") = 100,
        "Parse a problem document and run transcription + solve; returns a dict.");

    m.def(
        "run",
        [](const std::string& config_path, int k, int M, const std::string& out_dir,
           bool round_delays, bool oracle_check) {
            RunConfig cfg;
            cfg.problem_path = config_path;
            cfg.k = k;
            cfg.M = M;
            cfg.out_dir = out_dir;
            cfg.round_delays = round_delays;
            cfg.oracle_check = oracle_check;
            cfg.quiet = true;
            return run_result_to_dict(run(cfg));
        },
        py::arg("config_path"), py::arg("k") = -1, py::arg("M") = -1, py::arg("out_dir") = ".",
        py::arg("round_delays") = false, py::arg("oracle_check") = false,
        "Full pipeline with file outputs, mirroring `cwtrack solve`.");
}
