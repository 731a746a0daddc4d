#include "cwtrack/pipeline.hpp"

#include <CLI11.hpp>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"cwtrack - wavelet transcription solver for delayed LQ tracking problems"};
    app.require_subcommand(1);

    cwt::RunConfig cfg;
    auto* solve = app.add_subcommand(
        "solve",
        "Transcribe a problem document, solve the QP, verify, and write\n"
        "solution.csv / summary.json (optionally oracle.csv).\n"
        "Exit codes: 0 optimal, 2 parse error, 3 delay-grid misalignment,\n"
        "4 solver failure, 5 I/O error.");
    solve->add_option("config", cfg.problem_path, "problem document (JSON)")->required();
    solve->add_option("--k", cfg.k, "resolution level (>= 2); overrides the document");
    solve->add_option("--M", cfg.M, "polynomial order per subinterval (>= 3)");
    solve->add_option("--out", cfg.out_dir, "output directory (default .)");
    solve->add_flag("--round-delays", cfg.round_delays,
                    "snap misaligned delays to the nearest grid point and report the perturbation");
    solve->add_flag("--oracle-check", cfg.oracle_check,
                    "integrate the delay differential equation with the solved control and compare");
    solve->add_option("--samples", cfg.samples, "verification/export density (default 200)");
    solve->add_flag("--dump-opmats", cfg.dump_opmats, "write the operational matrices as CSV");
    solve->add_flag("--dump-qp", cfg.dump_qp, "write H, A_eq, b_eq, G_in, h_in as CSV");
    solve->add_flag("--gnuplot", cfg.gnuplot, "write a ready-to-run gnuplot script");
    solve->add_option("--tol", cfg.tol, "solver tolerance (default 1e-8)");
    solve->add_option("--max-iter", cfg.max_iter, "interior-point iteration cap (default 100)");
    solve->add_flag("--quiet", cfg.quiet, "suppress the one-line result print");

    CLI11_PARSE(app, argc, argv);

    cwt::RunResult result = cwt::run(cfg);
    if (result.exit_code != cwt::kExitOk) std::cerr << "error: " << result.error << "\n";
    return result.exit_code;
}
