#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fput/analysis.hpp"
#include "fput/config.hpp"

namespace fput {

// Exit codes shared by the commands and the CLI.
//   0  success / all thresholds pass
//   1  a verification threshold was exceeded
//   2  input error (config, arguments, missing or corrupt files)
//   3  integration failure (blow-up or step-size underflow)
inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitIntegration = 3;

// Runs the configured experiment and persists it under cfg.output_dir:
// config.txt (the effective config, reloadable) and snapshots.ndjson.
// Identical configs produce byte-identical files. On integration failure the
// snapshots collected so far are kept and the manifest carries
// status = "failed" with the time reached; returns kExitIntegration then.
int cmd_simulate(const RunConfig& cfg, std::ostream& log);

struct VerifyOptions {
    double energy_tol = 1e-5;             // max relative energy drift
    double momentum_tol_per_site = 1e-10; // max |P - P0| / N
    // Toda only: max spectral deviation. The default admits symplectic
    // integration error (Verlet dt=0.05 over t=200 measures ~4e-5) while
    // still rejecting non-integrable dynamics, which deviate by > 1e-3;
    // tighten to 1e-6 for rk45 runs at rel_tol = 1e-8.
    double spectrum_tol = 1e-4;
};

// Conservation audit of a finished run; for the Toda family also checks that
// the ring-Jacobi spectrum stays constant. One [pass]/[fail] line per check.
int cmd_verify(const std::string& run_dir, const VerifyOptions& opts,
               std::ostream& log);

struct AnalyzeOptions {
    DetectorOptions detector;
    // period of the background against which regions are classified;
    // unset = 2 for periodic_kick runs, 1 otherwise
    std::optional<int> ref_period;
};

// Writes tracks.tsv, regions.tsv (final snapshot) and, for Toda runs,
// speeds.tsv (spectrum prediction vs tracked speeds) into the run directory.
int cmd_analyze(const std::string& run_dir, const AnalyzeOptions& opts,
                std::ostream& log);

struct PlotOptions {
    std::vector<double> times;             // empty: take plot.times from config.txt
    std::optional<std::size_t> trim_edges; // unset: plot.trim_edges from config.txt
    bool regions = true;                   // draw the classification underlay
};

// One SVG per requested snapshot time, written as plot_t<T>.svg in the run
// directory. Times must lie on the snapshot grid; a miss lists what exists.
int cmd_plot(const std::string& run_dir, const PlotOptions& opts,
             std::ostream& log);

// Loads every config up front (failing fast on the first bad one), then runs
// the simulations concurrently, one output directory each. Returns the worst
// per-run exit code.
int cmd_sweep(const std::vector<std::string>& config_paths,
              const std::vector<std::string>& overrides, std::ostream& log);

} // namespace fput
