// latticelab: simulate | verify | analyze | plot | sweep for nonlinear
// nearest-neighbor lattice rings. See README.md for the config grammar.
#include <iostream>

#include "CLI11.hpp"
#include "fput/commands.hpp"
#include "fput/integrators.hpp"
#include "fput/snapshot_io.hpp"

namespace {

constexpr const char* kVersion = "latticelab 0.1.0";
constexpr const char* kFooter =
    "Exit codes: 0 success, 1 verification threshold exceeded, 2 input error, "
    "3 integration failure.";

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear lattice-ring simulation and analysis"};
    app.footer(kFooter);
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, run_dir;
    std::vector<std::string> overrides, sweep_paths;

    CLI::App* sim = app.add_subcommand("simulate", "Run one configured experiment");
    sim->add_option("-c,--config", config_path, "Config file (key = value lines)")
        ->required();
    sim->add_option("--set", overrides,
                    "Override a config key, e.g. --set t_max=50 (repeatable)");

    fput::VerifyOptions vopts;
    CLI::App* ver = app.add_subcommand("verify", "Conservation / isospectrality audit");
    ver->add_option("run_dir", run_dir, "Run directory from simulate")->required();
    ver->add_option("--energy-tol", vopts.energy_tol,
                    "Max relative energy drift (default 1e-5)");
    ver->add_option("--momentum-tol", vopts.momentum_tol_per_site,
                    "Max momentum drift per site (default 1e-10)");
    ver->add_option("--spectrum-tol", vopts.spectrum_tol,
                    "Max Toda spectral deviation (default 1e-4)");

    fput::AnalyzeOptions aopts;
    int ref_period = 0;
    CLI::App* ana = app.add_subcommand("analyze", "Soliton tracks, regions, speeds");
    ana->add_option("run_dir", run_dir, "Run directory from simulate")->required();
    ana->add_option("--window-fraction", aopts.detector.window_fraction,
                    "Final fraction of snapshots to track (default 0.25)");
    ana->add_option("--ref-period", ref_period,
                    "Background period for regions (default: 2 for periodic_kick)");

    fput::PlotOptions popts;
    CLI::App* plt = app.add_subcommand("plot", "Render snapshots as SVG");
    plt->add_option("run_dir", run_dir, "Run directory from simulate")->required();
    plt->add_option("-t,--time", popts.times,
                    "Snapshot time(s) to plot (default: plot.times from config)");
    std::size_t trim = 0;
    CLI::Option* trim_opt =
        plt->add_option("--trim", trim, "Sites trimmed from each edge");
    plt->add_flag("!--no-regions", popts.regions, "Skip the region underlay");

    CLI::App* swp = app.add_subcommand("sweep", "Run several configs concurrently");
    swp->add_option("configs", sweep_paths, "Config files, one run each")
        ->required();
    swp->add_option("--set", overrides,
                    "Override a key in every config (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e); // prints message / help text
        return rc == 0 ? 0 : fput::kExitInput;
    }

    try {
        if (sim->parsed())
            return fput::cmd_simulate(fput::load_config(config_path, overrides),
                                      std::cout);
        if (ver->parsed())
            return fput::cmd_verify(run_dir, vopts, std::cout);
        if (ana->parsed()) {
            if (ana->count("--ref-period"))
                aopts.ref_period = ref_period;
            return fput::cmd_analyze(run_dir, aopts, std::cout);
        }
        if (plt->parsed()) {
            if (trim_opt->count())
                popts.trim_edges = trim;
            return fput::cmd_plot(run_dir, popts, std::cout);
        }
        if (swp->parsed())
            return fput::cmd_sweep(sweep_paths, overrides, std::cout);
    } catch (const fput::IntegrationError& e) {
        std::cerr << "error: integration failed: " << e.what() << "\n";
        return fput::kExitIntegration;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fput::kExitInput;
    }
    return fput::kExitInput; // unreachable: a subcommand is required
}
