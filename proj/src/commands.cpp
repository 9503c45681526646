#include "fput/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "fput/diagnostics.hpp"
#include "fput/snapshot_io.hpp"
#include "fput/svg_plot.hpp"
#include "fput/toda.hpp"

namespace fput {
namespace {

namespace fs = std::filesystem;

std::string g10(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::string sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
}

LoadedRun load_run(const std::string& run_dir) {
    return read_snapshot_file((fs::path(run_dir) / "snapshots.ndjson").string());
}

int default_ref_period(const std::string& ic_kind) {
    return ic_kind == ic_name(InitialCondition::PeriodicKick) ? 2 : 1;
}

std::string available_times(const std::vector<LatticeState>& states) {
    std::ostringstream out;
    const std::size_t n = states.size();
    if (n <= 12) {
        for (std::size_t i = 0; i < n; ++i)
            out << (i ? ", " : "") << g10(states[i].t);
    } else {
        for (std::size_t i = 0; i < 5; ++i)
            out << (i ? ", " : "") << g10(states[i].t);
        out << ", ..., " << g10(states[n - 2].t) << ", " << g10(states[n - 1].t);
    }
    out << " (" << n << " snapshots)";
    return out.str();
}

} // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    const LatticeState ic = make_initial_condition(cfg.ic, cfg.n_particles);

    RunManifest m;
    m.n_particles = cfg.n_particles;
    m.potential = cfg.potential;
    m.ic_kind = ic_name(cfg.ic);
    m.integrator = cfg.integrator;

    std::vector<LatticeState> states;
    states.reserve(static_cast<std::size_t>(
                       cfg.integrator.t_max / cfg.integrator.snapshot_every + 1e-9) +
                   1);
    int code = kExitOk;
    const auto sink = [&states](const LatticeState& s) { states.push_back(s); };
    try {
        m.initial_step =
            cfg.integrator.kind == IntegratorKind::AdaptiveRK45
                ? integrate_adaptive(cfg.potential, ic, cfg.integrator, sink)
                : integrate_fixed(cfg.potential, ic, cfg.integrator, sink);
    } catch (const IntegrationError& e) {
        // keep whatever the sink already received; h0 for an aborted adaptive
        // startup is not known, recorded as 0
        m.status = "failed";
        m.t_reached = e.t_reached;
        m.error = e.what();
        m.initial_step = 0.0;
        code = kExitIntegration;
    }

    write_text_file(dir / "config.txt", write_config(cfg));
    write_snapshot_file((dir / "snapshots.ndjson").string(), m, states);

    log << "simulate: " << family_name(cfg.potential.family) << ", N = "
        << cfg.n_particles << ", ic = " << m.ic_kind << ", integrator = "
        << integrator_name(cfg.integrator.kind) << "\n";
    log << "  wrote " << (dir / "snapshots.ndjson").string() << " ("
        << states.size() << " snapshots)\n";
    if (code != kExitOk)
        log << "  integration failed at t = " << g10(m.t_reached) << ": "
            << m.error << "\n";
    return code;
}

int cmd_verify(const std::string& run_dir, const VerifyOptions& opts,
               std::ostream& log) {
    const LoadedRun run = load_run(run_dir);
    if (run.manifest.status != "ok") {
        log << "run is marked failed (reached t = " << g10(run.manifest.t_reached)
            << "): " << run.manifest.error << "\n";
        return kExitInput;
    }
    if (run.series.states.empty()) {
        log << "run contains no snapshots\n";
        return kExitInput;
    }

    bool ok = true;
    const auto check = [&](const std::string& name, double value, double tol) {
        const bool pass = value <= tol;
        ok = ok && pass;
        log << (pass ? "[pass] " : "[fail] ") << name << " = " << sci(value)
            << " (tolerance " << sci(tol) << ")\n";
    };

    const ConservationReport rep = conservation_report(run.series);
    check("relative energy drift", rep.max_rel_energy_drift, opts.energy_tol);
    check("absolute momentum drift", rep.max_abs_momentum_drift,
          opts.momentum_tol_per_site * static_cast<double>(run.manifest.n_particles));
    if (run.series.potential.family == PotentialFamily::Toda)
        check("spectral deviation", spectral_deviation(run.series),
              opts.spectrum_tol);

    log << (ok ? "verify: all checks passed\n" : "verify: threshold exceeded\n");
    return ok ? kExitOk : kExitThreshold;
}

int cmd_analyze(const std::string& run_dir, const AnalyzeOptions& opts,
                std::ostream& log) {
    const LoadedRun run = load_run(run_dir);
    if (run.manifest.status != "ok") {
        log << "run is marked failed (reached t = " << g10(run.manifest.t_reached)
            << "): " << run.manifest.error << "\n";
        return kExitInput;
    }
    if (run.series.states.empty()) {
        log << "run contains no snapshots\n";
        return kExitInput;
    }
    const fs::path dir(run_dir);
    const int ref = opts.ref_period ? *opts.ref_period
                                    : default_ref_period(run.manifest.ic_kind);

    const std::vector<SolitonTrack> tracks =
        detect_solitons(run.series, opts.detector);
    {
        std::ostringstream tsv;
        tsv << "track\tobservations\tt_first\tt_last\tposition_first\t"
               "position_last\tspeed\tspeed_r2\tamplitude_cv\toscillatory\n";
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            const SolitonTrack& tr = tracks[i];
            tsv << (i + 1) << '\t' << tr.observations.size() << '\t'
                << g10(tr.observations.front().t) << '\t'
                << g10(tr.observations.back().t) << '\t'
                << g10(tr.observations.front().position) << '\t'
                << g10(tr.observations.back().position) << '\t'
                << g10(tr.fitted_speed) << '\t' << g10(tr.speed_r2) << '\t'
                << g10(tr.amplitude_cv) << '\t' << (tr.oscillatory ? 1 : 0)
                << '\n';
        }
        write_text_file(dir / "tracks.tsv", tsv.str());
    }

    const RegionReport regions =
        classify_regions(run.series.potential, run.series.states.back(), ref);
    {
        std::ostringstream tsv;
        tsv << "# t = " << g10(regions.snapshot_time) << ", ref_period = " << ref
            << "\n";
        tsv << "n_start\tn_end\tlabel\tresidual\n";
        for (const RegionSegment& seg : regions.segments)
            tsv << seg.n_start << '\t' << seg.n_end << '\t'
                << region_label_name(seg.label) << '\t' << g10(seg.residual)
                << '\n';
        write_text_file(dir / "regions.tsv", tsv.str());
    }

    std::size_t n_matched = 0;
    const bool toda = run.series.potential.family == PotentialFamily::Toda;
    if (toda) {
        const SpectrumReport spec_rep =
            spectrum(to_flaschka(run.series.states.front()));
        const SpeedComparison cmp = compare_speeds(tracks, spec_rep);
        n_matched = cmp.matched.size();
        std::ostringstream tsv;
        tsv << "lambda\tpredicted\ttracked\trelative_mismatch\n";
        for (const SpeedMatch& sm : cmp.matched)
            tsv << g10(sm.lambda) << '\t' << g10(sm.predicted) << '\t'
                << g10(sm.tracked) << '\t' << g10(sm.relative_mismatch) << '\n';
        for (double pred : cmp.unmatched_predictions)
            tsv << "-\t" << g10(pred) << "\t-\t-\n";
        for (double tracked : cmp.unmatched_tracks)
            tsv << "-\t-\t" << g10(tracked) << "\t-\n";
        write_text_file(dir / "speeds.tsv", tsv.str());
    }

    log << "analyze: " << tracks.size() << " track(s), " << regions.segments.size()
        << " region segment(s)";
    if (toda)
        log << ", " << n_matched << " speed match(es)";
    log << "\n";
    log << "  wrote " << (dir / "tracks.tsv").string() << ", "
        << (dir / "regions.tsv").string();
    if (toda)
        log << ", " << (dir / "speeds.tsv").string();
    log << "\n";
    return kExitOk;
}

int cmd_plot(const std::string& run_dir, const PlotOptions& opts,
             std::ostream& log) {
    const fs::path dir(run_dir);
    const LoadedRun run = load_run(run_dir);
    if (run.series.states.empty()) {
        log << "run contains no snapshots\n";
        return kExitInput;
    }

    std::vector<double> times = opts.times;
    std::size_t trim = opts.trim_edges.value_or(0);
    if ((times.empty() || !opts.trim_edges) && fs::exists(dir / "config.txt")) {
        const RunConfig cfg = load_config((dir / "config.txt").string());
        if (times.empty())
            times = cfg.plot.times;
        if (!opts.trim_edges)
            trim = cfg.plot.trim_edges;
    }
    if (times.empty())
        throw ConfigError(
            "no plot times: pass --time or set plot.times in the config");

    const std::vector<LatticeState>& states = run.series.states;
    const int ref = default_ref_period(run.manifest.ic_kind);
    for (double t : times) {
        const LatticeState* match = nullptr;
        for (const LatticeState& s : states)
            if (std::fabs(s.t - t) <= 1e-9 * std::max(1.0, std::fabs(t))) {
                match = &s;
                break;
            }
        if (!match)
            throw ConfigError("time " + g10(t) +
                              " is not on the snapshot grid; available times: " +
                              available_times(states));

        const RegionReport* underlay = nullptr;
        RegionReport regions;
        std::string note;
        if (opts.regions) {
            try {
                regions = classify_regions(run.series.potential, *match, ref);
                underlay = &regions;
            } catch (const std::invalid_argument& e) {
                note = e.what(); // lattice too small to segment: plot bare
            }
        }
        const std::string subtitle = std::string(family_name(
                                         run.series.potential.family)) +
                                     ", " + run.manifest.ic_kind;
        const std::string svg =
            render_snapshot_svg(*match, trim, underlay, subtitle);
        const fs::path file = dir / ("plot_t" + g10(match->t) + ".svg");
        write_text_file(file, svg);
        log << "  wrote " << file.string() << "\n";
        if (!note.empty())
            log << "  (no region underlay: " << note << ")\n";
    }
    return kExitOk;
}

int cmd_sweep(const std::vector<std::string>& config_paths,
              const std::vector<std::string>& overrides, std::ostream& log) {
    if (config_paths.empty())
        throw ConfigError("sweep: no config files given");

    std::vector<RunConfig> cfgs;
    cfgs.reserve(config_paths.size());
    for (const std::string& path : config_paths)
        cfgs.push_back(load_config(path, overrides));

    std::set<std::string> dirs;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
        if (!dirs.insert(cfgs[i].output_dir).second)
            throw ConfigError("sweep: output_dir '" + cfgs[i].output_dir +
                              "' is used by more than one config (" +
                              config_paths[i] + ")");

    std::vector<std::future<std::pair<int, std::string>>> jobs;
    jobs.reserve(cfgs.size());
    for (const RunConfig& cfg : cfgs)
        jobs.push_back(std::async(std::launch::async, [cfg]() {
            std::ostringstream buf;
            int code;
            try {
                code = cmd_simulate(cfg, buf);
            } catch (const IntegrationError& e) {
                buf << "integration failed: " << e.what() << "\n";
                code = kExitIntegration;
            } catch (const std::exception& e) {
                buf << "error: " << e.what() << "\n";
                code = kExitInput;
            }
            return std::make_pair(code, buf.str());
        }));

    int worst = kExitOk;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto [code, text] = jobs[i].get();
        log << "== " << config_paths[i] << " ==\n" << text;
        worst = std::max(worst, code);
    }
    log << "sweep: " << jobs.size() << " run(s), worst exit code " << worst
        << "\n";
    return worst;
}

} // namespace fput
