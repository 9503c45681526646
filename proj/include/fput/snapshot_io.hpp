#pragma once

#include <string>

#include "fput/integrators.hpp"

namespace fput {

// First line of a snapshot file: one JSON object describing the whole run.
// Subsequent lines: {"t": ..., "q": [...], "p": [...]}, one per snapshot,
// every number printed with 17 significant digits so values round-trip exactly.
struct RunManifest {
    std::string tool = "latticelab";
    std::string version = "0.1.0";
    std::size_t n_particles = 0;
    PotentialSpec potential;
    std::string ic_kind;
    IntegratorConfig integrator;
    double initial_step = 0.0;        // first accepted step (adaptive) or dt (fixed)
    std::string status = "ok";        // "ok" or "failed"
    double t_reached = 0.0;           // meaningful when status == "failed"
    std::string error;                // ditto
};

struct SnapshotFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedRun {
    RunManifest manifest;
    SnapshotSeries series;
};

std::string manifest_json(const RunManifest& m);
void write_snapshot_file(const std::string& path, const RunManifest& manifest,
                         const std::vector<LatticeState>& states);
LoadedRun read_snapshot_file(const std::string& path);

} // namespace fput
