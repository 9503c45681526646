#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fput/lattice.hpp"

namespace fput {

enum class IntegratorKind { AdaptiveRK45, Verlet, FixedRK4 };

const std::string& integrator_name(IntegratorKind kind);
IntegratorKind parse_integrator(const std::string& name);

struct IntegratorConfig {
    IntegratorKind kind = IntegratorKind::AdaptiveRK45;
    double rel_tol = 1e-4;      // adaptive only
    double abs_tol = 1e-6;      // adaptive only
    double dt = 0.05;           // fixed-step only; must divide snapshot_every
    double t_max = 800.0;
    double snapshot_every = 1.0;
};

// Thrown when a run cannot be continued (step-size underflow, or an
// unphysical state reached mid-run). t_reached is the last completed time.
struct IntegrationError : std::runtime_error {
    IntegrationError(const std::string& msg, double t)
        : std::runtime_error(msg), t_reached(t) {}
    double t_reached;
};

// Snapshot series plus the run metadata needed to interpret it. The
// integrators fill potential, integrator, initial_step and states; the kind
// of initial condition is recorded by the caller that built the IC.
struct SnapshotSeries {
    PotentialSpec potential;
    std::string ic_kind;
    IntegratorConfig integrator;
    double initial_step = 0.0; // adaptive: h0 picked by the startup heuristic
    std::vector<LatticeState> states;

    double snapshot_every() const { return integrator.snapshot_every; }
};

using SnapshotSink = std::function<void(const LatticeState&)>;

// One velocity-Verlet step (kick-drift-kick, time-reversible). The state is
// left untouched if a force evaluation throws.
void step_verlet(const PotentialSpec& spec, LatticeState& state, double dt);

// One classical Runge-Kutta 4 step.
void step_rk4(const PotentialSpec& spec, LatticeState& state, double dt);

// Fixed-step integration (Verlet or FixedRK4) with snapshots at
// t = 0, snapshot_every, 2*snapshot_every, ... while t <= t_max.
// Requires cfg.dt to divide cfg.snapshot_every within 1e-9.
SnapshotSeries integrate_fixed(const PotentialSpec& spec,
                               const LatticeState& ic,
                               const IntegratorConfig& cfg);

// Adaptive Dormand-Prince 5(4) with PI step control; snapshots on the same
// grid, produced by the method's 4th-order dense interpolant. The local
// error per step is kept below abs_tol + rel_tol*|y| componentwise (RMS
// scaled norm). Step-size underflow below 1e-12*t_max aborts with an
// IntegrationError naming the time reached.
SnapshotSeries integrate_adaptive(const PotentialSpec& spec,
                                  const LatticeState& ic,
                                  const IntegratorConfig& cfg);

// Dispatch on cfg.kind.
SnapshotSeries integrate(const PotentialSpec& spec, const LatticeState& ic,
                         const IntegratorConfig& cfg);

// Streaming variants: snapshots are handed to `sink` in time order
// (starting with the initial state). On error, everything already emitted
// stands, so partial output can be preserved by the caller. Returns the
// initial adaptive step size (0 for fixed-step kinds).
double integrate_fixed(const PotentialSpec& spec, const LatticeState& ic,
                       const IntegratorConfig& cfg, const SnapshotSink& sink);
double integrate_adaptive(const PotentialSpec& spec, const LatticeState& ic,
                          const IntegratorConfig& cfg,
                          const SnapshotSink& sink);

} // namespace fput
