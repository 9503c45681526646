#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fput/potential.hpp"

namespace fput {

// Phase-space state of a ring of N unit-mass particles. q[i], p[i] hold
// position and momentum of particle i+1 (particle indices are 1-based in
// file formats and reports, storage is 0-based).
struct LatticeState {
    double t = 0.0;
    std::vector<double> q;
    std::vector<double> p;

    std::size_t size() const { return q.size(); }
};

struct PhaseDerivative {
    std::vector<double> dq;
    std::vector<double> dp;
};

enum class InitialCondition {
    GaussianBump,  // q_n = exp(-((n - N/4)/4)^2), p = 0
    PeriodicKick,  // q = 0, p_n = (-1)^n + 2*delta_{n,N/2}
};

const std::string& ic_name(InitialCondition ic);
InitialCondition parse_ic(const std::string& name);

// Builds the t = 0 state. Requires even N >= 8 (the period-2 background
// needs an even ring).
LatticeState make_initial_condition(InitialCondition ic, std::size_t n);

// Newton's equations on the ring:
//   dq_n = p_n
//   dp_n = V'(q_{n+1} - q_n) - V'(q_n - q_{n-1}),  q_{N+1} = q_1.
// Potential-domain errors propagate with the offending bond index.
void lattice_rhs(const PotentialSpec& spec, const LatticeState& state,
                 PhaseDerivative& out);

// Workspace-based core used by the integrators: bond[i] holds
// V'(q_{i+1} - q_i) after the call. All spans have length N.
void lattice_forces(const PotentialSpec& spec, const double* q, double* bond,
                    double* dp, std::size_t n);
void lattice_forces(const PotentialSpec& spec, const std::vector<double>& q,
                    std::vector<double>& bond, std::vector<double>& dp);

} // namespace fput
