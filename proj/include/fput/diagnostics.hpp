#pragma once

#include <cmath>
#include <vector>

#include "fput/integrators.hpp"
#include "fput/lattice.hpp"
#include "fput/potential.hpp"

namespace fput {

// Compensated accumulator (Kahan-Babuska-Neumaier); keeps long sums
// accurate to O(eps) independent of the number of terms, including when an
// addend exceeds the running sum.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// H = sum_n [ p_n^2/2 + V(q_{n+1} - q_n) ], ring-closed, compensated.
double hamiltonian(const PotentialSpec& spec, const LatticeState& state);

// P = sum_n p_n, compensated.
double total_momentum(const LatticeState& state);

struct ConservationReport {
    double h0 = 0.0;
    double p0 = 0.0;
    double max_rel_energy_drift = 0.0;   // max_t |H(t)-H(0)| / max(1, |H(0)|)
    double max_abs_momentum_drift = 0.0; // max_t |P(t)-P(0)|
    std::vector<double> times;
    std::vector<double> energies;
    std::vector<double> momenta;
};

// Uses the potential recorded in the series manifest.
ConservationReport conservation_report(const SnapshotSeries& series);

// Closed-form evolution of the harmonic ring from `ic` by time t, via
// discrete Fourier modes with omega_k = 2|sin(pi k/N)|. The zero mode is
// ballistic: qhat_0(t) = qhat_0(0) + t*phat_0(0).
LatticeState harmonic_exact(const LatticeState& ic, double t);

} // namespace fput
