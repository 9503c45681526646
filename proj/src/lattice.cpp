#include "fput/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace fput {

const std::string& ic_name(InitialCondition ic) {
    static const std::string gaussian = "gaussian_bump";
    static const std::string kick = "periodic_kick";
    return ic == InitialCondition::GaussianBump ? gaussian : kick;
}

InitialCondition parse_ic(const std::string& name) {
    if (name == "gaussian_bump") return InitialCondition::GaussianBump;
    if (name == "periodic_kick") return InitialCondition::PeriodicKick;
    throw std::invalid_argument("unknown initial condition '" + name + "'");
}

LatticeState make_initial_condition(InitialCondition ic, std::size_t n) {
    if (n < 8) throw std::invalid_argument("lattice size must be at least 8");
    if (n % 2 != 0)
        throw std::invalid_argument(
            "lattice size must be even (period-2 background requires an even ring)");
    LatticeState state;
    state.t = 0.0;
    state.q.assign(n, 0.0);
    state.p.assign(n, 0.0);
    switch (ic) {
    case InitialCondition::GaussianBump: {
        const double center = static_cast<double>(n) / 4.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double site = static_cast<double>(i + 1);
            const double u = (site - center) / 4.0;
            state.q[i] = std::exp(-u * u);
        }
        break;
    }
    case InitialCondition::PeriodicKick: {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t site = i + 1;
            state.p[i] = (site % 2 == 0) ? 1.0 : -1.0;
            if (site == n / 2) state.p[i] += 2.0;
        }
        break;
    }
    }
    return state;
}

void lattice_forces(const PotentialSpec& spec, const double* q, double* bond,
                    double* dp, std::size_t n) {
    // bond[i] connects site i+1 to site i+2 (1-based labels), ring-closed.
    for (std::size_t i = 0; i + 1 < n; ++i) bond[i] = q[i + 1] - q[i];
    bond[n - 1] = q[0] - q[n - 1];
    bond_derivs(spec, bond, bond, n);
    dp[0] = bond[0] - bond[n - 1];
    for (std::size_t i = 1; i < n; ++i) dp[i] = bond[i] - bond[i - 1];
}

void lattice_forces(const PotentialSpec& spec, const std::vector<double>& q,
                    std::vector<double>& bond, std::vector<double>& dp) {
    bond.resize(q.size());
    dp.resize(q.size());
    lattice_forces(spec, q.data(), bond.data(), dp.data(), q.size());
}

void lattice_rhs(const PotentialSpec& spec, const LatticeState& state,
                 PhaseDerivative& out) {
    out.dq = state.p;
    std::vector<double> bond;
    lattice_forces(spec, state.q, bond, out.dp);
}

} // namespace fput
