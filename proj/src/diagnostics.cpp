#include "fput/diagnostics.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace fput {

double hamiltonian(const PotentialSpec& spec, const LatticeState& state) {
    const std::size_t n = state.size();
    std::vector<double> bond(n);
    for (std::size_t i = 0; i + 1 < n; ++i) bond[i] = state.q[i + 1] - state.q[i];
    bond[n - 1] = state.q[0] - state.q[n - 1];
    bond_values(spec, bond.data(), bond.data(), n);
    KahanSum h;
    for (std::size_t i = 0; i < n; ++i)
        h.add(0.5 * state.p[i] * state.p[i] + bond[i]);
    return h.value();
}

double total_momentum(const LatticeState& state) {
    KahanSum p;
    for (double v : state.p) p.add(v);
    return p.value();
}

ConservationReport conservation_report(const SnapshotSeries& series) {
    if (series.states.empty())
        throw std::invalid_argument("conservation_report: empty snapshot series");
    const PotentialSpec& spec = series.potential;
    ConservationReport rep;
    rep.h0 = hamiltonian(spec, series.states.front());
    rep.p0 = total_momentum(series.states.front());
    const double h_scale = std::max(1.0, std::abs(rep.h0));
    for (const auto& s : series.states) {
        const double h = hamiltonian(spec, s);
        const double p = total_momentum(s);
        rep.times.push_back(s.t);
        rep.energies.push_back(h);
        rep.momenta.push_back(p);
        rep.max_rel_energy_drift =
            std::max(rep.max_rel_energy_drift, std::abs(h - rep.h0) / h_scale);
        rep.max_abs_momentum_drift =
            std::max(rep.max_abs_momentum_drift, std::abs(p - rep.p0));
    }
    return rep;
}

LatticeState harmonic_exact(const LatticeState& ic, double t) {
    const std::size_t n = ic.size();
    if (n == 0) throw std::invalid_argument("harmonic_exact: empty state");
    const double pi = std::acos(-1.0);

    // Twiddle table W[j] = exp(-2*pi*i*j/n), indexed by (site*mode) mod n.
    std::vector<std::complex<double>> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double ang = -2.0 * pi * static_cast<double>(j) / static_cast<double>(n);
        w[j] = {std::cos(ang), std::sin(ang)};
    }

    std::vector<std::complex<double>> qh(n), ph(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> aq{0.0, 0.0}, ap{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> f = w[(i * k) % n];
            aq += ic.q[i] * f;
            ap += ic.p[i] * f;
        }
        qh[k] = aq;
        ph[k] = ap;
    }

    // Mode evolution: zero mode ballistic, others rotate at omega_k.
    qh[0] += t * ph[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double omega =
            2.0 * std::abs(std::sin(pi * static_cast<double>(k) / static_cast<double>(n)));
        const double c = std::cos(omega * t), s = std::sin(omega * t);
        const std::complex<double> q0 = qh[k], p0 = ph[k];
        qh[k] = q0 * c + p0 * (s / omega);
        ph[k] = -q0 * (omega * s) + p0 * c;
    }

    LatticeState out;
    out.t = ic.t + t;
    out.q.assign(n, 0.0);
    out.p.assign(n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> aq{0.0, 0.0}, ap{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            const std::complex<double> f = std::conj(w[(i * k) % n]);
            aq += qh[k] * f;
            ap += ph[k] * f;
        }
        out.q[i] = aq.real() * inv_n;
        out.p[i] = ap.real() * inv_n;
    }
    return out;
}

} // namespace fput
