#include "fput/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fput {

const std::string& integrator_name(IntegratorKind kind) {
    static const std::string names[] = {"rk45", "verlet", "rk4"};
    return names[static_cast<int>(kind)];
}

IntegratorKind parse_integrator(const std::string& name) {
    if (name == "rk45") return IntegratorKind::AdaptiveRK45;
    if (name == "verlet") return IntegratorKind::Verlet;
    if (name == "rk4") return IntegratorKind::FixedRK4;
    throw std::invalid_argument("unknown integrator '" + name + "'");
}

namespace {

void validate_window(double t_max, double snapshot_every) {
    if (!(t_max >= 0.0) || !std::isfinite(t_max))
        throw std::invalid_argument("t_max must be finite and nonnegative");
    if (!(snapshot_every > 0.0) || !std::isfinite(snapshot_every))
        throw std::invalid_argument("snapshot_every must be finite and positive");
}

// Snapshot grid: ic.t + j*snapshot_every, j = 0..count-1 (grid points <= t_max).
std::size_t snapshot_count(double t_max, double snapshot_every) {
    return static_cast<std::size_t>(
               std::floor(t_max / snapshot_every + 1e-9)) +
           1;
}

[[noreturn]] void rethrow_at(const std::exception& e, double t) {
    std::ostringstream msg;
    msg << e.what() << " (reached t = " << t << ")";
    throw IntegrationError(msg.str(), t);
}

// ---------------------------------------------------------------------------
// Fixed-step kernels
// ---------------------------------------------------------------------------

struct VerletWorkspace {
    std::vector<double> bond, force;
};

void verlet_kick_drift_kick(const PotentialSpec& spec, std::vector<double>& q,
                            std::vector<double>& p, double dt,
                            std::vector<double>& force, VerletWorkspace& ws) {
    // `force` holds V-gradient differences for the current q on entry and
    // for the updated q on exit, so consecutive steps reuse one evaluation.
    const std::size_t n = q.size();
    const double half = 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) p[i] += half * force[i];
    for (std::size_t i = 0; i < n; ++i) q[i] += dt * p[i];
    lattice_forces(spec, q.data(), ws.bond.data(), force.data(), n);
    for (std::size_t i = 0; i < n; ++i) p[i] += half * force[i];
}

// Flat phase vector y = [q | p]; f = [p | dp].
void rhs_flat(const PotentialSpec& spec, const std::vector<double>& y,
              std::vector<double>& f, std::vector<double>& bond) {
    const std::size_t n = y.size() / 2;
    for (std::size_t i = 0; i < n; ++i) f[i] = y[n + i];
    lattice_forces(spec, y.data(), bond.data(), f.data() + n, n);
}

std::vector<double> flatten(const LatticeState& s) {
    std::vector<double> y(2 * s.size());
    std::copy(s.q.begin(), s.q.end(), y.begin());
    std::copy(s.p.begin(), s.p.end(), y.begin() + s.size());
    return y;
}

LatticeState unflatten(const std::vector<double>& y, double t) {
    const std::size_t n = y.size() / 2;
    LatticeState s;
    s.t = t;
    s.q.assign(y.begin(), y.begin() + n);
    s.p.assign(y.begin() + n, y.end());
    return s;
}

void rk4_step_flat(const PotentialSpec& spec, std::vector<double>& y, double h,
                   std::vector<double>& k1, std::vector<double>& k2,
                   std::vector<double>& k3, std::vector<double>& k4,
                   std::vector<double>& ytmp, std::vector<double>& bond) {
    const std::size_t m = y.size();
    rhs_flat(spec, y, k1, bond);
    for (std::size_t i = 0; i < m; ++i) ytmp[i] = y[i] + 0.5 * h * k1[i];
    rhs_flat(spec, ytmp, k2, bond);
    for (std::size_t i = 0; i < m; ++i) ytmp[i] = y[i] + 0.5 * h * k2[i];
    rhs_flat(spec, ytmp, k3, bond);
    for (std::size_t i = 0; i < m; ++i) ytmp[i] = y[i] + h * k3[i];
    rhs_flat(spec, ytmp, k4, bond);
    for (std::size_t i = 0; i < m; ++i)
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace

void step_verlet(const PotentialSpec& spec, LatticeState& state, double dt) {
    if (!(dt != 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("verlet step size must be finite and nonzero");
    const std::size_t n = state.size();
    VerletWorkspace ws;
    ws.bond.resize(n);
    std::vector<double> force(n);
    lattice_forces(spec, state.q.data(), ws.bond.data(), force.data(), n);
    std::vector<double> q = state.q, p = state.p;
    verlet_kick_drift_kick(spec, q, p, dt, force, ws);
    state.q.swap(q);
    state.p.swap(p);
    state.t += dt;
}

void step_rk4(const PotentialSpec& spec, LatticeState& state, double dt) {
    if (!(dt != 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("rk4 step size must be finite and nonzero");
    const std::size_t m = 2 * state.size();
    std::vector<double> y = flatten(state);
    std::vector<double> k1(m), k2(m), k3(m), k4(m), ytmp(m), bond(state.size());
    rk4_step_flat(spec, y, dt, k1, k2, k3, k4, ytmp, bond);
    LatticeState out = unflatten(y, state.t + dt);
    state = std::move(out);
}

double integrate_fixed(const PotentialSpec& spec, const LatticeState& ic,
                       const IntegratorConfig& cfg, const SnapshotSink& sink) {
    const double t_max = cfg.t_max;
    const double snapshot_every = cfg.snapshot_every;
    validate_window(t_max, snapshot_every);
    if (cfg.kind == IntegratorKind::AdaptiveRK45)
        throw std::invalid_argument("integrate_fixed requires a fixed-step integrator");
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw std::invalid_argument("integrator dt must be finite and positive");
    const long long steps_per = std::llround(snapshot_every / cfg.dt);
    if (steps_per < 1 ||
        std::abs(static_cast<double>(steps_per) * cfg.dt - snapshot_every) > 1e-9)
        throw std::invalid_argument("dt must divide snapshot_every (within 1e-9)");

    const std::size_t count = snapshot_count(t_max, snapshot_every);
    const std::size_t n = ic.size();

    LatticeState state = ic;
    sink(state);

    VerletWorkspace ws;
    ws.bond.resize(n);
    std::vector<double> force(n);
    const std::size_t m = 2 * n;
    std::vector<double> y, k1, k2, k3, k4, ytmp;
    if (cfg.kind == IntegratorKind::Verlet) {
        try {
            lattice_forces(spec, state.q.data(), ws.bond.data(), force.data(), n);
        } catch (const std::domain_error& e) {
            rethrow_at(e, state.t);
        }
    } else {
        y = flatten(state);
        k1.resize(m); k2.resize(m); k3.resize(m); k4.resize(m); ytmp.resize(m);
    }

    for (std::size_t j = 1; j < count; ++j) {
        const double t_snap = ic.t + static_cast<double>(j) * snapshot_every;
        const double t_prev = ic.t + static_cast<double>(j - 1) * snapshot_every;
        long long done = 0;
        try {
            if (cfg.kind == IntegratorKind::Verlet) {
                for (; done < steps_per; ++done)
                    verlet_kick_drift_kick(spec, state.q, state.p, cfg.dt, force, ws);
            } else {
                for (; done < steps_per; ++done)
                    rk4_step_flat(spec, y, cfg.dt, k1, k2, k3, k4, ytmp, ws.bond);
                state = unflatten(y, t_snap);
            }
        } catch (const std::domain_error& e) {
            rethrow_at(e, t_prev + static_cast<double>(done) * cfg.dt);
        }
        state.t = t_snap;
        sink(state);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4), PI step control, 4th-order dense output
// ---------------------------------------------------------------------------

namespace {

// Butcher tableau
constexpr double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0,
                 C5 = 8.0 / 9.0;
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0,
                 A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0,
                 A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0,
                 A65 = -5103.0 / 18656.0;
constexpr double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0,
                 A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0;
// 5th-minus-4th order error weights
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;
// dense-output weights
constexpr double D1 = -12715105075.0 / 11282082432.0,
                 D3 = 87487479700.0 / 32700410799.0,
                 D4 = -10690763975.0 / 1880347072.0,
                 D5 = 701980252875.0 / 199316789632.0,
                 D6 = -1453857185.0 / 822651844.0,
                 D7 = 69997945.0 / 29380423.0;
// step controller
constexpr double SAFE = 0.9, BETA = 0.04, EXPO1 = 0.2 - BETA * 0.75;
constexpr double FAC_SHRINK = 5.0, FAC_GROW = 0.1; // h/fac, fac in [0.1, 5]

struct Dopri5 {
    const PotentialSpec& spec;
    std::size_t m; // 2N
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, ysti, bond;
    // dense-output coefficients for the last accepted step
    std::vector<double> c0, c1, c2, c3, c4;

    Dopri5(const PotentialSpec& s, std::size_t n2) : spec(s), m(n2) {
        for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ysti})
            v->resize(m);
        bond.resize(m / 2);
    }

    void rhs(const std::vector<double>& y, std::vector<double>& f) {
        rhs_flat(spec, y, f, bond);
    }

    // Startup heuristic: two trial derivative evaluations (Hairer hinit).
    double initial_step(const std::vector<double>& y, double span,
                        double atol, double rtol) {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double sk = atol + rtol * std::abs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6
                                                  : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, span);
        for (std::size_t i = 0; i < m; ++i) ysti[i] = y[i] + h * k1[i];
        rhs(ysti, k2);
        double der2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double sk = atol + rtol * std::abs(y[i]);
            der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = (der12 <= 1e-15)
                              ? std::max(1e-6, h * 1e-3)
                              : std::pow(0.01 / der12, 0.2);
        return std::min({100.0 * h, h1, span});
    }

    // One trial step from (t, y) with step h. On success fills y1 and k7
    // (derivative at the end point) and returns the scaled error norm.
    double try_step(const std::vector<double>& y, double h,
                    std::vector<double>& y1, double atol, double rtol) {
        for (std::size_t i = 0; i < m; ++i)
            ysti[i] = y[i] + h * A21 * k1[i];
        rhs(ysti, k2);
        for (std::size_t i = 0; i < m; ++i)
            ysti[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        rhs(ysti, k3);
        for (std::size_t i = 0; i < m; ++i)
            ysti[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        rhs(ysti, k4);
        for (std::size_t i = 0; i < m; ++i)
            ysti[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] +
                                  A54 * k4[i]);
        rhs(ysti, k5);
        for (std::size_t i = 0; i < m; ++i)
            ysti[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] +
                                  A64 * k4[i] + A65 * k5[i]);
        rhs(ysti, k6);
        for (std::size_t i = 0; i < m; ++i)
            y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] +
                                A75 * k5[i] + A76 * k6[i]);
        rhs(y1, k7);
        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double sk =
                atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            const double ee = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] +
                                   E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err += (ee / sk) * (ee / sk);
        }
        return std::sqrt(err / static_cast<double>(m));
    }

    void dense_prepare(const std::vector<double>& y, const std::vector<double>& y1,
                       double h) {
        c0.resize(m); c1.resize(m); c2.resize(m); c3.resize(m); c4.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double ydiff = y1[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            c0[i] = y[i];
            c1[i] = ydiff;
            c2[i] = bspl;
            c3[i] = ydiff - h * k7[i] - bspl;
            c4[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] +
                         D6 * k6[i] + D7 * k7[i]);
        }
    }

    void dense_eval(double s, std::vector<double>& out) const {
        const double s1 = 1.0 - s;
        out.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            out[i] = c0[i] +
                     s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i])));
    }
};

} // namespace

double integrate_adaptive(const PotentialSpec& spec, const LatticeState& ic,
                          const IntegratorConfig& cfg,
                          const SnapshotSink& sink) {
    const double t_max = cfg.t_max;
    const double snapshot_every = cfg.snapshot_every;
    validate_window(t_max, snapshot_every);
    if (cfg.kind != IntegratorKind::AdaptiveRK45)
        throw std::invalid_argument("integrate_adaptive requires the rk45 integrator");
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) ||
        !std::isfinite(cfg.rel_tol) || !std::isfinite(cfg.abs_tol))
        throw std::invalid_argument("rel_tol and abs_tol must be finite and positive");

    const std::size_t count = snapshot_count(t_max, snapshot_every);
    sink(ic);
    if (count == 1) return 0.0;

    const double t0 = ic.t;
    const double t_end = t0 + static_cast<double>(count - 1) * snapshot_every;
    const double h_min = 1e-12 * std::max(t_max, 1e-300);
    const double atol = cfg.abs_tol, rtol = cfg.rel_tol;

    Dopri5 rk(spec, 2 * ic.size());
    std::vector<double> y = flatten(ic);
    std::vector<double> y1(y.size()), ydense;

    double t = t0;
    try {
        rk.rhs(y, rk.k1);
    } catch (const std::domain_error& e) {
        rethrow_at(e, t);
    }
    double h0 = 0.0, h = 0.0;
    try {
        h0 = rk.initial_step(y, t_end - t0, atol, rtol);
    } catch (const std::domain_error& e) {
        rethrow_at(e, t);
    }
    h = h0;

    double facold = 1e-4;
    bool rejected = false;
    std::size_t next = 1;
    while (next < count) {
        if (t + h > t_end) h = t_end - t;
        if (h < h_min) {
            std::ostringstream msg;
            msg << "step size underflow (h = " << h << " below "
                << h_min << "), problem looks too stiff at t = " << t;
            throw IntegrationError(msg.str(), t);
        }
        double err;
        try {
            err = rk.try_step(y, h, y1, atol, rtol);
        } catch (const std::domain_error& e) {
            rethrow_at(e, t);
        }
        if (!std::isfinite(err)) {
            h *= 0.5;
            rejected = true;
            continue;
        }
        const double fac11 = std::pow(err, EXPO1);
        if (err <= 1.0) {
            // accepted
            double fac = fac11 / std::pow(facold, BETA);
            fac = std::max(FAC_GROW, std::min(FAC_SHRINK, fac / SAFE));
            double h_new = h / fac;
            facold = std::max(err, 1e-4);

            const double t_new = t + h;
            bool dense_ready = false;
            while (next < count) {
                const double t_snap =
                    t0 + static_cast<double>(next) * snapshot_every;
                if (t_snap > t_new + 1e-9 * std::max(1.0, std::abs(t_new)))
                    break;
                if (!dense_ready) {
                    rk.dense_prepare(y, y1, h);
                    dense_ready = true;
                }
                const double s =
                    std::min(1.0, std::max(0.0, (t_snap - t) / h));
                rk.dense_eval(s, ydense);
                sink(unflatten(ydense, t_snap));
                ++next;
            }

            rk.k1.swap(rk.k7); // FSAL
            y.swap(y1);
            t = t_new;
            if (rejected) h_new = std::min(h_new, h);
            rejected = false;
            h = h_new;
        } else {
            h = h / std::min(FAC_SHRINK, fac11 / SAFE);
            rejected = true;
        }
    }
    return h0;
}

SnapshotSeries integrate_fixed(const PotentialSpec& spec,
                               const LatticeState& ic,
                               const IntegratorConfig& cfg) {
    SnapshotSeries series;
    series.potential = spec;
    series.integrator = cfg;
    series.initial_step = integrate_fixed(
        spec, ic, cfg,
        [&series](const LatticeState& s) { series.states.push_back(s); });
    return series;
}

SnapshotSeries integrate_adaptive(const PotentialSpec& spec,
                                  const LatticeState& ic,
                                  const IntegratorConfig& cfg) {
    SnapshotSeries series;
    series.potential = spec;
    series.integrator = cfg;
    series.initial_step = integrate_adaptive(
        spec, ic, cfg,
        [&series](const LatticeState& s) { series.states.push_back(s); });
    return series;
}

SnapshotSeries integrate(const PotentialSpec& spec, const LatticeState& ic,
                         const IntegratorConfig& cfg) {
    if (cfg.kind == IntegratorKind::AdaptiveRK45)
        return integrate_adaptive(spec, ic, cfg);
    return integrate_fixed(spec, ic, cfg);
}

} // namespace fput
