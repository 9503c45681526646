#include "fput/toda.hpp"

#include "fput/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fput {

FlaschkaState to_flaschka(const LatticeState& state) {
    const std::size_t n = state.size();
    if (n < 2) throw std::invalid_argument("to_flaschka: need at least 2 sites");
    FlaschkaState f;
    f.t = state.t;
    f.a.resize(n);
    f.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double qnext = state.q[(i + 1) % n];
        const double diff = state.q[i] - qnext;
        if (!std::isfinite(diff) || std::abs(diff) > 1400.0) {
            std::ostringstream msg;
            msg << "to_flaschka: unphysical state, bond " << (i + 1)
                << " difference " << diff << " overflows exp";
            throw std::domain_error(msg.str());
        }
        f.a[i] = 0.5 * std::exp(0.5 * diff);
        f.b[i] = -0.5 * state.p[i];
    }
    return f;
}

void toda_flaschka_rhs(const FlaschkaState& state, FlaschkaState& out) {
    const std::size_t n = state.size();
    out.t = state.t;
    out.a.resize(n);
    out.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a_prev = state.a[(i + n - 1) % n];
        const double b_next = state.b[(i + 1) % n];
        out.b[i] = 2.0 * (state.a[i] * state.a[i] - a_prev * a_prev);
        out.a[i] = state.a[i] * (b_next - state.b[i]);
    }
}

// ---------------------------------------------------------------------------
// Symmetric tridiagonal QL with implicit shifts. Optionally accumulates a
// set of rows of the orthogonal factor (enough to recover the first/last
// eigenvector components without the full O(n^3) eigenvector matrix).
// ---------------------------------------------------------------------------

namespace {

void ql_implicit(std::vector<double>& d, std::vector<double>& e,
                 std::vector<std::vector<double>>* rows) {
    const std::size_t n = d.size();
    if (n == 0) return;
    e.resize(n, 0.0); // e[0..n-2] subdiagonal, e[n-1] workspace zero
    e[n - 1] = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();

    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50)
                    throw SpectrumError(
                        "tridiagonal QL failed to converge within 50 iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t ii = m; ii-- > l;) {
                    double f = s * e[ii];
                    const double b = c * e[ii];
                    r = std::hypot(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0) {
                        d[ii + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                    if (rows)
                        for (auto& row : *rows) {
                            f = row[ii + 1];
                            row[ii + 1] = s * row[ii] + c * f;
                            row[ii] = c * row[ii] - s * f;
                        }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Roots of 1 + rho * sum_j w_j^2 / (d_j - lambda) = 0 for rho > 0 with
// d ascending: one root per gap plus one past d_max (safeguarded Newton
// inside a bisection bracket). Deflated weights keep their d_j.
std::vector<double> rank_one_update_eigenvalues(const std::vector<double>& d,
                                                const std::vector<double>& w,
                                                double rho) {
    const std::size_t n = d.size();
    double wsum2 = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wsum2 += w[i] * w[i];
        scale = std::max(scale, std::abs(d[i]));
    }
    scale = std::max(scale, rho * wsum2);
    scale = std::max(scale, 1e-300);
    const double eps = std::numeric_limits<double>::epsilon();
    const double deflate_tol = 16.0 * eps * scale;

    // Active (non-deflated) poles.
    std::vector<std::size_t> act;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rho * w[i] * w[i] <= deflate_tol)
            out.push_back(d[i]);
        else
            act.push_back(i);
    }
    if (act.empty()) {
        std::sort(out.begin(), out.end());
        return out;
    }

    auto fval = [&](double lam) {
        double s = 0.0;
        for (std::size_t idx : act) {
            const double wi = w[idx];
            s += wi * wi / (d[idx] - lam);
        }
        return 1.0 + rho * s;
    };
    auto fder = [&](double lam) {
        double s = 0.0;
        for (std::size_t idx : act) {
            const double wi = w[idx];
            const double g = d[idx] - lam;
            s += wi * wi / (g * g);
        }
        return rho * s;
    };

    for (std::size_t k = 0; k < act.size(); ++k) {
        double lo = d[act[k]];
        double hi = (k + 1 < act.size()) ? d[act[k + 1]]
                                         : d[act.back()] + rho * wsum2 + deflate_tol;
        // f -> -inf at lo+, +inf at hi- (or f(hi) >= ~1 in the last gap),
        // monotonically increasing: bisect with Newton acceleration.
        double lam = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            if (hi - lo <= 2.0 * eps * std::max(1.0, std::abs(lam))) break;
            const double f = fval(lam);
            if (f == 0.0) break;
            if (f < 0.0)
                lo = lam;
            else
                hi = lam;
            const double df = fder(lam);
            double next = lam - f / df;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            lam = next;
        }
        out.push_back(lam);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag,
                                            std::vector<double> off) {
    if (diag.empty()) return {};
    if (off.size() + 1 != diag.size() && off.size() != diag.size())
        throw std::invalid_argument(
            "tridiagonal_eigenvalues: off-diagonal size must be n-1");
    ql_implicit(diag, off, nullptr);
    std::sort(diag.begin(), diag.end());
    return diag;
}

std::vector<double> ring_jacobi_eigenvalues(const std::vector<double>& b,
                                            const std::vector<double>& a) {
    const std::size_t n = b.size();
    if (a.size() != n)
        throw std::invalid_argument("ring_jacobi_eigenvalues: a and b sizes differ");
    if (n < 2)
        throw std::invalid_argument("ring_jacobi_eigenvalues: need at least 2 sites");
    for (double ai : a)
        if (!(ai > 0.0))
            throw std::invalid_argument(
                "ring_jacobi_eigenvalues: off-diagonal entries must be positive");

    if (n == 2) {
        // Two bonds join the same pair of sites: off-diagonal a_1 + a_2.
        const double mid = 0.5 * (b[0] + b[1]);
        const double rad = std::hypot(0.5 * (b[0] - b[1]), a[0] + a[1]);
        return {mid - rad, mid + rad};
    }

    // Tear the corner: M = T1 + rho * u u^T with u = e_1 + e_N, rho = a_N,
    // T1 tridiagonal with b_1 - rho and b_N - rho at the ends.
    const double rho = a[n - 1];
    std::vector<double> d(b);
    d[0] -= rho;
    d[n - 1] -= rho;
    std::vector<double> e(a.begin(), a.end() - 1);

    std::vector<std::vector<double>> rows(2, std::vector<double>(n, 0.0));
    rows[0][0] = 1.0;     // row 1 of the accumulated orthogonal factor
    rows[1][n - 1] = 1.0; // row N
    ql_implicit(d, e, &rows);

    // Sort poles, carrying w_j = v_j[1] + v_j[N] (components of the
    // eigenvector of T1 for d_j).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });
    std::vector<double> ds(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds[i] = d[order[i]];
        w[i] = rows[0][order[i]] + rows[1][order[i]];
    }
    return rank_one_update_eigenvalues(ds, w, rho);
}

SpectrumReport spectrum(const FlaschkaState& state, double outlier_tol) {
    SpectrumReport rep;
    rep.eigenvalues = ring_jacobi_eigenvalues(state.b, state.a);
    rep.band_min = rep.eigenvalues.front();
    rep.band_max = rep.eigenvalues.back();
    for (double lam : rep.eigenvalues) {
        const double margin = std::abs(lam) - 1.0;
        if (margin > outlier_tol) rep.outliers.push_back({lam, margin});
    }
    return rep;
}

double spectral_deviation(const SnapshotSeries& series,
                          std::size_t max_snapshots) {
    const std::size_t count = series.states.size();
    if (count == 0)
        throw std::invalid_argument("spectral_deviation: empty snapshot series");
    if (max_snapshots < 2) max_snapshots = 2;

    std::vector<std::size_t> picks;
    if (count <= max_snapshots) {
        picks.resize(count);
        std::iota(picks.begin(), picks.end(), 0);
    } else {
        for (std::size_t j = 0; j < max_snapshots; ++j)
            picks.push_back(j * (count - 1) / (max_snapshots - 1));
    }

    std::vector<double> ref;
    double dev = 0.0;
    for (std::size_t idx : picks) {
        const FlaschkaState f = to_flaschka(series.states[idx]);
        std::vector<double> eig = ring_jacobi_eigenvalues(f.b, f.a);
        if (ref.empty()) {
            ref = std::move(eig);
            continue;
        }
        for (std::size_t i = 0; i < ref.size(); ++i)
            dev = std::max(dev, std::abs(eig[i] - ref[i]));
    }
    return dev;
}

double predict_soliton_speed(double lambda, std::size_t quadrature_nodes) {
    if (!std::isfinite(lambda) || std::abs(lambda) <= 1.0)
        throw std::domain_error(
            "predict_soliton_speed: lambda must lie outside the band [-1, 1]");
    if (quadrature_nodes < 2)
        throw std::invalid_argument("predict_soliton_speed: too few quadrature nodes");

    const double mu = std::abs(lambda);
    const double pi = std::acos(-1.0);
    const std::size_t n = quadrature_nodes;

    // Both Abelian integrals reduce to arcsine-measure averages over the
    // band; Gauss-Chebyshev nodes absorb the 1/sqrt band-edge factors:
    //   integral of omega  ->  -arccosh(mu) = -( mean log(mu - x) + log 2 )
    //   integral of Omega0 ->  -sqrt(mu^2-1) = -( mu - mean (1-x^2)/(mu-x) )
    KahanSum slog, spole;
    for (std::size_t i = 0; i < n; ++i) {
        const double x =
            std::cos(pi * (2.0 * static_cast<double>(i) + 1.0) /
                     (2.0 * static_cast<double>(n)));
        slog.add(std::log(mu - x));
        spole.add((1.0 - x * x) / (mu - x));
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const double kappa = slog.value() * inv_n + std::log(2.0);
    const double sinh_kappa = mu - spole.value() * inv_n;
    const double speed = sinh_kappa / kappa;
    return lambda > 0.0 ? speed : -speed;
}

} // namespace fput
