#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#ifdef HAVE_EIGEN_ORACLE
#include <Eigen/Dense>
#endif

#include "fput/integrators.hpp"
#include "fput/lattice.hpp"
#include "fput/potential.hpp"
#include "fput/toda.hpp"

using namespace fput;

namespace {

#ifdef HAVE_EIGEN_ORACLE
// Independent oracle: dense symmetric eigensolver on the full ring matrix.
// The (i, i+1 mod N) entry accumulates couplings, which also covers the
// N = 2 ring where both bonds join the same pair of sites.
std::vector<double> dense_ring_eigenvalues(const std::vector<double>& b,
                                           const std::vector<double>& a) {
    const std::size_t n = b.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<long>(n),
                                              static_cast<long>(n));
    for (std::size_t i = 0; i < n; ++i) {
        m(static_cast<long>(i), static_cast<long>(i)) = b[i];
        const std::size_t j = (i + 1) % n;
        m(static_cast<long>(i), static_cast<long>(j)) += a[i];
        m(static_cast<long>(j), static_cast<long>(i)) += a[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = solver.eigenvalues()[static_cast<long>(i)];
    return out;
}
#endif

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        m = std::max(m, std::fabs(x[i] - y[i]));
    return m;
}

} // namespace

TEST_CASE("Flaschka map: frozen values and overflow guard") {
    LatticeState rest;
    rest.q.assign(8, 0.0);
    rest.p.assign(8, 0.0);
    const FlaschkaState f = to_flaschka(rest);
    REQUIRE(f.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(f.a[i] == 0.5);
        CHECK(f.b[i] == 0.0);
    }

    LatticeState st;
    st.q = {0.0, 1.0};
    st.p = {3.0, -4.0};
    const FlaschkaState g = to_flaschka(st);
    CHECK(g.a[0] == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-15));
    CHECK(g.a[1] == doctest::Approx(0.5 * std::exp(0.5)).epsilon(1e-15));
    CHECK(g.b[0] == -1.5);
    CHECK(g.b[1] == 2.0);

    LatticeState wild;
    wild.q = {0.0, 1500.0};
    wild.p = {0.0, 0.0};
    CHECK_THROWS_WITH_AS((void)to_flaschka(wild), doctest::Contains("bond"),
                         std::domain_error);
}

TEST_CASE("Flaschka flow is Newton's flow in disguise") {
    // Oracle: under the Toda ring dynamics, b_n = -p_n/2 gives
    // db_n/dt = -dp_n/dt / 2, and a_n = e^{(q_n - q_{n+1})/2}/2 gives
    // da_n/dt = a_n (p_n - p_{n+1})/2 = a_n (b_{n+1} - b_n).
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-0.7, 0.7);
    const std::size_t n = 12;
    LatticeState st;
    st.q.resize(n);
    st.p.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        st.q[i] = dist(rng);
        st.p[i] = dist(rng);
    }
    const FlaschkaState f = to_flaschka(st);
    FlaschkaState rhs;
    toda_flaschka_rhs(f, rhs);

    const PotentialSpec toda = make_potential(PotentialFamily::Toda);
    PhaseDerivative newton;
    lattice_rhs(toda, st, newton);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(rhs.b[i] ==
              doctest::Approx(-0.5 * newton.dp[i]).epsilon(1e-13).scale(1.0));
        CHECK(rhs.a[i] == doctest::Approx(f.a[i] * 0.5 *
                                          (st.p[i] - st.p[(i + 1) % n]))
                              .epsilon(1e-13)
                              .scale(1.0));
    }
}

TEST_CASE("tridiagonal eigenvalues: closed-form 3x3") {
    // Toeplitz tridiag(−1, 2, −1): eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2)
    const std::vector<double> lam =
        tridiagonal_eigenvalues({2.0, 2.0, 2.0}, {-1.0, -1.0});
    REQUIRE(lam.size() == 3);
    CHECK(lam[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
    CHECK(lam[1] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(lam[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("ring spectrum of the constant background is the sampled band") {
    // a = 1/2, b = 0: the matrix is half the sum of the two shifts, so the
    // eigenvalues are cos(2 pi k / N) — the band [-1, 1] sampled uniformly
    // in angle.
    const std::size_t n = 16;
    std::vector<double> expect(n);
    for (std::size_t k = 0; k < n; ++k)
        expect[k] = std::cos(2.0 * M_PI * static_cast<double>(k) /
                             static_cast<double>(n));
    std::sort(expect.begin(), expect.end());
    const std::vector<double> lam =
        ring_jacobi_eigenvalues(std::vector<double>(n, 0.0),
                                std::vector<double>(n, 0.5));
    REQUIRE(lam.size() == n);
    CHECK(max_abs_diff(lam, expect) <= 1e-13);
    CHECK(std::is_sorted(lam.begin(), lam.end()));
}

TEST_CASE("two-site ring: both bonds couple the same pair") {
    const std::vector<double> lam = ring_jacobi_eigenvalues({0.0, 0.0}, {0.5, 0.5});
    REQUIRE(lam.size() == 2);
    CHECK(lam[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(lam[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ring spectrum input validation") {
    CHECK_THROWS_AS((void)ring_jacobi_eigenvalues({0.0, 0.0}, {0.5, -0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)ring_jacobi_eigenvalues({0.0, 0.0}, {0.5, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)ring_jacobi_eigenvalues({0.0, 0.0}, {0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)ring_jacobi_eigenvalues({0.0}, {0.5}),
                    std::invalid_argument);
}

#ifdef HAVE_EIGEN_ORACLE
TEST_CASE("ring spectrum matches a dense eigensolver on random matrices") {
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> db(-1.0, 1.0);
    std::uniform_real_distribution<double> da(0.05, 1.5);
    for (std::size_t n : {2ul, 3ul, 5ul, 16ul, 33ul, 64ul, 128ul}) {
        std::vector<double> b(n), a(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = db(rng);
            a[i] = da(rng);
        }
        const std::vector<double> fast = ring_jacobi_eigenvalues(b, a);
        const std::vector<double> dense = dense_ring_eigenvalues(b, a);
        CAPTURE(n);
        CHECK(max_abs_diff(fast, dense) <= 1e-11);
    }
}

TEST_CASE("tridiagonal QL matches the dense solver") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const std::size_t n = 64;
    std::vector<double> d(n), e(n - 1);
    for (double& x : d)
        x = dist(rng);
    for (double& x : e)
        x = dist(rng);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(static_cast<long>(i), static_cast<long>(i)) = d[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        m(static_cast<long>(i), static_cast<long>(i + 1)) = e[i];
        m(static_cast<long>(i + 1), static_cast<long>(i)) = e[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    const std::vector<double> lam = tridiagonal_eigenvalues(d, e);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(lam[i] ==
              doctest::Approx(solver.eigenvalues()[static_cast<long>(i)])
                  .epsilon(1e-11)
                  .scale(1.0));
}

TEST_CASE("spectral outliers agree with the dense solver") {
    const std::size_t n = 16;
    FlaschkaState f;
    f.a.assign(n, 0.5);
    f.b.assign(n, 0.0);
    f.a[3] = 1.0; // one strong bond expels eigenvalues from the band
    const SpectrumReport rep = spectrum(f);
    const std::vector<double> dense = dense_ring_eigenvalues(f.b, f.a);
    std::vector<double> dense_out;
    for (double lam : dense)
        if (std::fabs(lam) - 1.0 > 1e-8)
            dense_out.push_back(lam);
    REQUIRE(rep.outliers.size() == dense_out.size());
    REQUIRE(!rep.outliers.empty());
    for (std::size_t i = 0; i < dense_out.size(); ++i) {
        CHECK(rep.outliers[i].lambda ==
              doctest::Approx(dense_out[i]).epsilon(1e-10));
        CHECK(rep.outliers[i].margin ==
              doctest::Approx(std::fabs(dense_out[i]) - 1.0).epsilon(1e-8));
    }
}
#endif

TEST_CASE("constant background has no outliers despite band-edge roundoff") {
    FlaschkaState f;
    f.a.assign(32, 0.5);
    f.b.assign(32, 0.0);
    const SpectrumReport rep = spectrum(f);
    CHECK(rep.outliers.empty());
    CHECK(rep.band_min == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rep.band_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.eigenvalues.size() == 32);
}

TEST_CASE("the lattice flow preserves the ring spectrum only for the exp lattice") {
    const LatticeState ic = make_initial_condition(InitialCondition::GaussianBump, 32);
    IntegratorConfig cfg;
    cfg.kind = IntegratorKind::AdaptiveRK45;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol = 1e-10;
    cfg.t_max = 20.0;
    cfg.snapshot_every = 1.0;

    SnapshotSeries toda_run =
        integrate(make_potential(PotentialFamily::Toda), ic, cfg);
    CHECK(spectral_deviation(toda_run) <= 1e-6);

    SnapshotSeries fput_run = integrate(
        make_potential(PotentialFamily::FputAlpha, {{"alpha", 0.25}}), ic, cfg);
    CHECK(spectral_deviation(fput_run) > 1e-3);
}

TEST_CASE("soliton speed: closed form at cosh arguments") {
    // For lambda = cosh(kappa) the two band integrals reduce to kappa and
    // sinh(kappa); the quadrature must reproduce sinh(kappa)/kappa.
    CHECK(predict_soliton_speed(std::cosh(1.0)) ==
          doctest::Approx(1.1752011936438014).epsilon(1e-12));
    CHECK(predict_soliton_speed(-std::cosh(2.0)) ==
          doctest::Approx(-std::sinh(2.0) / 2.0).epsilon(1e-12));

    for (int i = 0; i < 50; ++i) {
        const double kappa = 0.1 + (3.0 - 0.1) * static_cast<double>(i) / 49.0;
        const double v = predict_soliton_speed(std::cosh(kappa));
        CHECK(std::fabs(v - std::sinh(kappa) / kappa) <=
              1e-10 * std::max(1.0, std::sinh(kappa) / kappa));
    }

    // odd in lambda, exactly
    CHECK(predict_soliton_speed(-std::cosh(0.7)) ==
          -predict_soliton_speed(std::cosh(0.7)));

    // faster-than-sound: every prediction beyond the band exceeds speed 1
    CHECK(std::fabs(predict_soliton_speed(1.0 + 1e-2)) > 1.0);

    CHECK_THROWS_AS((void)predict_soliton_speed(0.5), std::domain_error);
    CHECK_THROWS_AS((void)predict_soliton_speed(1.0), std::domain_error);
    CHECK_THROWS_AS((void)predict_soliton_speed(std::nan("")), std::domain_error);
}
