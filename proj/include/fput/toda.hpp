#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fput/integrators.hpp"
#include "fput/lattice.hpp"

namespace fput {

// Flaschka variables of the Toda ring:
//   a_n = (1/2) exp((q_n - q_{n+1})/2),  b_n = -p_n/2,  indices cyclic.
struct FlaschkaState {
    double t = 0.0;
    std::vector<double> a;
    std::vector<double> b;

    std::size_t size() const { return a.size(); }
};

// Throws std::domain_error when a bond difference would overflow the
// exponential (|q_n - q_{n+1}| > 1400: unphysical state).
FlaschkaState to_flaschka(const LatticeState& state);

// Isospectral flow: db_n = 2(a_n^2 - a_{n-1}^2), da_n = a_n(b_{n+1} - b_n).
void toda_flaschka_rhs(const FlaschkaState& state, FlaschkaState& out);

struct SpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
// `diag` and subdiagonal `off` (implicit-shift QL). Throws SpectrumError if
// any eigenvalue fails to converge within the iteration bound.
std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag,
                                            std::vector<double> off);

// Eigenvalues (ascending) of the periodic Jacobi matrix: diagonal b_n,
// off-diagonal a_n between sites n and n+1, with a_N closing the ring in
// the corners. Requires all a_n > 0. The ring coupling is handled by a
// rank-one tear of the corner plus a secular-equation correction.
std::vector<double> ring_jacobi_eigenvalues(const std::vector<double>& b,
                                            const std::vector<double>& a);

struct SpectrumOutlier {
    double lambda = 0.0;
    double margin = 0.0; // |lambda| - 1, distance past the band edge
};

struct SpectrumReport {
    std::vector<double> eigenvalues; // ascending
    double band_min = 0.0;
    double band_max = 0.0;
    std::vector<SpectrumOutlier> outliers;
};

// Spectrum of the Flaschka Jacobi matrix. Eigenvalues with |lambda| - 1 >
// outlier_tol are reported as outliers (the tolerance keeps band-edge
// roundoff from masquerading as solitons).
SpectrumReport spectrum(const FlaschkaState& state, double outlier_tol = 1e-8);

// Max |lambda_i(t) - lambda_i(0)| over up to max_snapshots snapshots
// (evenly subsampled), using sorted ring spectra of the Flaschka transform.
double spectral_deviation(const SnapshotSeries& series,
                          std::size_t max_snapshots = 21);

// Velocity of a constant-background soliton with Jacobi eigenvalue lambda,
// |lambda| > 1: the ratio of the two genus-zero Abelian integrals attached
// to the band [-1, 1], evaluated by Gauss-Chebyshev quadrature on the band
// (the node weights absorb the inverse-square-root band-edge factors).
// Odd in lambda; for lambda = +-cosh(kappa) the value is
// +-sinh(kappa)/kappa. Throws std::domain_error for |lambda| <= 1.
double predict_soliton_speed(double lambda, std::size_t quadrature_nodes = 2000);

} // namespace fput
