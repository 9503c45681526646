#pragma once
// Phenomenology extraction: soliton tracks with fitted speeds, snapshot
// segmentation into constant / period-2 / modulated / soliton regions, and
// matching of tracked speeds against spectral predictions.

#include <cstddef>
#include <string>
#include <vector>

#include "fput/integrators.hpp"
#include "fput/lattice.hpp"
#include "fput/potential.hpp"
#include "fput/toda.hpp"

namespace fput {

// Bond energies e_n = p_n^2/2 + V(q_{n+1} - q_n), cyclic.  Translation
// invariant in q, and sharply localized on pulses over both flat and
// period-2 backgrounds, which raw displacements are not.
std::vector<double> bond_energy_field(const PotentialSpec& spec,
                                      const LatticeState& state);

struct EnergyPeak {
    double position = 0.0; // fractional bond index in [0, N)
    double height = 0.0;   // parabola-refined energy at the peak
};

// Local maxima of a cyclic field exceeding median + iqr_k * IQR, refined to
// sub-site accuracy by a parabola through the three samples around each
// maximum.  The left comparison is strict and the right non-strict, so an
// exact two-sample tie yields one peak at the half-integer midpoint.
std::vector<EnergyPeak> detect_peaks(const std::vector<double>& field,
                                     double iqr_k = 6.0);

struct TrackPoint {
    double t = 0.0;
    double position = 0.0;  // unwrapped fractional site index (may leave [0, N))
    double amplitude = 0.0; // peak bond energy
};

struct SolitonTrack {
    std::vector<TrackPoint> observations; // time-ordered, ring-unwrapped
    double fitted_speed = 0.0;            // sites per unit time
    double speed_r2 = 0.0;
    double amplitude_cv = 0.0; // stddev/mean of peak amplitudes
    bool oscillatory = false;  // amplitude_cv > 0.2: breather-like pulse
};

struct DetectorOptions {
    double window_fraction = 0.25;      // analyse the final fraction of snapshots
    double iqr_k = 6.0;                 // peak threshold: median + iqr_k * IQR
    double v_max = 5.0;                 // association gate, sites per unit time
    int max_missed = 2;                 // snapshots a track may skip before closing
    std::size_t min_observations = 5;   // shorter tracks are dropped (floor 5)
};

// Track bond-energy peaks through the late-time window of the series
// (potential taken from the series manifest) and fit one speed per track.
// Needs at least 10 snapshots in the window; an empty result is valid.
std::vector<SolitonTrack> detect_solitons(const SnapshotSeries& series,
                                          const DetectorOptions& opts = {});

struct SpeedFit {
    double speed = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares of unwrapped position on time.  Requires >= 5
// observations that do not all share one time.  A track that stands still
// fits perfectly: r2 = 1 when the position variance is zero.
SpeedFit fit_track_speed(const std::vector<TrackPoint>& observations);

enum class RegionLabel { Constant, Periodic2, Modulated, Soliton };

std::string region_label_name(RegionLabel label);

struct RegionSegment {
    std::size_t n_start = 0; // 1-based, inclusive
    std::size_t n_end = 0;   // 1-based, inclusive
    RegionLabel label = RegionLabel::Constant;
    double residual = 0.0; // mean periodicity residual over the segment
};

struct RegionReport {
    double snapshot_time = 0.0;
    std::vector<RegionSegment> segments; // linear partition of [1, N]
};

struct RegionOptions {
    std::size_t window = 16;    // sliding window width, sites
    double flat_tol = 0.01;     // Constant: range <= 1e-9 + flat_tol * background
    double periodic_tol = 0.05; // Periodic2: residual <= periodic_tol * background
    double iqr_k = 6.0;         // soliton flagging reuses the peak detector
};

// Segment one snapshot.  Around every site a centered window of `window`
// sites yields a q/p range and the RMS residual of shifting by ref_period
// sites; the background amplitude is the median over sites of
// (range_q + range_p)/2.  Per-site labels, by priority: Soliton within
// window/2 sites of a detected energy peak; Constant if both ranges are flat
// against the background; Periodic2 if the shift residual is small; else
// Modulated.  Equal-label runs merge into segments.  The list partitions
// [1, N] linearly, so one ring region crossing the seam appears as matching
// first and last rows.  ref_period must be 1 or 2 and N >= 16 * ref_period.
RegionReport classify_regions(const PotentialSpec& spec, const LatticeState& state,
                              int ref_period, const RegionOptions& opts = {});

struct SpeedMatch {
    double lambda = 0.0;    // spectral outlier behind the prediction
    double predicted = 0.0; // speed from the outlier eigenvalue
    double tracked = 0.0;   // fitted speed of the matched track
    double relative_mismatch = 0.0; // |predicted - tracked| / |predicted|
};

struct SpeedComparison {
    std::vector<SpeedMatch> matched; // ascending in lambda
    std::vector<double> unmatched_predictions;
    std::vector<double> unmatched_tracks;
};

// Predict one speed per spectral outlier and greedily pair predictions with
// fitted track speeds by smallest absolute difference. A count mismatch is
// reported through the unmatched lists, not as an error.
SpeedComparison compare_speeds(const std::vector<SolitonTrack>& tracks,
                               const SpectrumReport& spectrum);

} // namespace fput
