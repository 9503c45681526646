#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fput/analysis.hpp"
#include "fput/integrators.hpp"
#include "fput/lattice.hpp"
#include "fput/potential.hpp"
#include "fput/toda.hpp"

using namespace fput;

namespace {

// Synthetic oracle: a momentum pulse of fixed shape translating at an exact
// speed. The bond-energy field inherits the shape, so peak positions are
// known by construction.
LatticeState pulse_state(std::size_t n, double t, double center0, double speed) {
    LatticeState st;
    st.t = t;
    st.q.assign(n, 0.0);
    st.p.resize(n);
    const double c = center0 + speed * t;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::remainder(static_cast<double>(i) - c,
                                        static_cast<double>(n));
        st.p[i] = 3.0 * std::exp(-d * d / 8.0);
    }
    return st;
}

SnapshotSeries pulse_series(std::size_t n, std::size_t count, double center0,
                            double speed) {
    SnapshotSeries series;
    series.potential = make_potential(PotentialFamily::Harmonic);
    series.ic_kind = "synthetic";
    for (std::size_t j = 0; j < count; ++j)
        series.states.push_back(pulse_state(n, static_cast<double>(j), center0, speed));
    return series;
}

void check_partition(const RegionReport& rep, std::size_t n) {
    REQUIRE(!rep.segments.empty());
    CHECK(rep.segments.front().n_start == 1);
    CHECK(rep.segments.back().n_end == n);
    for (std::size_t i = 0; i + 1 < rep.segments.size(); ++i) {
        CHECK(rep.segments[i + 1].n_start == rep.segments[i].n_end + 1);
        CHECK(rep.segments[i + 1].label != rep.segments[i].label);
    }
    for (const RegionSegment& seg : rep.segments)
        CHECK(seg.n_start <= seg.n_end);
}

} // namespace

TEST_CASE("bond energy field: frozen values on a tiny ring") {
    const PotentialSpec harm = make_potential(PotentialFamily::Harmonic);
    LatticeState st;
    st.q.assign(8, 0.0);
    st.p.assign(8, 0.0);
    st.p[2] = 2.0;
    st.q[0] = 1.0; // bonds 8 and 1 stretch by +-1
    const std::vector<double> e = bond_energy_field(harm, st);
    REQUIRE(e.size() == 8);
    CHECK(e[0] == doctest::Approx(0.5).epsilon(1e-15)); // V(q2-q1) = V(-1)
    CHECK(e[2] == doctest::Approx(2.0).epsilon(1e-15)); // kinetic only
    CHECK(e[7] == doctest::Approx(0.5).epsilon(1e-15)); // V(q1-q8) = V(+1)
    CHECK(e[3] == 0.0);
}

TEST_CASE("peak detection: spikes, ties, quadratic refinement, thresholding") {
    // flat field: no strict rise anywhere, no peaks
    CHECK(detect_peaks(std::vector<double>(16, 1.0)).empty());

    // isolated spike on a zero background
    std::vector<double> spike(16, 0.0);
    spike[5] = 2.0;
    auto pk = detect_peaks(spike);
    REQUIRE(pk.size() == 1);
    CHECK(pk[0].position == 5.0);
    CHECK(pk[0].height == 2.0);

    // exact two-sample tie: one peak at the half-integer midpoint
    std::vector<double> tie(16, 0.0);
    tie[5] = tie[6] = 1.0;
    pk = detect_peaks(tie);
    REQUIRE(pk.size() == 1);
    CHECK(pk[0].position == doctest::Approx(5.5).epsilon(1e-15));
    CHECK(pk[0].height == doctest::Approx(1.125).epsilon(1e-15)); // parabola apex

    // quadratic samples are refined to the exact vertex (ring large enough
    // that the elevated samples do not inflate the IQR threshold)
    std::vector<double> quad(64, 0.0);
    for (std::size_t i = 3; i <= 8; ++i) {
        const double d = static_cast<double>(i) - 5.3;
        quad[i] = std::max(0.0, 10.0 - d * d);
    }
    pk = detect_peaks(quad);
    REQUIRE(pk.size() == 1);
    CHECK(pk[0].position == doctest::Approx(5.3).epsilon(1e-12));
    CHECK(pk[0].height == doctest::Approx(10.0).epsilon(1e-12));

    // median + 6 IQR threshold: an alternating background has IQR 1, so a
    // bump of 5 is rejected and a spike of 100 is kept
    std::vector<double> noisy(16);
    for (std::size_t i = 0; i < 16; ++i)
        noisy[i] = (i % 2 == 0) ? 0.0 : 1.0;
    noisy[7] = 100.0;
    pk = detect_peaks(noisy);
    REQUIRE(pk.size() == 1);
    CHECK(pk[0].position == 7.0);
    noisy[7] = 5.0; // below median 0.5 + 6 * IQR 1 = 6.5
    CHECK(detect_peaks(noisy).empty());

    // wrap-around: the peak may sit on the seam
    std::vector<double> seam(16, 0.0);
    seam[15] = seam[0] = 1.0;
    pk = detect_peaks(seam);
    REQUIRE(pk.size() == 1);
    CHECK(pk[0].position == doctest::Approx(15.5).epsilon(1e-12));
}

TEST_CASE("speed fit: frozen slopes, degeneracies, noise bound") {
    std::vector<TrackPoint> obs;
    for (int i = 0; i < 6; ++i)
        obs.push_back({static_cast<double>(i), 2.0 * i + 3.0, 1.0});
    SpeedFit fit = fit_track_speed(obs);
    CHECK(fit.speed == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-14));

    // standing still is a perfect zero-speed fit
    for (TrackPoint& ob : obs)
        ob.position = 4.0;
    fit = fit_track_speed(obs);
    CHECK(fit.speed == 0.0);
    CHECK(fit.r2 == 1.0);

    // alternating +-0.1 noise around slope 1.2
    obs.clear();
    for (int i = 0; i < 20; ++i)
        obs.push_back({static_cast<double>(i), 1.2 * i + ((i % 2 == 0) ? 0.1 : -0.1),
                       1.0});
    fit = fit_track_speed(obs);
    CHECK(std::fabs(fit.speed - 1.2) <= 0.05);

    CHECK_THROWS_AS((void)fit_track_speed({{0, 0, 0}, {1, 1, 0}}),
                    std::invalid_argument);
    std::vector<TrackPoint> same_t(6, TrackPoint{2.0, 1.0, 1.0});
    CHECK_THROWS_AS((void)fit_track_speed(same_t), std::invalid_argument);
}

TEST_CASE("equilibrium series yields no tracks") {
    SnapshotSeries series;
    series.potential = make_potential(PotentialFamily::Toda);
    for (std::size_t j = 0; j < 40; ++j) {
        LatticeState st;
        st.t = static_cast<double>(j);
        st.q.assign(32, 0.0);
        st.p.assign(32, 0.0);
        series.states.push_back(st);
    }
    DetectorOptions opts;
    opts.window_fraction = 1.0;
    CHECK(detect_solitons(series, opts).empty());
}

TEST_CASE("a translating pulse is tracked at its exact speed") {
    const SnapshotSeries series = pulse_series(128, 30, 10.0, 1.5);
    DetectorOptions opts;
    opts.window_fraction = 1.0;
    const std::vector<SolitonTrack> tracks = detect_solitons(series, opts);
    REQUIRE(tracks.size() == 1);
    const SolitonTrack& tr = tracks[0];
    CHECK(tr.observations.size() == 30);
    // the pulse lands alternately on integer and half-integer grid offsets;
    // the parabolic refinement is exact in both cases
    CHECK(tr.fitted_speed == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(tr.speed_r2 >= 0.999);
    CHECK(std::fabs(tr.fitted_speed - 1.5) <= 0.01);
    CHECK(tr.observations.front().position == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(!tr.oscillatory);
    CHECK(tr.amplitude_cv <= 0.05);
}

TEST_CASE("tracks are unwrapped across the ring seam before fitting") {
    const SnapshotSeries series = pulse_series(128, 30, 120.0, 1.5);
    DetectorOptions opts;
    opts.window_fraction = 1.0;
    const std::vector<SolitonTrack> tracks = detect_solitons(series, opts);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].fitted_speed == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(tracks[0].speed_r2 >= 0.999);
    // unwrapped coordinates keep increasing past N = 128
    CHECK(tracks[0].observations.back().position ==
          doctest::Approx(120.0 + 1.5 * 29.0).epsilon(1e-9));
}

TEST_CASE("two counter-moving pulses give two clean tracks") {
    // Pulses stay well separated; general (non-half-integer) grid offsets
    // leave an O(0.01)-site parabola bias, which is the documented accuracy.
    SnapshotSeries series;
    series.potential = make_potential(PotentialFamily::Harmonic);
    const std::size_t n = 128;
    for (std::size_t j = 0; j < 15; ++j) {
        const double t = static_cast<double>(j);
        LatticeState a = pulse_state(n, t, 20.0, 1.4);
        const LatticeState b = pulse_state(n, t, 100.0, -1.1);
        for (std::size_t i = 0; i < n; ++i)
            a.p[i] += b.p[i];
        series.states.push_back(a);
    }
    DetectorOptions opts;
    opts.window_fraction = 1.0;
    const std::vector<SolitonTrack> tracks = detect_solitons(series, opts);
    REQUIRE(tracks.size() == 2);
    // emitted in order of first appearance position
    CHECK(std::fabs(tracks[0].fitted_speed - 1.4) <= 0.01);
    CHECK(std::fabs(tracks[1].fitted_speed - (-1.1)) <= 0.01);
    CHECK(tracks[0].speed_r2 >= 0.999);
    CHECK(tracks[1].speed_r2 >= 0.999);
}

TEST_CASE("soliton detection is ring-shift equivariant") {
    const std::size_t n = 128, k = 37;
    const SnapshotSeries base = pulse_series(n, 20, 40.0, 1.25);
    SnapshotSeries shifted = base;
    for (LatticeState& st : shifted.states) {
        LatticeState rot = st;
        for (std::size_t i = 0; i < n; ++i) {
            rot.q[i] = st.q[(i + k) % n];
            rot.p[i] = st.p[(i + k) % n];
        }
        st = rot;
    }
    DetectorOptions opts;
    opts.window_fraction = 1.0;
    const auto t0 = detect_solitons(base, opts);
    const auto t1 = detect_solitons(shifted, opts);
    REQUIRE(t0.size() == 1);
    REQUIRE(t1.size() == 1);
    CHECK(t1[0].fitted_speed == doctest::Approx(t0[0].fitted_speed).epsilon(1e-12));
    CHECK(t1[0].speed_r2 == doctest::Approx(t0[0].speed_r2).epsilon(1e-12));
    CHECK(t1[0].amplitude_cv == doctest::Approx(t0[0].amplitude_cv).epsilon(1e-12));
    // positions shift by -k modulo the ring size
    const double d = std::remainder(t1[0].observations[0].position -
                                        t0[0].observations[0].position + k,
                                    static_cast<double>(n));
    CHECK(std::fabs(d) <= 1e-9);
}

TEST_CASE("detection window precondition") {
    const SnapshotSeries series = pulse_series(64, 8, 10.0, 1.0);
    DetectorOptions opts;
    opts.window_fraction = 1.0;
    CHECK_THROWS_AS((void)detect_solitons(series, opts), std::invalid_argument);
    // 30 snapshots at the default 25% window -> only 8 in the window
    const SnapshotSeries s30 = pulse_series(64, 30, 10.0, 1.0);
    CHECK_THROWS_AS((void)detect_solitons(s30), std::invalid_argument);
}

TEST_CASE("region classification: trivial states") {
    const PotentialSpec toda = make_potential(PotentialFamily::Toda);

    LatticeState rest;
    rest.t = 7.0;
    rest.q.assign(32, 0.0);
    rest.p.assign(32, 0.0);
    RegionReport rep = classify_regions(toda, rest, 1);
    check_partition(rep, 32);
    REQUIRE(rep.segments.size() == 1);
    CHECK(rep.segments[0].label == RegionLabel::Constant);
    CHECK(rep.snapshot_time == 7.0);
    CHECK(region_label_name(rep.segments[0].label) == "Constant");

    // exact alternating momenta: a pure period-2 state
    LatticeState alt = rest;
    for (std::size_t i = 0; i < 32; ++i)
        alt.p[i] = (i % 2 == 0) ? 1.0 : -1.0;
    rep = classify_regions(toda, alt, 2);
    check_partition(rep, 32);
    REQUIRE(rep.segments.size() == 1);
    CHECK(rep.segments[0].label == RegionLabel::Periodic2);
    CHECK(rep.segments[0].residual <= 1e-12);

    CHECK_THROWS_AS((void)classify_regions(toda, rest, 3), std::invalid_argument);
    LatticeState tiny;
    tiny.q.assign(16, 0.0);
    tiny.p.assign(16, 0.0);
    CHECK_THROWS_AS((void)classify_regions(toda, tiny, 2), std::invalid_argument);
    CHECK_NOTHROW((void)classify_regions(toda, tiny, 1));
}

TEST_CASE("region classification is invariant under uniform q shifts") {
    const PotentialSpec toda = make_potential(PotentialFamily::Toda);
    LatticeState st;
    st.q.assign(64, 0.0);
    st.p.assign(64, 0.0);
    for (std::size_t i = 20; i < 44; ++i)
        st.p[i] = (i % 2 == 0) ? 0.8 : -0.8;
    const RegionReport a = classify_regions(toda, st, 2);
    for (double& q : st.q)
        q += 5.0;
    const RegionReport b = classify_regions(toda, st, 2);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].n_start == b.segments[i].n_start);
        CHECK(a.segments[i].n_end == b.segments[i].n_end);
        CHECK(a.segments[i].label == b.segments[i].label);
        CHECK(a.segments[i].residual ==
              doctest::Approx(b.segments[i].residual).epsilon(1e-12));
    }
}

TEST_CASE("a pulse over an alternating background is labeled Soliton") {
    const PotentialSpec toda = make_potential(PotentialFamily::Toda);
    LatticeState st;
    const std::size_t n = 128;
    st.q.assign(n, 0.0);
    st.p.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::remainder(static_cast<double>(i) - 64.0,
                                        static_cast<double>(n));
        st.p[i] = ((i % 2 == 0) ? 1.0 : -1.0) + 6.0 * std::exp(-d * d / 4.0);
    }
    const RegionReport rep = classify_regions(toda, st, 2);
    check_partition(rep, n);
    std::size_t soliton_segments = 0;
    bool covers_center = false;
    for (const RegionSegment& seg : rep.segments) {
        if (seg.label == RegionLabel::Soliton) {
            ++soliton_segments;
            if (seg.n_start <= 65 && 65 <= seg.n_end)
                covers_center = true; // site 65 is 0-based index 64
        }
    }
    CHECK(soliton_segments == 1);
    CHECK(covers_center);
}

TEST_CASE("mixed constant and alternating halves segment cleanly") {
    const PotentialSpec harm = make_potential(PotentialFamily::Harmonic);
    LatticeState st;
    const std::size_t n = 64;
    st.q.assign(n, 0.0);
    st.p.assign(n, 0.0);
    for (std::size_t i = 32; i < 64; ++i)
        st.p[i] = (i % 2 == 0) ? 1.0 : -1.0;
    const RegionReport rep = classify_regions(harm, st, 2);
    check_partition(rep, n);
    bool has_const = false, has_per = false;
    for (const RegionSegment& seg : rep.segments) {
        has_const |= seg.label == RegionLabel::Constant;
        has_per |= seg.label == RegionLabel::Periodic2;
    }
    CHECK(has_const);
    CHECK(has_per);
}

TEST_CASE("speed comparison: matching, mismatch ratio, leftovers") {
    SpectrumReport sr;
    CHECK(compare_speeds({}, sr).matched.empty());

    sr.outliers = {{std::cosh(1.0), std::cosh(1.0) - 1.0}};
    SolitonTrack tr;
    tr.fitted_speed = 1.175;
    SpeedComparison cmp = compare_speeds({tr}, sr);
    REQUIRE(cmp.matched.size() == 1);
    CHECK(cmp.matched[0].lambda == doctest::Approx(std::cosh(1.0)).epsilon(1e-15));
    CHECK(cmp.matched[0].predicted == doctest::Approx(1.1752011936438014).epsilon(1e-10));
    CHECK(cmp.matched[0].tracked == 1.175);
    CHECK(cmp.matched[0].relative_mismatch <= 0.05);
    CHECK(cmp.unmatched_predictions.empty());
    CHECK(cmp.unmatched_tracks.empty());

    // two outliers, one track: the closer prediction wins, the other is listed
    sr.outliers = {{-std::cosh(2.0), std::cosh(2.0) - 1.0},
                   {std::cosh(1.0), std::cosh(1.0) - 1.0}};
    cmp = compare_speeds({tr}, sr);
    REQUIRE(cmp.matched.size() == 1);
    CHECK(cmp.matched[0].lambda == doctest::Approx(std::cosh(1.0)).epsilon(1e-15));
    REQUIRE(cmp.unmatched_predictions.size() == 1);
    CHECK(cmp.unmatched_predictions[0] ==
          doctest::Approx(-std::sinh(2.0) / 2.0).epsilon(1e-10));

    // extra track: reported unmatched, not fatal
    SolitonTrack slow;
    slow.fitted_speed = 0.2;
    cmp = compare_speeds({tr, slow}, sr);
    CHECK(cmp.matched.size() == 2); // both outliers matched now
    CHECK(cmp.unmatched_tracks.empty());
    sr.outliers.pop_back();
    cmp = compare_speeds({tr, slow}, sr);
    CHECK(cmp.matched.size() == 1);
    REQUIRE(cmp.unmatched_tracks.size() == 1);
}
