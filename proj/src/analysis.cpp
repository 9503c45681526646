#include "fput/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fput {
namespace {

// Quantile of a sorted sample by linear interpolation on index q*(n-1).
double sorted_quantile(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1)
        return sorted[0];
    double pos = q * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= n - 1)
        return sorted[n - 1];
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Signed minimal-image displacement a - b on a ring of circumference n.
double ring_delta(double a, double b, double n) {
    return std::remainder(a - b, n);
}

struct OpenTrack {
    std::vector<TrackPoint> obs;
    double last_wrapped = 0.0;
    double last_unwrapped = 0.0;
    double last_t = 0.0;
    int missed = 0;
};

} // namespace

std::vector<double> bond_energy_field(const PotentialSpec& spec,
                                      const LatticeState& state) {
    const std::size_t n = state.size();
    std::vector<double> diff(n), e(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        diff[i] = state.q[i + 1] - state.q[i];
    diff[n - 1] = state.q[0] - state.q[n - 1];
    bond_values(spec, diff.data(), e.data(), n);
    for (std::size_t i = 0; i < n; ++i)
        e[i] += 0.5 * state.p[i] * state.p[i];
    return e;
}

std::vector<EnergyPeak> detect_peaks(const std::vector<double>& field,
                                     double iqr_k) {
    const std::size_t n = field.size();
    std::vector<EnergyPeak> peaks;
    if (n < 3)
        return peaks;

    std::vector<double> sorted = field;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted_quantile(sorted, 0.5);
    const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
    const double threshold = median + iqr_k * iqr;

    for (std::size_t i = 0; i < n; ++i) {
        const double el = field[(i + n - 1) % n];
        const double ec = field[i];
        const double er = field[(i + 1) % n];
        // Strict left, non-strict right: an exact two-sample tie keeps the
        // left sample only, and the parabola then lands on the midpoint.
        if (!(ec > el && ec >= er && ec > threshold))
            continue;
        const double denom = el - 2.0 * ec + er;
        double delta = 0.0;
        if (denom != 0.0)
            delta = 0.5 * (el - er) / denom;
        delta = std::clamp(delta, -0.5, 0.5);
        double pos = static_cast<double>(i) + delta;
        if (pos < 0.0)
            pos += static_cast<double>(n);
        if (pos >= static_cast<double>(n))
            pos -= static_cast<double>(n);
        peaks.push_back({pos, ec - 0.25 * (el - er) * delta});
    }
    return peaks;
}

std::vector<SolitonTrack> detect_solitons(const SnapshotSeries& series,
                                          const DetectorOptions& opts) {
    const std::size_t total = series.states.size();
    std::size_t win = static_cast<std::size_t>(
        std::ceil(opts.window_fraction * static_cast<double>(total)));
    win = std::min(std::max<std::size_t>(win, 1), total);
    if (win < 10) {
        std::ostringstream msg;
        msg << "detect_solitons: need at least 10 snapshots in the analysis window"
            << " (have " << win << " of " << total << ")";
        throw std::invalid_argument(msg.str());
    }
    const std::size_t first = total - win;
    const double ring = static_cast<double>(series.states[first].size());

    std::vector<OpenTrack> open;
    std::vector<OpenTrack> closed;

    for (std::size_t s = first; s < total; ++s) {
        const LatticeState& state = series.states[s];
        const double t = state.t;
        const std::vector<double> energy = bond_energy_field(series.potential, state);
        const std::vector<EnergyPeak> peaks = detect_peaks(energy, opts.iqr_k);

        // Candidate matches inside the gate, cheapest jumps first.
        struct Candidate {
            double dist;
            std::size_t track, peak;
        };
        std::vector<Candidate> cand;
        for (std::size_t i = 0; i < open.size(); ++i) {
            const double gate = opts.v_max * (t - open[i].last_t);
            for (std::size_t j = 0; j < peaks.size(); ++j) {
                const double d =
                    std::fabs(ring_delta(peaks[j].position, open[i].last_wrapped, ring));
                if (d <= gate)
                    cand.push_back({d, i, j});
            }
        }
        std::stable_sort(cand.begin(), cand.end(),
                         [](const Candidate& a, const Candidate& b) {
                             return a.dist < b.dist;
                         });

        std::vector<char> track_used(open.size(), 0), peak_used(peaks.size(), 0);
        for (const Candidate& c : cand) {
            if (track_used[c.track] || peak_used[c.peak])
                continue;
            track_used[c.track] = 1;
            peak_used[c.peak] = 1;
            OpenTrack& tr = open[c.track];
            tr.last_unwrapped += ring_delta(peaks[c.peak].position, tr.last_wrapped, ring);
            tr.last_wrapped = peaks[c.peak].position;
            tr.last_t = t;
            tr.missed = 0;
            tr.obs.push_back({t, tr.last_unwrapped, peaks[c.peak].height});
        }

        std::vector<OpenTrack> still_open;
        still_open.reserve(open.size() + peaks.size());
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (!track_used[i] && ++open[i].missed > opts.max_missed)
                closed.push_back(std::move(open[i]));
            else
                still_open.push_back(std::move(open[i]));
        }
        for (std::size_t j = 0; j < peaks.size(); ++j) {
            if (peak_used[j])
                continue;
            OpenTrack tr;
            tr.last_wrapped = tr.last_unwrapped = peaks[j].position;
            tr.last_t = t;
            tr.obs.push_back({t, peaks[j].position, peaks[j].height});
            still_open.push_back(std::move(tr));
        }
        open = std::move(still_open);
    }
    for (OpenTrack& tr : open)
        closed.push_back(std::move(tr));

    // Emission in order of first observation keeps the result deterministic.
    std::stable_sort(closed.begin(), closed.end(),
                     [](const OpenTrack& a, const OpenTrack& b) {
                         if (a.obs.front().t != b.obs.front().t)
                             return a.obs.front().t < b.obs.front().t;
                         return a.obs.front().position < b.obs.front().position;
                     });

    const std::size_t min_obs = std::max<std::size_t>(opts.min_observations, 5);
    std::vector<SolitonTrack> tracks;
    for (OpenTrack& tr : closed) {
        if (tr.obs.size() < min_obs)
            continue;
        SolitonTrack out;
        out.observations = std::move(tr.obs);
        const SpeedFit fit = fit_track_speed(out.observations);
        out.fitted_speed = fit.speed;
        out.speed_r2 = fit.r2;
        double mean = 0.0;
        for (const TrackPoint& ob : out.observations)
            mean += ob.amplitude;
        mean /= static_cast<double>(out.observations.size());
        double var = 0.0;
        for (const TrackPoint& ob : out.observations)
            var += (ob.amplitude - mean) * (ob.amplitude - mean);
        var /= static_cast<double>(out.observations.size());
        out.amplitude_cv = mean != 0.0 ? std::sqrt(var) / std::fabs(mean) : 0.0;
        out.oscillatory = out.amplitude_cv > 0.2;
        tracks.push_back(std::move(out));
    }
    return tracks;
}

SpeedFit fit_track_speed(const std::vector<TrackPoint>& observations) {
    if (observations.size() < 5) {
        std::ostringstream msg;
        msg << "fit_track_speed: need at least 5 observations (have "
            << observations.size() << ")";
        throw std::invalid_argument(msg.str());
    }
    const auto n = static_cast<double>(observations.size());
    double mt = 0.0, mx = 0.0;
    for (const TrackPoint& ob : observations) {
        mt += ob.t;
        mx += ob.position;
    }
    mt /= n;
    mx /= n;
    double stt = 0.0, stx = 0.0, sxx = 0.0;
    for (const TrackPoint& ob : observations) {
        const double dt = ob.t - mt;
        const double dx = ob.position - mx;
        stt += dt * dt;
        stx += dt * dx;
        sxx += dx * dx;
    }
    if (stt == 0.0)
        throw std::invalid_argument("fit_track_speed: all observations share one time");
    SpeedFit fit;
    fit.speed = stx / stt;
    fit.r2 = sxx == 0.0 ? 1.0 : (stx * stx) / (stt * sxx);
    return fit;
}

std::string region_label_name(RegionLabel label) {
    switch (label) {
    case RegionLabel::Constant:
        return "Constant";
    case RegionLabel::Periodic2:
        return "Periodic2";
    case RegionLabel::Modulated:
        return "Modulated";
    case RegionLabel::Soliton:
        return "Soliton";
    }
    return "?";
}

RegionReport classify_regions(const PotentialSpec& spec, const LatticeState& state,
                              int ref_period, const RegionOptions& opts) {
    if (ref_period != 1 && ref_period != 2) {
        std::ostringstream msg;
        msg << "classify_regions: ref_period must be 1 or 2 (got " << ref_period << ")";
        throw std::invalid_argument(msg.str());
    }
    const std::size_t n = state.size();
    if (n < 16 * static_cast<std::size_t>(ref_period)) {
        std::ostringstream msg;
        msg << "classify_regions: need N >= " << 16 * ref_period
            << " for ref_period " << ref_period << " (got N = " << n << ")";
        throw std::invalid_argument(msg.str());
    }
    const std::size_t w = std::min(std::max<std::size_t>(opts.window, 4), n);
    const std::size_t half = w / 2;

    // Per-site window statistics on the ring.
    std::vector<double> range_q(n), range_p(n), rho(n), amp(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t start = (c + n - half) % n;
        double qmin = state.q[start], qmax = qmin;
        double pmin = state.p[start], pmax = pmin;
        double ss = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            const std::size_t i = (start + k) % n;
            const std::size_t j = (i + static_cast<std::size_t>(ref_period)) % n;
            qmin = std::min(qmin, state.q[i]);
            qmax = std::max(qmax, state.q[i]);
            pmin = std::min(pmin, state.p[i]);
            pmax = std::max(pmax, state.p[i]);
            const double dq = state.q[i] - state.q[j];
            const double dp = state.p[i] - state.p[j];
            ss += dq * dq + dp * dp;
        }
        range_q[c] = qmax - qmin;
        range_p[c] = pmax - pmin;
        rho[c] = std::sqrt(ss / (2.0 * static_cast<double>(w)));
        amp[c] = 0.5 * (range_q[c] + range_p[c]);
    }

    std::vector<double> amp_sorted = amp;
    std::sort(amp_sorted.begin(), amp_sorted.end());
    const double background = sorted_quantile(amp_sorted, 0.5);
    const double eps_flat = 1e-9 + opts.flat_tol * background;
    const double eps_per = opts.periodic_tol * background;

    std::vector<char> soliton(n, 0);
    const std::vector<double> energy = bond_energy_field(spec, state);
    for (const EnergyPeak& pk : detect_peaks(energy, opts.iqr_k)) {
        for (std::size_t s = 0; s < n; ++s) {
            if (std::fabs(ring_delta(static_cast<double>(s), pk.position,
                                     static_cast<double>(n))) <=
                static_cast<double>(half))
                soliton[s] = 1;
        }
    }

    std::vector<RegionLabel> label(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (soliton[c])
            label[c] = RegionLabel::Soliton;
        else if (range_q[c] <= eps_flat && range_p[c] <= eps_flat)
            label[c] = RegionLabel::Constant;
        else if (rho[c] <= eps_per)
            label[c] = RegionLabel::Periodic2;
        else
            label[c] = RegionLabel::Modulated;
    }

    RegionReport report;
    report.snapshot_time = state.t;
    std::size_t run_start = 0;
    double run_sum = 0.0;
    for (std::size_t c = 0; c <= n; ++c) {
        if (c < n && c > run_start && label[c] == label[run_start]) {
            run_sum += rho[c];
            continue;
        }
        if (c > run_start) {
            RegionSegment seg;
            seg.n_start = run_start + 1;
            seg.n_end = c;
            seg.label = label[run_start];
            seg.residual = run_sum / static_cast<double>(c - run_start);
            report.segments.push_back(seg);
        }
        if (c < n) {
            run_start = c;
            run_sum = rho[c];
        }
    }
    return report;
}

SpeedComparison compare_speeds(const std::vector<SolitonTrack>& tracks,
                               const SpectrumReport& spectrum) {
    struct Prediction {
        double lambda, speed;
    };
    std::vector<Prediction> preds;
    preds.reserve(spectrum.outliers.size());
    for (const SpectrumOutlier& out : spectrum.outliers)
        preds.push_back({out.lambda, predict_soliton_speed(out.lambda)});

    struct Candidate {
        double cost;
        std::size_t pred, track;
    };
    std::vector<Candidate> cand;
    for (std::size_t i = 0; i < preds.size(); ++i)
        for (std::size_t j = 0; j < tracks.size(); ++j)
            cand.push_back({std::fabs(preds[i].speed - tracks[j].fitted_speed), i, j});
    std::stable_sort(cand.begin(), cand.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.cost < b.cost;
                     });

    SpeedComparison cmp;
    std::vector<char> pred_used(preds.size(), 0), track_used(tracks.size(), 0);
    for (const Candidate& c : cand) {
        if (pred_used[c.pred] || track_used[c.track])
            continue;
        pred_used[c.pred] = 1;
        track_used[c.track] = 1;
        SpeedMatch m;
        m.lambda = preds[c.pred].lambda;
        m.predicted = preds[c.pred].speed;
        m.tracked = tracks[c.track].fitted_speed;
        m.relative_mismatch = std::fabs(m.predicted - m.tracked) /
                              std::max(std::fabs(m.predicted), 1e-300);
        cmp.matched.push_back(m);
    }
    std::sort(cmp.matched.begin(), cmp.matched.end(),
              [](const SpeedMatch& a, const SpeedMatch& b) { return a.lambda < b.lambda; });
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (!pred_used[i])
            cmp.unmatched_predictions.push_back(preds[i].speed);
    for (std::size_t j = 0; j < tracks.size(); ++j)
        if (!track_used[j])
            cmp.unmatched_tracks.push_back(tracks[j].fitted_speed);
    return cmp;
}

} // namespace fput
