#include "fput/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fput {
namespace {

constexpr double kWidth = 960.0, kHeight = 480.0;
constexpr double kLeft = 60.0, kRight = 20.0, kTop = 36.0, kBottom = 44.0;

std::string num(double x, const char* fmt = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), fmt, x);
    return buf;
}

const char* region_fill(RegionLabel label) {
    switch (label) {
    case RegionLabel::Constant: return "#e8e8e8";
    case RegionLabel::Periodic2: return "#bcd9ef";
    case RegionLabel::Modulated: return "#fde2b0";
    case RegionLabel::Soliton: return "#f6b6b4";
    }
    return "#ffffff";
}

// tick spacing of the form {1,2,5}*10^k closest below span/target
double nice_step(double span, int target) {
    const double raw = span / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(std::max(raw, 1e-300))));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw)
            return mag * m;
    return mag * 10.0;
}

} // namespace

std::string render_snapshot_svg(const LatticeState& state, std::size_t trim_edges,
                                const RegionReport* regions,
                                const std::string& subtitle) {
    const std::size_t n = state.size();
    if (n == 0)
        throw std::invalid_argument("cannot plot an empty state");
    if (2 * trim_edges + 2 > n)
        throw std::invalid_argument("trim_edges = " + std::to_string(trim_edges) +
                                    " leaves fewer than 2 of " + std::to_string(n) +
                                    " sites");
    const std::size_t lo = 1 + trim_edges;  // 1-based plotted window
    const std::size_t hi = n - trim_edges;

    double qmin = state.q[lo - 1], qmax = qmin;
    for (std::size_t i = lo; i <= hi; ++i) {
        qmin = std::min(qmin, state.q[i - 1]);
        qmax = std::max(qmax, state.q[i - 1]);
    }
    double pad = 0.05 * (qmax - qmin);
    if (pad == 0.0)
        pad = 1.0;  // flat snapshot: keep the line mid-frame
    const double ylo = qmin - pad, yhi = qmax + pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto sx = [&](double site) {
        return kLeft + (site - static_cast<double>(lo)) /
                           static_cast<double>(hi - lo) * plot_w;
    };
    const auto sy = [&](double q) {
        return kTop + (yhi - q) / (yhi - ylo) * plot_h;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n";
    svg << "<rect class=\"bg\" x=\"0\" y=\"0\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";

    if (regions) {
        for (const RegionSegment& seg : regions->segments) {
            const double a = std::max<double>(seg.n_start - 0.5, lo);
            const double b = std::min<double>(seg.n_end + 0.5, hi);
            if (b <= a)
                continue;
            svg << "<rect class=\"region region-"
                << region_label_name(seg.label) << "\" x=\"" << num(sx(a))
                << "\" y=\"" << num(kTop) << "\" width=\"" << num(sx(b) - sx(a))
                << "\" height=\"" << num(plot_h) << "\" fill=\""
                << region_fill(seg.label) << "\"/>\n";
        }
        double lx = kLeft;
        for (RegionLabel label : {RegionLabel::Constant, RegionLabel::Periodic2,
                                  RegionLabel::Modulated, RegionLabel::Soliton}) {
            svg << "<rect class=\"legend\" x=\"" << num(lx) << "\" y=\""
                << num(kTop - 26.0) << "\" width=\"12\" height=\"12\" fill=\""
                << region_fill(label) << "\"/>\n";
            svg << "<text class=\"legend\" x=\"" << num(lx + 16.0) << "\" y=\""
                << num(kTop - 16.0) << "\" font-size=\"11\">"
                << region_label_name(label) << "</text>\n";
            lx += 110.0;
        }
    }

    // frame + ticks
    svg << "<rect class=\"frame\" x=\"" << num(kLeft) << "\" y=\"" << num(kTop)
        << "\" width=\"" << num(plot_w) << "\" height=\"" << num(plot_h)
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    const double xstep = nice_step(static_cast<double>(hi - lo), 8);
    for (double site = std::ceil(lo / xstep) * xstep; site <= hi + 1e-9;
         site += xstep) {
        const double x = sx(site);
        svg << "<line class=\"tick\" x1=\"" << num(x) << "\" y1=\""
            << num(kTop + plot_h) << "\" x2=\"" << num(x) << "\" y2=\""
            << num(kTop + plot_h + 5.0) << "\" stroke=\"#333333\"/>\n";
        svg << "<text class=\"xlabel\" x=\"" << num(x) << "\" y=\""
            << num(kTop + plot_h + 18.0)
            << "\" font-size=\"11\" text-anchor=\"middle\">"
            << num(site, "%.6g") << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double q = ylo + (yhi - ylo) * k / 4.0;
        const double y = sy(q);
        svg << "<line class=\"tick\" x1=\"" << num(kLeft - 5.0) << "\" y1=\""
            << num(y) << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(y)
            << "\" stroke=\"#333333\"/>\n";
        svg << "<text class=\"ylabel\" x=\"" << num(kLeft - 8.0) << "\" y=\""
            << num(y + 4.0) << "\" font-size=\"11\" text-anchor=\"end\">"
            << num(q, "%.6g") << "</text>\n";
    }
    svg << "<text class=\"axis\" x=\"" << num(kLeft + plot_w / 2.0) << "\" y=\""
        << num(kHeight - 8.0)
        << "\" font-size=\"12\" text-anchor=\"middle\">n</text>\n";
    svg << "<text class=\"axis\" x=\"14\" y=\"" << num(kTop + plot_h / 2.0)
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << num(kTop + plot_h / 2.0) << ")\">q</text>\n";

    // data: polyline first, then one circle per site
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"#1f61a8\" "
           "stroke-width=\"1\" points=\"";
    for (std::size_t i = lo; i <= hi; ++i) {
        if (i != lo)
            svg << ' ';
        svg << num(sx(static_cast<double>(i))) << ',' << num(sy(state.q[i - 1]));
    }
    svg << "\"/>\n";
    for (std::size_t i = lo; i <= hi; ++i)
        svg << "<circle class=\"site\" cx=\"" << num(sx(static_cast<double>(i)))
            << "\" cy=\"" << num(sy(state.q[i - 1]))
            << "\" r=\"1.5\" fill=\"#16425f\"/>\n";

    std::string title = "t = " + num(state.t, "%.6g") + ", N = " + std::to_string(n);
    if (!subtitle.empty())
        title += ", " + subtitle;
    svg << "<text class=\"title\" x=\"" << num(kLeft) << "\" y=\"20\" "
           "font-size=\"14\" font-family=\"sans-serif\">"
        << title << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace fput
