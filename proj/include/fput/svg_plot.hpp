#pragma once

#include <string>

#include "fput/analysis.hpp"
#include "fput/lattice.hpp"

namespace fput {

// Render one snapshot as a standalone SVG document: q_n against the site
// index n, drawn as a polyline plus one circle per plotted site (so tests can
// count elements). trim_edges sites are dropped from each end of the ring;
// the plotted window is n = 1+trim .. N-trim (1-based). When `regions` is
// given, its segments are drawn as a color underlay with a legend.
std::string render_snapshot_svg(const LatticeState& state, std::size_t trim_edges,
                                const RegionReport* regions = nullptr,
                                const std::string& subtitle = "");

} // namespace fput
