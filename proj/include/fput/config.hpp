#pragma once
// Line-oriented key=value run configuration with dotted sections,
// validation, and a canonical writer for round-tripping.

#include <stdexcept>
#include <string>
#include <vector>

#include "fput/integrators.hpp"
#include "fput/lattice.hpp"
#include "fput/potential.hpp"

namespace fput {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlotConfig {
    std::size_t trim_edges = 0;
    std::vector<double> times; // must lie on the snapshot grid
};

struct RunConfig {
    std::size_t n_particles = 2048;
    PotentialSpec potential; // family is required in every config
    InitialCondition ic = InitialCondition::GaussianBump; // required key
    IntegratorConfig integrator;
    std::string output_dir = "run";
    PlotConfig plot;
};

// Parse configuration text. `origin` names the source in error messages
// (file path or "<inline>"). `overrides` are extra "key=value" assignments
// applied after the file (command-line layer); they replace file values.
// Every error names the offending key and its line.
RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::vector<std::string>& overrides = {});

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});

// Canonical echo of the effective configuration: parsing it back yields an
// equal RunConfig (round trip).
std::string write_config(const RunConfig& cfg);

// %.17g: enough digits that reading the text back restores the exact double.
std::string format_g17(double x);

} // namespace fput
