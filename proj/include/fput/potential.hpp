#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fput {

// Nearest-neighbor interaction potentials V(x), x = q_{n+1} - q_n.
enum class PotentialFamily {
    FputAlpha,       // V(x) = x^2/2 + alpha*x^3/3
    FputBeta,        // V(x) = x^2/2 + beta*x^4/4
    Harmonic,        // V(x) = x^2/2
    Hertz,           // V(x) = c*|x|^{5/2} for x<0, 0 for x>=0
    Langmuir,        // V(x) = e^x
    LangmuirCubic,   // V(x) = e^x + alpha*x^3
    LangmuirQuartic, // V(x) = e^x + beta*x^4
    LennardJones21,  // V(x) = epsilon*[(d/(d+x)) - 1]^2
    Morse,           // V(x) = gamma*(e^{-delta*x} - 1)^2
    Toda,            // V(x) = e^{-x} + x
    TodaCubic,       // V(x) = e^{-x} + x + alpha*x^3
    TodaQuartic,     // V(x) = e^{-x} + x + beta*x^4
};

// Validated family + parameter bundle. Only the fields applicable to the
// family are meaningful; construction through make_potential rejects
// missing or extraneous parameters.
struct PotentialSpec {
    PotentialFamily family = PotentialFamily::Harmonic;
    double alpha = 0.0;
    double beta = 0.0;
    double c = 0.0;
    double epsilon = 0.0;
    double d = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
};

PotentialSpec make_potential(PotentialFamily family,
                             const std::map<std::string, double>& params = {});

const std::string& family_name(PotentialFamily family);
PotentialFamily parse_family(const std::string& name);

// Parameter names applicable to a family, in canonical order.
const std::vector<std::string>& family_params(PotentialFamily family);

// Parameters of a spec as a name -> value map (canonical order).
std::map<std::string, double> potential_params(const PotentialSpec& spec);

struct PotentialEval {
    double value;
    double deriv;
};

// V(x) and V'(x) at a single displacement. Throws std::domain_error on
// non-finite x, on the LennardJones21 pole x = -d, and on overflow.
PotentialEval eval_potential(const PotentialSpec& spec, double x);

// Batched V'(x_i); errors name the offending bond (1-based).
void bond_derivs(const PotentialSpec& spec, const double* x, double* out,
                 std::size_t n);

// Batched V(x_i); errors name the offending bond (1-based).
void bond_values(const PotentialSpec& spec, const double* x, double* out,
                 std::size_t n);

} // namespace fput
