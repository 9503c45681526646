#include "fput/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fput {

namespace {

struct FamilyInfo {
    PotentialFamily family;
    const char* name;
    std::vector<std::string> params;
};

const std::vector<FamilyInfo>& family_table() {
    static const std::vector<FamilyInfo> table = {
        {PotentialFamily::FputAlpha, "fput_alpha", {"alpha"}},
        {PotentialFamily::FputBeta, "fput_beta", {"beta"}},
        {PotentialFamily::Harmonic, "harmonic", {}},
        {PotentialFamily::Hertz, "hertz", {"c"}},
        {PotentialFamily::Langmuir, "langmuir", {}},
        {PotentialFamily::LangmuirCubic, "langmuir_cubic", {"alpha"}},
        {PotentialFamily::LangmuirQuartic, "langmuir_quartic", {"beta"}},
        {PotentialFamily::LennardJones21, "lennard_jones_21", {"epsilon", "d"}},
        {PotentialFamily::Morse, "morse", {"gamma", "delta"}},
        {PotentialFamily::Toda, "toda", {}},
        {PotentialFamily::TodaCubic, "toda_cubic", {"alpha"}},
        {PotentialFamily::TodaQuartic, "toda_quartic", {"beta"}},
    };
    return table;
}

const FamilyInfo& info_for(PotentialFamily family) {
    for (const auto& info : family_table())
        if (info.family == family) return info;
    throw std::invalid_argument("unknown potential family enum value");
}

double& param_slot(PotentialSpec& spec, const std::string& name) {
    if (name == "alpha") return spec.alpha;
    if (name == "beta") return spec.beta;
    if (name == "c") return spec.c;
    if (name == "epsilon") return spec.epsilon;
    if (name == "d") return spec.d;
    if (name == "gamma") return spec.gamma;
    if (name == "delta") return spec.delta;
    throw std::invalid_argument("unknown potential parameter '" + name + "'");
}

double param_value(const PotentialSpec& spec, const std::string& name) {
    PotentialSpec copy = spec;
    return param_slot(copy, name);
}

[[noreturn]] void throw_bond(const PotentialSpec& spec, double x,
                             std::size_t bond, const char* what) {
    std::ostringstream msg;
    msg << family_name(spec.family) << " potential: " << what << " at bond "
        << bond << " (x = " << x << ")";
    throw std::domain_error(msg.str());
}

// Core evaluators, one per family. `bond` is the 1-based index used in
// error messages; scalar callers pass 1.
template <bool WantValue, bool WantDeriv>
void eval_one(const PotentialSpec& s, double x, std::size_t bond, double* value,
              double* deriv) {
    if (!std::isfinite(x)) throw_bond(s, x, bond, "non-finite displacement");
    double v = 0.0, dv = 0.0;
    switch (s.family) {
    case PotentialFamily::FputAlpha:
        if (WantValue) v = 0.5 * x * x + s.alpha * x * x * x / 3.0;
        if (WantDeriv) dv = x + s.alpha * x * x;
        break;
    case PotentialFamily::FputBeta:
        if (WantValue) v = 0.5 * x * x + s.beta * x * x * x * x / 4.0;
        if (WantDeriv) dv = x + s.beta * x * x * x;
        break;
    case PotentialFamily::Harmonic:
        if (WantValue) v = 0.5 * x * x;
        if (WantDeriv) dv = x;
        break;
    case PotentialFamily::Hertz:
        // One-sided contact law: only compressed bonds (x < 0) interact.
        if (x < 0.0) {
            if (WantValue) v = s.c * std::pow(-x, 2.5);
            if (WantDeriv) dv = -2.5 * s.c * std::pow(-x, 1.5);
        }
        break;
    case PotentialFamily::Langmuir:
        if (WantValue) v = std::exp(x);
        if (WantDeriv) dv = std::exp(x);
        break;
    case PotentialFamily::LangmuirCubic:
        if (WantValue) v = std::exp(x) + s.alpha * x * x * x;
        if (WantDeriv) dv = std::exp(x) + 3.0 * s.alpha * x * x;
        break;
    case PotentialFamily::LangmuirQuartic:
        if (WantValue) v = std::exp(x) + s.beta * x * x * x * x;
        if (WantDeriv) dv = std::exp(x) + 4.0 * s.beta * x * x * x;
        break;
    case PotentialFamily::LennardJones21: {
        const double den = s.d + x;
        if (den == 0.0) throw_bond(s, x, bond, "singularity at x = -d");
        const double t = -x / den; // d/(d+x) - 1
        if (WantValue) v = s.epsilon * t * t;
        if (WantDeriv) dv = -2.0 * s.epsilon * t * s.d / (den * den);
        break;
    }
    case PotentialFamily::Morse: {
        const double u = std::expm1(-s.delta * x); // e^{-delta x} - 1
        if (WantValue) v = s.gamma * u * u;
        if (WantDeriv) dv = -2.0 * s.gamma * s.delta * (u + 1.0) * u;
        break;
    }
    case PotentialFamily::Toda:
        if (WantValue) v = std::exp(-x) + x;
        if (WantDeriv) dv = -std::expm1(-x); // 1 - e^{-x}
        break;
    case PotentialFamily::TodaCubic:
        if (WantValue) v = std::exp(-x) + x + s.alpha * x * x * x;
        if (WantDeriv) dv = -std::expm1(-x) + 3.0 * s.alpha * x * x;
        break;
    case PotentialFamily::TodaQuartic:
        if (WantValue) v = std::exp(-x) + x + s.beta * x * x * x * x;
        if (WantDeriv) dv = -std::expm1(-x) + 4.0 * s.beta * x * x * x;
        break;
    }
    if (WantValue) {
        if (!std::isfinite(v)) throw_bond(s, x, bond, "non-finite value");
        *value = v;
    }
    if (WantDeriv) {
        if (!std::isfinite(dv)) throw_bond(s, x, bond, "non-finite derivative");
        *deriv = dv;
    }
}

} // namespace

PotentialSpec make_potential(PotentialFamily family,
                             const std::map<std::string, double>& params) {
    const FamilyInfo& info = info_for(family);
    PotentialSpec spec;
    spec.family = family;
    for (const auto& name : info.params) {
        auto it = params.find(name);
        if (it == params.end())
            throw std::invalid_argument(std::string(info.name) +
                                        " potential: missing parameter '" +
                                        name + "'");
        if (!std::isfinite(it->second))
            throw std::invalid_argument(std::string(info.name) +
                                        " potential: non-finite parameter '" +
                                        name + "'");
        param_slot(spec, name) = it->second;
    }
    for (const auto& [name, value] : params) {
        (void)value;
        bool applicable = false;
        for (const auto& p : info.params) applicable |= (p == name);
        if (!applicable)
            throw std::invalid_argument(std::string(info.name) +
                                        " potential: parameter '" + name +
                                        "' is not applicable");
    }
    if (family == PotentialFamily::LennardJones21 && spec.d <= 0.0)
        throw std::invalid_argument("lennard_jones_21 potential: d must be positive");
    return spec;
}

const std::string& family_name(PotentialFamily family) {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& info : family_table()) v.emplace_back(info.name);
        return v;
    }();
    return names[static_cast<std::size_t>(family)];
}

PotentialFamily parse_family(const std::string& name) {
    for (const auto& info : family_table())
        if (name == info.name) return info.family;
    throw std::invalid_argument("unknown potential family '" + name + "'");
}

const std::vector<std::string>& family_params(PotentialFamily family) {
    return info_for(family).params;
}

std::map<std::string, double> potential_params(const PotentialSpec& spec) {
    std::map<std::string, double> out;
    for (const auto& name : family_params(spec.family))
        out[name] = param_value(spec, name);
    return out;
}

PotentialEval eval_potential(const PotentialSpec& spec, double x) {
    PotentialEval e{0.0, 0.0};
    eval_one<true, true>(spec, x, 1, &e.value, &e.deriv);
    return e;
}

void bond_derivs(const PotentialSpec& spec, const double* x, double* out,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        eval_one<false, true>(spec, x[i], i + 1, nullptr, &out[i]);
}

void bond_values(const PotentialSpec& spec, const double* x, double* out,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        eval_one<true, false>(spec, x[i], i + 1, &out[i], nullptr);
}

} // namespace fput
