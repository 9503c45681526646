#include "fput/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fput {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

struct RawEntry {
    std::string key;
    std::string value;
    std::string where; // "file.cfg line 3" or "command line (--set)"
};

[[noreturn]] void fail(const std::string& msg, const std::string& where) {
    throw ConfigError(msg + " (" + where + ")");
}

double parse_double(const std::string& key, const std::string& value,
                    const std::string& where) {
    const std::string v = trim(value);
    if (v.empty())
        fail("empty value for key '" + key + "'", where);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        fail("key '" + key + "': cannot parse '" + v + "' as a number", where);
    if (!std::isfinite(x))
        fail("key '" + key + "': value must be finite", where);
    return x;
}

std::size_t parse_size(const std::string& key, const std::string& value,
                       const std::string& where) {
    const std::string v = trim(value);
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || x < 0)
        fail("key '" + key + "': cannot parse '" + v +
                 "' as a non-negative integer",
             where);
    return static_cast<std::size_t>(x);
}

std::vector<double> parse_time_list(const std::string& key, const std::string& value,
                                    const std::string& where) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            fail("key '" + key + "': empty entry in list", where);
        out.push_back(parse_double(key, item, where));
    }
    return out;
}

const std::set<std::string>& scalar_param_keys() {
    static const std::set<std::string> keys = {
        "potential.alpha", "potential.beta",  "potential.c", "potential.epsilon",
        "potential.d",     "potential.gamma", "potential.delta"};
    return keys;
}

RunConfig build(const std::vector<RawEntry>& entries) {
    RunConfig cfg;
    std::string family_raw, family_where;
    std::string ic_raw, ic_where;
    std::map<std::string, double> params; // bare parameter name -> value
    std::map<std::string, std::string> param_where;
    std::string tmax_where = "defaults", every_where = "defaults",
                dt_where = "defaults", n_where = "defaults",
                trim_where = "defaults", times_where = "defaults";

    for (const RawEntry& e : entries) {
        const std::string& k = e.key;
        if (k == "n_particles") {
            cfg.n_particles = parse_size(k, e.value, e.where);
            n_where = e.where;
        } else if (k == "potential.family") {
            family_raw = trim(e.value);
            family_where = e.where;
        } else if (scalar_param_keys().count(k)) {
            params[k.substr(std::string("potential.").size())] =
                parse_double(k, e.value, e.where);
            param_where[k] = e.where;
        } else if (k == "ic") {
            ic_raw = trim(e.value);
            ic_where = e.where;
        } else if (k == "integrator.kind") {
            try {
                cfg.integrator.kind = parse_integrator(trim(e.value));
            } catch (const std::invalid_argument& ex) {
                fail(std::string("key 'integrator.kind': ") + ex.what(), e.where);
            }
        } else if (k == "integrator.rel_tol") {
            cfg.integrator.rel_tol = parse_double(k, e.value, e.where);
            if (cfg.integrator.rel_tol <= 0.0)
                fail("key 'integrator.rel_tol': must be positive", e.where);
        } else if (k == "integrator.abs_tol") {
            cfg.integrator.abs_tol = parse_double(k, e.value, e.where);
            if (cfg.integrator.abs_tol <= 0.0)
                fail("key 'integrator.abs_tol': must be positive", e.where);
        } else if (k == "integrator.dt") {
            cfg.integrator.dt = parse_double(k, e.value, e.where);
            dt_where = e.where;
            if (cfg.integrator.dt <= 0.0)
                fail("key 'integrator.dt': must be positive", e.where);
        } else if (k == "t_max") {
            cfg.integrator.t_max = parse_double(k, e.value, e.where);
            tmax_where = e.where;
            if (cfg.integrator.t_max < 0.0)
                fail("key 't_max': must be non-negative", e.where);
        } else if (k == "snapshot_every") {
            cfg.integrator.snapshot_every = parse_double(k, e.value, e.where);
            every_where = e.where;
            if (cfg.integrator.snapshot_every <= 0.0)
                fail("key 'snapshot_every': must be positive", e.where);
        } else if (k == "output_dir") {
            cfg.output_dir = trim(e.value);
            if (cfg.output_dir.empty())
                fail("key 'output_dir': must not be empty", e.where);
        } else if (k == "plot.trim_edges") {
            cfg.plot.trim_edges = parse_size(k, e.value, e.where);
            trim_where = e.where;
        } else if (k == "plot.times") {
            cfg.plot.times = parse_time_list(k, e.value, e.where);
            times_where = e.where;
        } else {
            fail("unknown key '" + k + "'", e.where);
        }
    }

    if (family_raw.empty())
        throw ConfigError("missing required key 'potential.family'");
    if (ic_raw.empty())
        throw ConfigError("missing required key 'ic'");

    PotentialFamily family;
    try {
        family = parse_family(family_raw);
    } catch (const std::invalid_argument& ex) {
        fail(std::string("key 'potential.family': ") + ex.what(), family_where);
    }
    // pre-validate the parameter set so errors name config keys
    const std::vector<std::string>& wanted = family_params(family);
    for (const std::string& name : wanted)
        if (!params.count(name))
            fail("missing key 'potential." + name + "' required by family '" +
                     family_name(family) + "'",
                 family_where);
    for (const auto& [name, value] : params) {
        (void)value;
        if (std::find(wanted.begin(), wanted.end(), name) == wanted.end())
            fail("key 'potential." + name + "' is not a parameter of family '" +
                     family_name(family) + "'",
                 param_where.at("potential." + name));
    }
    cfg.potential = make_potential(family, params);

    try {
        cfg.ic = parse_ic(ic_raw);
    } catch (const std::invalid_argument& ex) {
        fail(std::string("key 'ic': ") + ex.what(), ic_where);
    }

    if (cfg.n_particles == 0 || cfg.n_particles % 2 != 0)
        fail("key 'n_particles': must be a positive even integer (got " +
                 std::to_string(cfg.n_particles) + ")",
             n_where);
    if (cfg.n_particles < 8)
        fail("key 'n_particles': need at least 8 sites", n_where);

    if (cfg.integrator.kind != IntegratorKind::AdaptiveRK45) {
        if (cfg.integrator.dt > cfg.integrator.snapshot_every)
            fail("key 'integrator.dt': must not exceed snapshot_every", dt_where);
        const double ratio = cfg.integrator.snapshot_every / cfg.integrator.dt;
        if (std::fabs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
            fail("key 'integrator.dt': must divide snapshot_every", dt_where);
    }

    if (2 * cfg.plot.trim_edges >= cfg.n_particles)
        fail("key 'plot.trim_edges': trimming removes every site", trim_where);
    for (double t : cfg.plot.times) {
        const double every = cfg.integrator.snapshot_every;
        const double j = std::round(t / every);
        const bool on_grid = t >= 0.0 &&
                             std::fabs(t - j * every) <= 1e-9 * std::max(1.0, t) &&
                             t <= cfg.integrator.t_max + 1e-9;
        if (!on_grid)
            fail("key 'plot.times': " + format_g17(t) +
                     " is not on the snapshot grid",
                 times_where);
    }
    return cfg;
}

std::vector<RawEntry> tokenize(const std::string& text, const std::string& origin) {
    std::vector<RawEntry> out;
    std::map<std::string, int> seen; // key -> line
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#')
            continue;
        const std::string where = origin + " line " + std::to_string(lineno);
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            fail("expected 'key = value', got '" + stripped + "'", where);
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            fail("missing key before '='", where);
        auto [it, fresh] = seen.emplace(key, lineno);
        if (!fresh)
            fail("duplicate key '" + key + "' (first at line " +
                     std::to_string(it->second) + ")",
                 where);
        out.push_back({key, value, where});
    }
    return out;
}

} // namespace

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            const std::vector<std::string>& overrides) {
    std::vector<RawEntry> entries = tokenize(text, origin);
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + ov + "' is not of the form key=value");
        const std::string key = trim(ov.substr(0, eq));
        const std::string value = trim(ov.substr(eq + 1));
        if (key.empty())
            throw ConfigError("override '" + ov + "' is missing a key");
        bool replaced = false;
        for (RawEntry& e : entries) {
            if (e.key == key) {
                e.value = value;
                e.where = "command line (--set " + key + ")";
                replaced = true;
                break;
            }
        }
        if (!replaced)
            entries.push_back({key, value, "command line (--set " + key + ")"});
    }
    return build(entries);
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path, overrides);
}

std::string write_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "n_particles = " << cfg.n_particles << "\n";
    out << "potential.family = " << family_name(cfg.potential.family) << "\n";
    for (const auto& [name, value] : potential_params(cfg.potential))
        out << "potential." << name << " = " << format_g17(value) << "\n";
    out << "ic = " << ic_name(cfg.ic) << "\n";
    out << "integrator.kind = " << integrator_name(cfg.integrator.kind) << "\n";
    out << "integrator.rel_tol = " << format_g17(cfg.integrator.rel_tol) << "\n";
    out << "integrator.abs_tol = " << format_g17(cfg.integrator.abs_tol) << "\n";
    out << "integrator.dt = " << format_g17(cfg.integrator.dt) << "\n";
    out << "t_max = " << format_g17(cfg.integrator.t_max) << "\n";
    out << "snapshot_every = " << format_g17(cfg.integrator.snapshot_every) << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";
    out << "plot.trim_edges = " << cfg.plot.trim_edges << "\n";
    if (!cfg.plot.times.empty()) {
        out << "plot.times = ";
        for (std::size_t i = 0; i < cfg.plot.times.size(); ++i)
            out << (i ? ", " : "") << format_g17(cfg.plot.times[i]);
        out << "\n";
    }
    return out.str();
}

} // namespace fput
