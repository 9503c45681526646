#include "fput/snapshot_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "fput/config.hpp"
#include "json.hpp"

namespace fput {
namespace {

using nlohmann::json;

std::string escape_json(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(ch) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                out += buf;
            } else {
                out += ch;
            }
        }
    }
    return out;
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          std::size_t byte, const std::string& what) {
    throw SnapshotFileError("snapshot file '" + path + "': line " +
                            std::to_string(line) + ", byte offset " +
                            std::to_string(byte) + ": " + what);
}

RunManifest parse_manifest(const json& j) {
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.n_particles = j.at("n_particles").get<std::size_t>();
    const json& pot = j.at("potential");
    const PotentialFamily family = parse_family(pot.at("family").get<std::string>());
    std::map<std::string, double> params;
    for (auto it = pot.begin(); it != pot.end(); ++it)
        if (it.key() != "family")
            params[it.key()] = it.value().get<double>();
    m.potential = make_potential(family, params);
    m.ic_kind = j.at("ic").get<std::string>();
    const json& integ = j.at("integrator");
    m.integrator.kind = parse_integrator(integ.at("kind").get<std::string>());
    m.integrator.rel_tol = integ.at("rel_tol").get<double>();
    m.integrator.abs_tol = integ.at("abs_tol").get<double>();
    m.integrator.dt = integ.at("dt").get<double>();
    m.integrator.t_max = j.at("t_max").get<double>();
    m.integrator.snapshot_every = j.at("snapshot_every").get<double>();
    m.initial_step = j.at("initial_step").get<double>();
    m.status = j.at("status").get<std::string>();
    if (m.status == "failed") {
        m.t_reached = j.at("t_reached").get<double>();
        m.error = j.at("error").get<std::string>();
    } else if (m.status != "ok") {
        throw std::invalid_argument("manifest status must be 'ok' or 'failed', got '" +
                                    m.status + "'");
    }
    return m;
}

LatticeState parse_record(const json& j, std::size_t n) {
    LatticeState s;
    s.t = j.at("t").get<double>();
    s.q = j.at("q").get<std::vector<double>>();
    s.p = j.at("p").get<std::vector<double>>();
    if (s.q.size() != n || s.p.size() != n)
        throw std::invalid_argument(
            "record arrays have " + std::to_string(s.q.size()) + "/" +
            std::to_string(s.p.size()) + " entries, manifest says " +
            std::to_string(n));
    return s;
}

} // namespace

std::string manifest_json(const RunManifest& m) {
    std::ostringstream out;
    out << "{\"tool\":\"" << escape_json(m.tool) << '"' //
        << ",\"version\":\"" << escape_json(m.version) << '"'
        << ",\"n_particles\":" << m.n_particles
        << ",\"potential\":{\"family\":\"" << family_name(m.potential.family) << '"';
    for (const auto& [name, value] : potential_params(m.potential))
        out << ",\"" << name << "\":" << format_g17(value);
    out << "},\"ic\":\"" << m.ic_kind << '"'
        << ",\"integrator\":{\"kind\":\"" << integrator_name(m.integrator.kind) << '"'
        << ",\"rel_tol\":" << format_g17(m.integrator.rel_tol)
        << ",\"abs_tol\":" << format_g17(m.integrator.abs_tol)
        << ",\"dt\":" << format_g17(m.integrator.dt) << '}'
        << ",\"t_max\":" << format_g17(m.integrator.t_max)
        << ",\"snapshot_every\":" << format_g17(m.integrator.snapshot_every)
        << ",\"initial_step\":" << format_g17(m.initial_step) //
        << ",\"status\":\"" << m.status << '"';
    if (m.status == "failed")
        out << ",\"t_reached\":" << format_g17(m.t_reached) //
            << ",\"error\":\"" << escape_json(m.error) << '"';
    out << '}';
    return out.str();
}

void write_snapshot_file(const std::string& path, const RunManifest& manifest,
                         const std::vector<LatticeState>& states) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw SnapshotFileError("cannot open '" + path + "' for writing");
    out << manifest_json(manifest) << '\n';
    std::string line;
    for (const LatticeState& s : states) {
        if (s.q.size() != manifest.n_particles || s.p.size() != manifest.n_particles)
            throw SnapshotFileError("state at t = " + format_g17(s.t) + " has " +
                                    std::to_string(s.q.size()) +
                                    " sites, manifest says " +
                                    std::to_string(manifest.n_particles));
        line.clear();
        line += "{\"t\":";
        line += format_g17(s.t);
        line += ",\"q\":[";
        for (std::size_t i = 0; i < s.q.size(); ++i) {
            if (i)
                line += ',';
            line += format_g17(s.q[i]);
        }
        line += "],\"p\":[";
        for (std::size_t i = 0; i < s.p.size(); ++i) {
            if (i)
                line += ',';
            line += format_g17(s.p[i]);
        }
        line += "]}\n";
        out << line;
    }
    out.flush();
    if (!out)
        throw SnapshotFileError("write failed for '" + path + "'");
}

LoadedRun read_snapshot_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw SnapshotFileError("cannot open snapshot file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());

    LoadedRun run;
    bool have_manifest = false;
    std::size_t pos = 0, lineno = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::size_t end = (nl == std::string::npos) ? text.size() : nl;
        ++lineno;
        std::string_view line(text.data() + pos, end - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (!line.empty()) {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                fail_at(path, lineno, pos + (e.byte > 0 ? e.byte - 1 : 0), e.what());
            }
            try {
                if (!have_manifest) {
                    run.manifest = parse_manifest(j);
                    have_manifest = true;
                    run.series.potential = run.manifest.potential;
                    run.series.ic_kind = run.manifest.ic_kind;
                    run.series.integrator = run.manifest.integrator;
                    run.series.initial_step = run.manifest.initial_step;
                } else {
                    run.series.states.push_back(
                        parse_record(j, run.manifest.n_particles));
                }
            } catch (const std::exception& e) {
                fail_at(path, lineno, pos, e.what());
            }
        }
        pos = (nl == std::string::npos) ? text.size() : nl + 1;
    }
    if (!have_manifest)
        throw SnapshotFileError("snapshot file '" + path +
                                "': empty, expected a manifest line");
    return run;
}

} // namespace fput
