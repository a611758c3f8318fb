#ifndef KBWAVE_IO_HPP
#define KBWAVE_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "kbwave/evolution.hpp"
#include "kbwave/oracle.hpp"
#include "kbwave/solutions.hpp"

namespace kbwave {

inline std::string format17(double v)
{
    if (v == 0.0) return "0"; // no "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string profile_csv(const Profile& p)
{
    p.validate();
    std::string out = "xi,f,f_prime,g\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out += format17(p.xi[i]);
        out += ',';
        out += format17(p.f[i]);
        out += ',';
        out += i < p.f_prime.size() ? format17(p.f_prime[i]) : std::string();
        out += ',';
        out += i < p.g.size() ? format17(p.g[i]) : std::string();
        out += '\n';
    }
    return out;
}

inline std::string state_csv(const EvolutionState& s)
{
    std::string out = "x,u,v\n";
    for (std::size_t j = 0; j < s.n(); ++j) out += format17(s.x(j)) + ',' + format17(s.u[j]) + ',' + format17(s.v[j]) + '\n';
    return out;
}

/// Writes to a sibling temp file, then renames over the target.
inline void atomic_write(const std::filesystem::path& target, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    if (!dir.empty()) fs::create_directories(dir);
    std::random_device rd;
    const fs::path tmp = dir / ("." + target.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorKind::invalid_argument, "cannot open " + tmp.string());
        os.write(content.data(), std::streamsize(content.size()));
        os.flush();
        if (!os) {
            os.close();
            fs::remove(tmp);
            throw Error(ErrorKind::invalid_argument, "write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::invalid_argument, "rename to " + target.string() + " failed: " + ec.message());
    }
}

inline nlohmann::json to_json(const DerivedCoefficients& c)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : c.populated()) j[name] = v;
    return j;
}

inline nlohmann::json to_json(const RootMultiset& r)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : r.entries()) j.push_back({{"value", e.value}, {"multiplicity", e.multiplicity}});
    return j;
}

inline nlohmann::json to_json(const Params& p) { return {{"c", p.c}, {"d1", p.d1}, {"d2", p.d2}, {"d3", p.d3}}; }

inline nlohmann::json solution_json(const ClosedFormSolution& s)
{
    nlohmann::json j;
    j["kind"] = std::string(to_string(s.kind()));
    j["roots"] = to_json(s.roots());
    j["params"] = to_json(s.params());
    j["xi0"] = s.xi0();
    j["branch"] = std::string(to_string(s.branch()));
    j["sign"] = s.sign();
    j["speed"] = s.speed();
    j["global"] = s.global();
    j["modulus"] = s.modulus() ? nlohmann::json(s.modulus()->k()) : nlohmann::json(nullptr);
    j["period"] = s.period() ? nlohmann::json(*s.period()) : nlohmann::json(nullptr);
    j["decay_rate"] = s.decay_rate() ? nlohmann::json(*s.decay_rate()) : nlohmann::json(nullptr);
    j["coefficients"] = to_json(s.coeffs());
    j["notes"] = nlohmann::json::array();
    for (const auto& n : s.notes()) j["notes"].push_back({{"code", n.code}, {"detail", n.detail}});
    return j;
}

} // namespace kbwave

#endif
