#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kbwave/kbwave.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kbwave;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;
constexpr int exit_gate = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JobConfig {
    std::optional<std::vector<double>> params;
    std::optional<std::vector<double>> roots;
    std::string kind = "auto";
    std::string branch = "upper";
    int initial_index = 1;
    std::optional<std::vector<double>> domain;
    std::optional<int> n;
    std::optional<double> xi0;
    std::string format = "csv";
    std::optional<std::string> out;
    std::optional<std::string> preset;
    bool verify_pde = true;
    bool verify_oracle = true;
    // oracle
    std::optional<double> f0;
    int sign = -1;
    double h = 1e-4;
    // evolution
    double L = 40.0 * std::numbers::pi;
    std::optional<double> dt;
    double T = 1.0;
    // reduce
    int ell = 4;
    std::optional<int> ell_max;
};

// ---------------------------------------------------------------------------
// parsing helpers

double parse_number(const std::string& tok, const std::string& field)
{
    std::string t = tok;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char ch) { return std::isspace(ch); }), t.end());
    try {
        std::size_t pos = 0;
        const auto slash = t.find('/');
        if (slash != std::string::npos) {
            const double num = std::stod(t.substr(0, slash), &pos);
            if (pos != slash) throw std::invalid_argument(t);
            const std::string den_s = t.substr(slash + 1);
            const double den = std::stod(den_s, &pos);
            if (pos != den_s.size() || den == 0.0) throw std::invalid_argument(t);
            return num / den;
        }
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError(field + ": cannot parse '" + tok + "' as a number");
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& field)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_number(tok, field));
    if (out.empty()) throw UsageError(field + ": empty list");
    return out;
}

std::vector<double> json_list(const json& j, const std::string& field)
{
    if (j.is_string()) return parse_list(j.get<std::string>(), field);
    if (!j.is_array()) throw UsageError("field '" + field + "': expected an array of numbers or a comma list");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (e.is_number()) out.push_back(e.get<double>());
        else if (e.is_string()) out.push_back(parse_number(e.get<std::string>(), field + "[" + std::to_string(i) + "]"));
        else throw UsageError("field '" + field + "[" + std::to_string(i) + "]': expected a number");
    }
    return out;
}

std::string line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line, col = 1;
        else ++col;
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <class T>
T json_get(const json& j, const char* field, const char* expected)
{
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("field '") + field + "': expected " + expected);
    }
}

void load_config(const std::string& path, JobConfig& cfg)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UsageError("config: cannot open " + path);
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path + ": malformed JSON at " + line_col(text, e.byte));
    }
    if (!j.is_object()) throw UsageError("config " + path + ": top level must be an object");
    static const std::vector<std::string> known{"params", "roots", "kind",   "branch", "initial_index", "domain",
                                                "n",      "xi0",   "format", "out",    "preset",        "verify",
                                                "f0",     "sign",  "h",      "evolution", "ell",        "ell_max"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw UsageError("config " + path + ": unknown field '" + key + "'");

    if (j.contains("params")) {
        const auto& p = j["params"];
        if (p.is_object()) {
            std::vector<double> v;
            for (const char* k : {"c", "d1", "d2", "d3"}) {
                if (!p.contains(k)) throw UsageError(std::string("field 'params.") + k + "': missing");
                v.push_back(json_list(json::array({p[k]}), std::string("params.") + k)[0]);
            }
            cfg.params = v;
        } else {
            cfg.params = json_list(p, "params");
        }
    }
    if (j.contains("roots")) cfg.roots = json_list(j["roots"], "roots");
    if (j.contains("kind")) cfg.kind = json_get<std::string>(j, "kind", "a string");
    if (j.contains("branch")) cfg.branch = json_get<std::string>(j, "branch", "\"upper\" or \"lower\"");
    if (j.contains("initial_index")) cfg.initial_index = json_get<int>(j, "initial_index", "an integer 1..4");
    if (j.contains("domain")) cfg.domain = json_list(j["domain"], "domain");
    if (j.contains("n")) {
        if (!j["n"].is_number_integer()) throw UsageError("field 'n': expected an integer");
        cfg.n = j["n"].get<int>();
    }
    if (j.contains("xi0")) cfg.xi0 = json_get<double>(j, "xi0", "a number");
    if (j.contains("format")) cfg.format = json_get<std::string>(j, "format", "\"csv\" or \"json\"");
    if (j.contains("out")) cfg.out = json_get<std::string>(j, "out", "a path");
    if (j.contains("preset")) cfg.preset = json_get<std::string>(j, "preset", "a preset name");
    if (j.contains("verify")) {
        const auto& v = j["verify"];
        if (!v.is_object()) throw UsageError("field 'verify': expected an object");
        if (v.contains("pde")) cfg.verify_pde = json_get<bool>(v, "pde", "a boolean");
        if (v.contains("oracle")) cfg.verify_oracle = json_get<bool>(v, "oracle", "a boolean");
    }
    if (j.contains("f0")) cfg.f0 = json_get<double>(j, "f0", "a number");
    if (j.contains("sign")) cfg.sign = json_get<int>(j, "sign", "+1 or -1");
    if (j.contains("h")) cfg.h = json_get<double>(j, "h", "a number");
    if (j.contains("evolution")) {
        const auto& e = j["evolution"];
        if (!e.is_object()) throw UsageError("field 'evolution': expected an object");
        if (e.contains("L")) cfg.L = json_get<double>(e, "L", "a number");
        if (e.contains("n")) {
            if (!e["n"].is_number_integer()) throw UsageError("field 'evolution.n': expected an integer");
            cfg.n = e["n"].get<int>();
        }
        if (e.contains("dt")) cfg.dt = json_get<double>(e, "dt", "a number");
        if (e.contains("T")) cfg.T = json_get<double>(e, "T", "a number");
    }
    if (j.contains("ell")) cfg.ell = json_get<int>(j, "ell", "an integer >= 2");
    if (j.contains("ell_max")) cfg.ell_max = json_get<int>(j, "ell_max", "an integer >= 4");
}

void check_config(const JobConfig& cfg)
{
    if (cfg.params && cfg.params->size() != 4) throw UsageError("params: expected 4 values c,d1,d2,d3");
    if (cfg.roots && (cfg.roots->size() < 2 || cfg.roots->size() > 4))
        throw UsageError("roots: expected 2 to 4 values");
    if (cfg.n && *cfg.n < 2) throw UsageError("n: sample count must be >= 2");
    if (cfg.domain && (cfg.domain->size() != 2 || !((*cfg.domain)[0] < (*cfg.domain)[1])))
        throw UsageError("domain: expected a,b with a < b");
    if (cfg.format != "csv" && cfg.format != "json") throw UsageError("format: expected csv or json");
    if (cfg.branch != "upper" && cfg.branch != "lower") throw UsageError("branch: expected upper or lower");
    if (cfg.sign != 1 && cfg.sign != -1) throw UsageError("sign: expected +1 or -1");
    if (!(cfg.h > 0.0)) throw UsageError("h: must be positive");
}

double gate_tolerance()
{
    const char* env = std::getenv("KBWAVE_TOL");
    if (!env || !*env) return 1e-8;
    const double v = parse_number(env, "KBWAVE_TOL");
    if (!(v > 0.0)) throw UsageError("KBWAVE_TOL: must be positive");
    return v;
}

Branch branch_of(const JobConfig& cfg) { return cfg.branch == "lower" ? Branch::lower : Branch::upper; }

std::string fmt_params(const Params& p)
{
    return "c=" + format17(p.c) + ", d1=" + format17(p.d1) + ", d2=" + format17(p.d2) + ", d3=" + format17(p.d3);
}

std::string fmt_roots(const RootMultiset& r)
{
    std::string s;
    for (const auto& e : r.entries())
        s += (s.empty() ? "" : ", ") + format17(e.value) + " (x" + std::to_string(e.multiplicity) + ")";
    return s.empty() ? "none" : s;
}

// ---------------------------------------------------------------------------
// problem resolution

struct Problem {
    std::optional<Params> params;       // user-supplied or implied
    std::optional<RootMultiset> roots;  // full multiset when known
    std::vector<double> labels;         // raw --roots values in given order
};

Problem resolve_problem(const JobConfig& cfg)
{
    Problem pr;
    if (!cfg.params && !cfg.roots) throw UsageError("need --params or --roots (or --preset)");
    if (cfg.params) {
        const auto& v = *cfg.params;
        pr.params = Params{v[0], v[1], v[2], v[3]};
        pr.roots = roots_of_F(*pr.params);
    }
    if (cfg.roots) {
        pr.labels = *cfg.roots;
        if (cfg.roots->size() == 4) {
            const RootMultiset r = detail::cluster_values(*cfg.roots);
            const Params implied = params_from_roots(r);
            if (pr.params) {
                const Params& p = *pr.params;
                const double sc = r.scale();
                const bool ok = std::abs(p.c - implied.c) <= 1e-9 * sc &&
                                std::abs(p.d1 - implied.d1) <= 1e-9 * sc * sc &&
                                std::abs(p.d2 - implied.d2) <= 1e-9 * sc * sc * sc &&
                                std::abs(p.d3 - implied.d3) <= 1e-9 * sc * sc * sc * sc;
                if (!ok)
                    throw UsageError("roots do not match params.\n  roots imply " + fmt_params(implied) +
                                     "\n  params have real zeros " + fmt_roots(*pr.roots) +
                                     "\n  hint: keep exactly one of params/roots, or replace params with the implied values");
            }
            pr.params = implied;
            pr.roots = r;
        } else if (pr.params) {
            for (double x : pr.labels)
                if (std::abs(eval_F(*pr.params, x)) > 1e-9 * std::pow(std::max(1.0, std::abs(x)), 4))
                    throw UsageError("root " + format17(x) + " is not a zero of F for " + fmt_params(*pr.params) +
                                     "\n  hint: real zeros of these params are " + fmt_roots(*pr.roots));
        }
    }
    return pr;
}

const std::vector<std::string>& kind_names()
{
    static const std::vector<std::string> k{
        "solitary_double", "periodic_trig", "solitary_triple", "limit_a",      "limit_b",      "limit_c",
        "limit_d",         "case1_cn",      "case1_dn",        "case2_sn",     "case2_cn",     "case2_dn",
        "case2_inv_sn",    "case2_inv_cn",  "case2_tn",        "case2_dn_tn",  "general_sn2"};
    return k;
}

std::vector<double> expanded_roots(const Problem& pr, const std::string& kind)
{
    if (pr.labels.size() == 4) {
        auto v = pr.labels;
        std::sort(v.begin(), v.end());
        return v;
    }
    if (!pr.roots || pr.roots->total_multiplicity() != 4)
        throw Error(ErrorKind::invalid_argument, kind + " needs four real zeros (with multiplicity)");
    return pr.roots->expanded();
}

// three labels (f1, f2, f3) taken verbatim, or every assignment from four zeros
// consistent with the family's root relation
std::vector<std::array<double, 3>> triples_for(const Problem& pr, const std::string& kind)
{
    if (pr.labels.size() == 3) return {{pr.labels[0], pr.labels[1], pr.labels[2]}};
    const auto v = expanded_roots(pr, kind);
    const double sc = std::max({1.0, std::abs(v.front()), std::abs(v.back())});
    std::vector<std::array<double, 3>> out;
    for (int i = 0; i < 4; ++i) {
        std::vector<double> rest;
        for (int j = 0; j < 4; ++j)
            if (j != i) rest.push_back(v[j]);
        if (kind.rfind("case1", 0) == 0) {
            if (std::abs(rest[0] + rest[2] - rest[1] - v[i]) <= 1e-9 * sc) out.push_back({rest[0], rest[1], rest[2]});
            continue;
        }
        std::sort(rest.begin(), rest.end());
        do {
            const double D = rest[1] * rest[2] + rest[0] * rest[1] - rest[0] * rest[2];
            if (D == 0.0) continue;
            if (std::abs(rest[0] * rest[1] * rest[2] / D - v[i]) <= 1e-9 * sc)
                out.push_back({rest[0], rest[1], rest[2]});
        } while (std::next_permutation(rest.begin(), rest.end()));
    }
    if (out.empty()) throw Error(ErrorKind::branch_infeasible, "no assignment of the zeros satisfies the " + kind + " root relation");
    return out;
}

ClosedFormSolution build_kind_raw(const std::string& kind, const Problem& pr, const JobConfig& cfg, double xi0)
{
    const Branch br = branch_of(cfg);
    if (kind == "solitary_double" || kind.rfind("limit_", 0) == 0) {
        double f1, f2, f3;
        if (pr.labels.size() == 3) f1 = pr.labels[0], f2 = pr.labels[1], f3 = pr.labels[2];
        else {
            const auto v = expanded_roots(pr, kind);
            if (kind == "limit_d") {
                if (std::abs(v[0] - v[2]) <= 1e-9 * std::max(1.0, std::abs(v[0]))) f1 = v[0], f2 = v[0], f3 = v[3];
                else f1 = v[0], f2 = v[3], f3 = v[3];
            } else {
                f1 = v[0], f2 = v[1], f3 = v[3];
            }
        }
        if (kind == "solitary_double") return solitary_double(f1, f2, f3, br, xi0);
        const LimitCase lc = kind == "limit_a" ? LimitCase::a
                             : kind == "limit_b" ? LimitCase::b
                             : kind == "limit_c" ? LimitCase::c
                                                 : LimitCase::d;
        return limiting_form(lc, f1, f2, f3, br, xi0);
    }
    if (kind == "periodic_trig") {
        const int sign = br == Branch::upper ? 1 : -1;
        if (pr.labels.size() == 3) return periodic_trig(pr.labels[0], pr.labels[1], pr.labels[2], sign, xi0);
        const RootMultiset r = detail::cluster_values(expanded_roots(pr, kind));
        const CaseTag t = classify(r);
        const auto& e = r.entries();
        if (t == CaseTag::DoubleBelowSimples) return periodic_trig(e[1].value, e[2].value, e[0].value, sign, xi0);
        if (t == CaseTag::DoubleAboveSimples) return periodic_trig(e[0].value, e[1].value, e[2].value, sign, xi0);
        throw Error(ErrorKind::not_periodic_configuration, "zeros are " + std::string(to_string(t)));
    }
    if (kind == "solitary_triple") {
        if (pr.labels.size() == 2) return solitary_triple(pr.labels[0], pr.labels[1], xi0);
        const RootMultiset r = detail::cluster_values(expanded_roots(pr, kind));
        const auto& e = r.entries();
        const CaseTag t = classify(r);
        if (t == CaseTag::TripleWithSimpleAbove) return solitary_triple(e[0].value, e[1].value, xi0);
        if (t == CaseTag::TripleWithSimpleBelow) return solitary_triple(e[1].value, e[0].value, xi0);
        throw Error(ErrorKind::not_solitary_configuration, "zeros are " + std::string(to_string(t)));
    }
    if (kind == "case1_cn" || kind == "case1_dn") {
        std::string last;
        for (const auto& t : triples_for(pr, kind)) {
            try {
                return case1(kind == "case1_cn" ? Case1Kind::cn : Case1Kind::dn, t[0], t[1], t[2], br, xi0);
            } catch (const Error& e) {
                last = e.detail();
            }
        }
        throw Error(ErrorKind::branch_infeasible, last);
    }
    if (kind.rfind("case2_", 0) == 0) {
        static const std::vector<std::pair<std::string, Case2Kind>> map{
            {"case2_sn", Case2Kind::sn},         {"case2_cn", Case2Kind::cn},         {"case2_dn", Case2Kind::dn},
            {"case2_inv_sn", Case2Kind::inv_sn}, {"case2_inv_cn", Case2Kind::inv_cn}, {"case2_tn", Case2Kind::tn},
            {"case2_dn_tn", Case2Kind::dn_tn}};
        const auto it = std::find_if(map.begin(), map.end(), [&](const auto& m) { return m.first == kind; });
        if (it == map.end()) throw UsageError("unknown kind '" + kind + "'");
        std::string last;
        for (const auto& t : triples_for(pr, kind)) {
            auto r = case2(it->second, t[0], t[1], t[2], xi0);
            if (auto* s = std::get_if<ClosedFormSolution>(&r)) return *s;
            last = std::get<Infeasible>(r).reason;
        }
        throw Error(ErrorKind::branch_infeasible, last);
    }
    if (kind == "general_sn2") {
        const auto v = expanded_roots(pr, kind);
        return general_sn2({v[0], v[1], v[2], v[3]}, cfg.initial_index, xi0);
    }
    throw UsageError("unknown kind '" + kind + "' (known: auto, " + [] {
        std::string s;
        for (const auto& k : kind_names()) s += (s.empty() ? "" : ", ") + k;
        return s;
    }() + ")");
}

// the built profile must solve the problem's quartic, not a neighbour sharing some zeros
ClosedFormSolution build_kind(const std::string& kind, const Problem& pr, const JobConfig& cfg, double xi0)
{
    ClosedFormSolution s = build_kind_raw(kind, pr, cfg, xi0);
    if (pr.labels.size() == 3 || !pr.params) return s;
    const Params a = *pr.params, b = s.params();
    const double sc = std::max(1.0, s.scale());
    const bool same = std::abs(a.c - b.c) <= 1e-8 * sc && std::abs(a.d1 - b.d1) <= 1e-8 * sc * sc &&
                      std::abs(a.d2 - b.d2) <= 1e-8 * sc * sc * sc && std::abs(a.d3 - b.d3) <= 1e-8 * sc * sc * sc * sc;
    if (!same)
        throw Error(ErrorKind::branch_infeasible,
                    kind + " needs a different zero pattern (it would solve c=" + format17(b.c) + ", d1=" +
                        format17(b.d1) + ", d2=" + format17(b.d2) + ", d3=" + format17(b.d3) + ")");
    return s;
}

ClosedFormSolution build_auto(const Problem& pr, const JobConfig& cfg, double xi0)
{
    if (!pr.roots) throw Error(ErrorKind::invalid_argument, "kind auto needs params or four roots");
    const RootMultiset& r = *pr.roots;
    const CaseTag t = classify(r);
    const auto& e = r.entries();
    const Branch br = branch_of(cfg);
    switch (t) {
    case CaseTag::DoubleBetweenSimples: return solitary_double(e[0].value, e[1].value, e[2].value, br, xi0);
    case CaseTag::DoubleBelowSimples:
        return periodic_trig(e[1].value, e[2].value, e[0].value, br == Branch::upper ? 1 : -1, xi0);
    case CaseTag::DoubleAboveSimples:
        return periodic_trig(e[0].value, e[1].value, e[2].value, br == Branch::upper ? 1 : -1, xi0);
    case CaseTag::TripleWithSimpleAbove: return solitary_triple(e[0].value, e[1].value, xi0);
    case CaseTag::TripleWithSimpleBelow: return solitary_triple(e[1].value, e[0].value, xi0);
    case CaseTag::FourSimple:
        return general_sn2({e[0].value, e[1].value, e[2].value, e[3].value}, cfg.initial_index, xi0);
    case CaseTag::TwoSimpleOnly:
        throw Error(ErrorKind::no_real_orbit,
                    "TwoSimpleOnly: no closed form is constructed for this case; integrate the orbit with "
                    "`kbwave oracle --f0 " + format17(e[1].value) + " ...`");
    default:
        throw Error(ErrorKind::no_real_orbit, std::string(to_string(t)) + ": " + std::string(verdict_phrase(t)));
    }
}

std::vector<std::string> feasible_kinds(const Problem& pr, const JobConfig& cfg, double xi0)
{
    std::vector<std::string> ok;
    for (const auto& k : kind_names()) {
        try {
            build_kind(k, pr, cfg, xi0);
            ok.push_back(k);
        } catch (const std::exception&) {
        }
    }
    return ok;
}

struct Built {
    ClosedFormSolution s;
    Params p; // params the gates run against
    std::string label;
};

const FigurePreset& preset_or_usage(const std::string& name)
{
    try {
        return find_preset(name);
    } catch (const Error& e) {
        throw UsageError(e.detail());
    }
}

Built build_solution(const JobConfig& cfg)
{
    if (cfg.preset) {
        if (cfg.params || cfg.roots) throw UsageError("--preset cannot be combined with --params/--roots");
        if (cfg.kind != "auto") throw UsageError("--preset fixes the kind; drop --kind");
        const auto& fp = preset_or_usage(*cfg.preset);
        ClosedFormSolution s = fp.build();
        if (cfg.xi0) s = s.with_xi0(*cfg.xi0);
        return {s, s.params(), fp.name};
    }
    const Problem pr = resolve_problem(cfg);
    const double xi0 = cfg.xi0.value_or(0.0);
    if (cfg.kind == "auto") {
        ClosedFormSolution s = build_auto(pr, cfg, xi0);
        return {s, pr.params.value_or(s.params()), "auto"};
    }
    try {
        ClosedFormSolution s = build_kind(cfg.kind, pr, cfg, xi0);
        return {s, pr.params.value_or(s.params()), cfg.kind};
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        const auto ok = feasible_kinds(pr, cfg, xi0);
        std::string list;
        for (const auto& k : ok) list += (list.empty() ? "" : ", ") + k;
        throw Error(e.kind(), cfg.kind + " is infeasible here: " + e.detail() +
                                  "\n  feasible kinds for these zeros: " + (list.empty() ? "none" : list));
    }
}

Domain domain_for(const JobConfig& cfg, const ClosedFormSolution& s)
{
    if (cfg.domain) return {(*cfg.domain)[0], (*cfg.domain)[1]};
    const auto [a, b] = default_domain(s);
    return {a, b};
}

fs::path sidecar_path(const fs::path& out)
{
    fs::path p = out;
    p.replace_extension(".json");
    if (p == out) p += ".json";
    return p;
}

void emit(const JobConfig& cfg, const std::string& content)
{
    if (cfg.out) atomic_write(*cfg.out, content);
    else std::cout << content;
}

// ---------------------------------------------------------------------------
// verbs

int run_classify(const JobConfig& cfg)
{
    const Problem pr = resolve_problem(cfg);
    const RootMultiset& r = *pr.roots;
    const CaseTag t = classify(r);
    const SolutionFamily fam = existence(r);
    if (cfg.format == "json") {
        json j;
        j["schema"] = 1;
        j["params"] = to_json(*pr.params);
        j["roots"] = to_json(r);
        if (r.cofactor()) j["cofactor"] = {{"p", r.cofactor()->p}, {"q", r.cofactor()->q}};
        j["case"] = std::string(to_string(t));
        j["existence"] = std::string(to_string(fam));
        j["verdict"] = std::string(to_string(t)) + ": " + std::string(verdict_phrase(t));
        emit(cfg, j.dump(2) + "\n");
        return exit_ok;
    }
    std::string s;
    s += "params: " + fmt_params(*pr.params) + "\n";
    s += "roots: " + fmt_roots(r) + "\n";
    s += "case: " + std::string(to_string(t)) + "\n";
    s += std::string(to_string(t)) + ": " + std::string(verdict_phrase(t)) + "\n";
    emit(cfg, s);
    return exit_ok;
}

struct GateReport {
    json j;
    bool passed = true;
};

GateReport run_gates(const JobConfig& cfg, const ClosedFormSolution& s, const Params& p, Domain d, int n)
{
    GateReport g;
    const double tol = gate_tolerance();
    const double scale = s.scale();
    const double ode = ode_residual(s, p, d, n);
    const double ode_limit = tol * std::pow(scale, 4);
    g.j["ode_residual"] = ode;
    g.j["ode_tolerance"] = ode_limit;
    g.passed = ode < ode_limit;
    if (cfg.verify_pde) {
        const auto pde = pde_residual(s, p, d, n, 1e-3);
        g.j["pde_residual_u"] = pde.r_u;
        g.j["pde_residual_v"] = pde.r_v;
    }
    if (cfg.verify_oracle) {
        try {
            g.j["oracle_linf"] = oracle_vs_closed_form(s, d, 1e-3).linf;
        } catch (const Error& e) {
            g.j["oracle_error"] = e.what();
        }
    }
    g.j["passed"] = g.passed;
    return g;
}

int run_solve(const JobConfig& cfg)
{
    const Built b = build_solution(cfg);
    const Domain d = domain_for(cfg, b.s);
    const int n = cfg.n.value_or(2001);
    const Profile prof = sample_profile(b.s, d, n);
    const GateReport gate = run_gates(cfg, b.s, b.p, d, n);

    json side;
    side["schema"] = 1;
    side["source"] = b.label;
    side["solution"] = solution_json(b.s);
    side["domain"] = {d.a, d.b};
    side["n"] = n;
    side["validation"] = gate.j;

    if (cfg.format == "json") {
        side["profile"] = {{"xi", prof.xi}, {"f", prof.f}, {"f_prime", prof.f_prime}, {"g", prof.g}};
        emit(cfg, side.dump(2) + "\n");
    } else if (cfg.out) {
        atomic_write(*cfg.out, profile_csv(prof));
        atomic_write(sidecar_path(*cfg.out), side.dump(2) + "\n");
    } else {
        std::cout << profile_csv(prof);
    }
    if (!gate.passed) {
        std::cerr << "residual gate failed: " << gate.j["ode_residual"].get<double>() << " >= "
                  << gate.j["ode_tolerance"].get<double>() << "\n";
        return exit_gate;
    }
    return exit_ok;
}

int run_verify(const JobConfig& cfg, bool discrepancies)
{
    if (discrepancies) {
        json j;
        j["schema"] = 1;
        j["discrepancies"] = json::array();
        for (const auto& x : discrepancy_report())
            j["discrepancies"].push_back({{"fixture", x.fixture}, {"code", x.code}, {"detail", x.detail}});
        if (cfg.format == "json") emit(cfg, j.dump(2) + "\n");
        else {
            std::string s;
            for (const auto& x : discrepancy_report()) s += x.fixture + " | " + x.code + " | " + x.detail + "\n";
            emit(cfg, s);
        }
        return exit_ok;
    }
    const Built b = build_solution(cfg);
    const Domain d = domain_for(cfg, b.s);
    const int n = cfg.n.value_or(2000);
    JobConfig all = cfg;
    all.verify_pde = all.verify_oracle = true;
    GateReport g = run_gates(all, b.s, b.p, d, n);
    const double scale = b.s.scale();
    const bool pde_ok = g.j["pde_residual_u"].get<double>() < 1e-6 && g.j["pde_residual_v"].get<double>() < 1e-6;
    const bool oracle_ok = g.j.contains("oracle_linf") && g.j["oracle_linf"].get<double>() < 1e-6 * scale;
    const bool ok = g.passed && pde_ok && oracle_ok;
    json j;
    j["schema"] = 1;
    j["source"] = b.label;
    j["kind"] = std::string(to_string(b.s.kind()));
    j["domain"] = {d.a, d.b};
    j["n"] = n;
    j["checks"] = g.j;
    j["checks"]["pde_passed"] = pde_ok;
    j["checks"]["oracle_passed"] = oracle_ok;
    j["passed"] = ok;
    if (cfg.format == "json") emit(cfg, j.dump(2) + "\n");
    else {
        std::ostringstream os;
        os << "kind: " << j["kind"].get<std::string>() << "\n";
        os << "ode residual: " << format17(g.j["ode_residual"]) << " (limit " << format17(g.j["ode_tolerance"])
           << ") " << (g.passed ? "ok" : "FAIL") << "\n";
        os << "pde residual: u " << format17(g.j["pde_residual_u"]) << ", v " << format17(g.j["pde_residual_v"])
           << " (limit 1e-06) " << (pde_ok ? "ok" : "FAIL") << "\n";
        if (g.j.contains("oracle_linf"))
            os << "oracle linf: " << format17(g.j["oracle_linf"]) << " " << (oracle_ok ? "ok" : "FAIL") << "\n";
        else os << "oracle: " << g.j["oracle_error"].get<std::string>() << " FAIL\n";
        emit(cfg, os.str());
    }
    return ok ? exit_ok : exit_gate;
}

int run_oracle(const JobConfig& cfg)
{
    const Problem pr = resolve_problem(cfg);
    const Params p = *pr.params;
    double f0;
    if (cfg.f0) f0 = *cfg.f0;
    else {
        std::optional<double> top;
        for (const auto& e : pr.roots->entries())
            if (e.multiplicity == 1) top = e.value;
        if (!top) throw UsageError("oracle: no simple zero to start from; pass --f0");
        f0 = *top;
    }
    const Domain d = cfg.domain ? Domain{(*cfg.domain)[0], (*cfg.domain)[1]} : Domain{0.0, 20.0};
    std::vector<TurningPoint> events;
    Profile o = oracle_integrate(p, f0, cfg.sign, d.a, d.b, cfg.h, &events);
    for (std::size_t i = 0; i < o.size(); ++i) o.g.push_back(g_from_f(o.f[i], p.c, p.d1));
    if (cfg.n && *cfg.n < int(o.size())) {
        const std::size_t stride = std::max<std::size_t>(1, (o.size() - 1) / std::size_t(*cfg.n - 1));
        Profile t;
        for (std::size_t i = 0; i < o.size(); i += stride) {
            t.xi.push_back(o.xi[i]);
            t.f.push_back(o.f[i]);
            t.f_prime.push_back(o.f_prime[i]);
            t.g.push_back(o.g[i]);
        }
        o = std::move(t);
    }
    json side;
    side["schema"] = 1;
    side["params"] = to_json(p);
    side["f0"] = f0;
    side["sign"] = cfg.sign;
    side["h"] = cfg.h;
    side["domain"] = {d.a, d.b};
    side["turning_points"] = json::array();
    for (const auto& e : events) side["turning_points"].push_back({{"xi", e.xi}, {"f", e.f}});
    if (cfg.format == "json") {
        side["profile"] = {{"xi", o.xi}, {"f", o.f}, {"f_prime", o.f_prime}, {"g", o.g}};
        emit(cfg, side.dump(2) + "\n");
    } else if (cfg.out) {
        atomic_write(*cfg.out, profile_csv(o));
        atomic_write(sidecar_path(*cfg.out), side.dump(2) + "\n");
    } else {
        std::cout << profile_csv(o);
    }
    return exit_ok;
}

int run_evolve(const JobConfig& cfg)
{
    JobConfig c = cfg;
    if (!c.preset && !c.params && !c.roots) c.preset = "fig-case1a";
    const Built b = build_solution(c);
    const int n = cfg.n.value_or(1024);
    if (n < 4 || (n & (n - 1)) != 0) throw UsageError("n: evolution grid size must be a power of two");
    if (!(cfg.L > 0.0) || !(cfg.T >= 0.0)) throw UsageError("evolution: need L > 0 and T >= 0");
    if (b.s.period()) {
        const double m = cfg.L / *b.s.period();
        if (std::abs(m - std::round(m)) > 1e-9 * m || std::round(m) < 1.0)
            throw UsageError("evolution: L must be a whole number of periods (period " + format17(*b.s.period()) + ")");
    }
    const EvolutionState s0 = traveling_state(b.s, b.p, cfg.L, std::size_t(n));
    const double dx = s0.dx();
    const double dt = cfg.dt.value_or(std::min(1e-3, dx * dx * dx));
    const EvolutionState s1 = evolve(s0, dt, cfg.T);
    const double err = permanence_error(b.s, b.p, s1);
    json j;
    j["schema"] = 1;
    j["source"] = b.label;
    j["L"] = cfg.L;
    j["n"] = n;
    j["dt"] = dt;
    j["T"] = s1.t;
    j["permanence_error"] = err;
    j["mean_drift"] = std::abs(mean_u(s1) - mean_u(s0));
    if (cfg.out) {
        const std::string base = *cfg.out;
        atomic_write(base + ".initial.csv", state_csv(s0));
        atomic_write(base + ".final.csv", state_csv(s1));
        atomic_write(base + ".json", j.dump(2) + "\n");
    }
    if (cfg.format == "json" || !cfg.out) std::cout << j.dump(2) << "\n";
    return exit_ok;
}

int run_reduce(const JobConfig& cfg)
{
    if (cfg.ell < 2) throw UsageError("ell: must be >= 2");
    const int ell_max = cfg.ell_max.value_or(std::max(cfg.ell, 4));
    if (ell_max < 4) throw UsageError("ell_max: must be >= 4");
    const FieldStack st = reduce_vanishing(cfg.ell);
    const ConjectureReport rep = conjecture_report(ell_max);
    if (cfg.format == "json") {
        json j;
        j["schema"] = 1;
        j["ell"] = cfg.ell;
        j["fields"] = json::array();
        for (std::size_t k = 0; k < st.fields.size(); ++k)
            j["fields"].push_back({{"j", k + 1}, {"coefficients", st.fields[k].to_json()}, {"text", st.fields[k].to_string()}});
        j["closing"] = {{"coefficients", st.closing.to_json()}, {"text", st.closing.to_string()}};
        j["P"] = {{"coefficients", st.P.to_json()}, {"text", st.P.to_string()}};
        j["conjecture"] = rep.to_json();
        emit(cfg, j.dump(2) + "\n");
        return exit_ok;
    }
    std::string s = "ell = " + std::to_string(cfg.ell) + "\n";
    for (std::size_t k = 0; k < st.fields.size(); ++k) s += "p" + std::to_string(k + 1) + " = " + st.fields[k].to_string() + "\n";
    s += "(f')^2 = " + st.P.to_string() + "\n\n" + rep.to_text();
    emit(cfg, s);
    return exit_ok;
}

int run_figures(const JobConfig& cfg)
{
    const fs::path dir = cfg.out.value_or("figures");
    std::vector<const FigurePreset*> list;
    if (cfg.preset) list.push_back(&preset_or_usage(*cfg.preset));
    else
        for (const auto& p : figure_presets()) list.push_back(&p);
    int rc = exit_ok;
    for (const FigurePreset* fp : list) {
        JobConfig c = cfg;
        c.preset = fp->name;
        c.out = (dir / (fp->name + ".csv")).string();
        c.format = "csv";
        const int r = run_solve(c);
        const ClosedFormSolution s = fp->build();
        std::cout << fp->name << ": u(" << format17(fp->spot_xi) << ") = " << format17(s(fp->spot_xi)) << "  ["
                  << fp->formula << "]" << (r == exit_ok ? "" : "  GATE FAILED") << "\n";
        if (r != exit_ok) rc = r;
    }
    return rc;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Traveling waves of the l = 2 Kaup-Boussinesq system"};
    app.require_subcommand(1);
    JobConfig cfg;
    std::string params_s, roots_s, domain_s, config_path;
    bool discrepancies = false;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON job file (flags override it)");
        sub->add_option("--params", params_s, "c,d1,d2,d3 (fractions allowed)");
        sub->add_option("--roots", roots_s, "zeros of F (4 values), or the labels f1,f2,f3 of a family");
        sub->add_option("--kind", cfg.kind, "solution kind or auto");
        sub->add_option("--branch", cfg.branch, "upper or lower");
        sub->add_option("--index", cfg.initial_index, "starting zero 1..4 for general_sn2");
        sub->add_option("--domain", domain_s, "a,b");
        sub->add_option("--n", cfg.n, "sample count (grid size for evolve)");
        sub->add_option("--xi0", cfg.xi0, "phase");
        sub->add_option("--format", cfg.format, "csv or json");
        sub->add_option("--out", cfg.out, "output path");
        sub->add_option("--preset", cfg.preset, "figure preset");
    };
    auto* classify_cmd = app.add_subcommand("classify", "roots, multiplicities, case and existence verdict");
    auto* solve_cmd = app.add_subcommand("solve", "construct a closed form and write its profile");
    auto* verify_cmd = app.add_subcommand("verify", "residual and oracle checks of a closed form");
    auto* oracle_cmd = app.add_subcommand("oracle", "integrate (f')^2 = F(f) with RK4");
    auto* evolve_cmd = app.add_subcommand("evolve", "time evolution of a traveling wave");
    auto* reduce_cmd = app.add_subcommand("reduce", "higher-l reductions and conjecture table");
    auto* figures_cmd = app.add_subcommand("figures", "write every figure preset");
    for (auto* sub : {classify_cmd, solve_cmd, verify_cmd, oracle_cmd, evolve_cmd, reduce_cmd, figures_cmd}) common(sub);
    verify_cmd->add_flag("--discrepancies", discrepancies, "list corrections to printed formulas");
    std::optional<double> f0, h, L, dt, T;
    std::optional<int> sign, ell, ell_max;
    oracle_cmd->add_option("--f0", f0, "start value");
    oracle_cmd->add_option("--sign", sign, "initial direction +1/-1");
    oracle_cmd->add_option("--step", h, "RK4 step");
    evolve_cmd->add_option("--L", L, "domain length");
    evolve_cmd->add_option("--dt", dt, "time step");
    evolve_cmd->add_option("--T", T, "final time");
    reduce_cmd->add_option("--ell", ell, "hierarchy index");
    reduce_cmd->add_option("--ell-max", ell_max, "conjecture table bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }

    try {
        // flags override file values: re-apply after loading
        JobConfig flags = cfg;
        if (!config_path.empty()) {
            JobConfig file;
            load_config(config_path, file);
            CLI::App* sub = app.get_subcommands().front();
            const auto given = [&](const char* name) { return sub->count(name) > 0; };
            if (given("--kind")) file.kind = flags.kind;
            if (given("--branch")) file.branch = flags.branch;
            if (given("--index")) file.initial_index = flags.initial_index;
            if (given("--n")) file.n = flags.n;
            if (given("--xi0")) file.xi0 = flags.xi0;
            if (given("--format")) file.format = flags.format;
            if (given("--out")) file.out = flags.out;
            if (given("--preset")) file.preset = flags.preset;
            cfg = file;
        }
        if (!params_s.empty()) cfg.params = parse_list(params_s, "params");
        if (!roots_s.empty()) cfg.roots = parse_list(roots_s, "roots");
        if (!domain_s.empty()) cfg.domain = parse_list(domain_s, "domain");
        if (f0) cfg.f0 = *f0;
        if (sign) cfg.sign = *sign;
        if (h) cfg.h = *h;
        if (L) cfg.L = *L;
        if (dt) cfg.dt = *dt;
        if (T) cfg.T = *T;
        if (ell) cfg.ell = *ell;
        if (ell_max) cfg.ell_max = *ell_max;
        check_config(cfg);
        gate_tolerance();

        if (*classify_cmd) return run_classify(cfg);
        if (*solve_cmd) return run_solve(cfg);
        if (*verify_cmd) return run_verify(cfg, discrepancies);
        if (*oracle_cmd) return run_oracle(cfg);
        if (*evolve_cmd) return run_evolve(cfg);
        if (*reduce_cmd) return run_reduce(cfg);
        if (*figures_cmd) return run_figures(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_usage;
}
