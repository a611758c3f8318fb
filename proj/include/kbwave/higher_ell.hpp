#ifndef KBWAVE_HIGHER_ELL_HPP
#define KBWAVE_HIGHER_ELL_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "kbwave/error.hpp"
#include "kbwave/oracle.hpp"
#include "kbwave/reduction.hpp"

namespace kbwave {

using Rational = boost::multiprecision::cpp_rational;

/// Polynomial sum a[i][j] f^i c^j with exact rational coefficients.
class FPoly {
public:
    FPoly() = default;

    static FPoly f() { return monomial(1, 0, 1); }
    static FPoly c() { return monomial(0, 1, 1); }
    static FPoly constant(const Rational& r) { return monomial(0, 0, r); }

    static FPoly monomial(int i, int j, const Rational& r)
    {
        FPoly p;
        p.at(i, j) = r;
        p.trim();
        return p;
    }

    int degree_f() const noexcept { return int(a_.size()) - 1; }
    int degree_c() const noexcept
    {
        int d = -1;
        for (const auto& row : a_) d = std::max(d, int(row.size()) - 1);
        return d;
    }
    bool is_zero() const noexcept { return a_.empty(); }

    Rational coeff(int i, int j) const
    {
        if (i < 0 || j < 0 || i >= int(a_.size()) || j >= int(a_[i].size())) return 0;
        return a_[i][j];
    }

    /// Coefficient of f^i as a polynomial in c (index = power of c).
    std::vector<Rational> coeff_f(int i) const
    {
        if (i < 0 || i >= int(a_.size())) return {};
        return a_[i];
    }

    friend FPoly operator+(FPoly x, const FPoly& y)
    {
        for (int i = 0; i < int(y.a_.size()); ++i)
            for (int j = 0; j < int(y.a_[i].size()); ++j) x.at(i, j) += y.a_[i][j];
        x.trim();
        return x;
    }

    friend FPoly operator-(const FPoly& x) { return x * Rational(-1); }
    friend FPoly operator-(const FPoly& x, const FPoly& y) { return x + (-y); }

    friend FPoly operator*(FPoly x, const Rational& r)
    {
        for (auto& row : x.a_)
            for (auto& v : row) v *= r;
        x.trim();
        return x;
    }

    friend FPoly operator*(const FPoly& x, const FPoly& y)
    {
        FPoly out;
        for (int i = 0; i < int(x.a_.size()); ++i)
            for (int j = 0; j < int(x.a_[i].size()); ++j) {
                if (x.a_[i][j] == 0) continue;
                for (int k = 0; k < int(y.a_.size()); ++k)
                    for (int l = 0; l < int(y.a_[k].size()); ++l)
                        if (y.a_[k][l] != 0) out.at(i + k, j + l) += x.a_[i][j] * y.a_[k][l];
            }
        out.trim();
        return out;
    }

    friend bool operator==(const FPoly& x, const FPoly& y) { return x.a_ == y.a_; }

    FPoly pow(int e) const
    {
        FPoly r = constant(1);
        for (int k = 0; k < e; ++k) r = r * *this;
        return r;
    }

    /// d/df
    FPoly derivative() const
    {
        FPoly out;
        for (int i = 1; i < int(a_.size()); ++i)
            for (int j = 0; j < int(a_[i].size()); ++j) out.at(i - 1, j) = a_[i][j] * i;
        out.trim();
        return out;
    }

    /// integral from 0 to f
    FPoly integral() const
    {
        FPoly out;
        for (int i = 0; i < int(a_.size()); ++i)
            for (int j = 0; j < int(a_[i].size()); ++j) out.at(i + 1, j) = a_[i][j] / (i + 1);
        out.trim();
        return out;
    }

    Rational eval(const Rational& fv, const Rational& cv) const
    {
        Rational r = 0;
        for (int i = int(a_.size()) - 1; i >= 0; --i) {
            Rational row = 0;
            for (int j = int(a_[i].size()) - 1; j >= 0; --j) row = row * cv + a_[i][j];
            r = r * fv + row;
        }
        return r;
    }

    double eval(double fv, double cv) const
    {
        double r = 0.0;
        for (int i = int(a_.size()) - 1; i >= 0; --i) {
            double row = 0.0;
            for (int j = int(a_[i].size()) - 1; j >= 0; --j) row = row * cv + a_[i][j].convert_to<double>();
            r = r * fv + row;
        }
        return r;
    }

    std::string to_string() const
    {
        std::string s;
        for (int i = int(a_.size()) - 1; i >= 0; --i)
            for (int j = int(a_[i].size()) - 1; j >= 0; --j) {
                const Rational& v = a_[i][j];
                if (v == 0) continue;
                std::string term = (v < 0 ? "-" : (s.empty() ? "" : "+")) + Rational(abs(v)).str();
                if (j > 0) term += "*c" + (j > 1 ? "^" + std::to_string(j) : std::string());
                if (i > 0) term += "*f" + (i > 1 ? "^" + std::to_string(i) : std::string());
                s += s.empty() ? term : " " + term;
            }
        return s.empty() ? "0" : s;
    }

    /// [[i, j, "num/den"], ...] for nonzero terms
    nlohmann::json to_json() const
    {
        nlohmann::json out = nlohmann::json::array();
        for (int i = 0; i < int(a_.size()); ++i)
            for (int j = 0; j < int(a_[i].size()); ++j)
                if (a_[i][j] != 0) out.push_back({i, j, a_[i][j].str()});
        return out;
    }

private:
    Rational& at(int i, int j)
    {
        if (int(a_.size()) <= i) a_.resize(i + 1);
        if (int(a_[i].size()) <= j) a_[i].resize(j + 1, Rational(0));
        return a_[i][j];
    }

    void trim()
    {
        for (auto& row : a_)
            while (!row.empty() && row.back() == 0) row.pop_back();
        while (!a_.empty() && a_.back().empty()) a_.pop_back();
    }

    std::vector<std::vector<Rational>> a_;
};

/// Fields p_1 = f, ..., p_ell with every integration constant zero, the
/// closing polynomial p_{ell+1} and (f')^2 = P_ell(f).
struct FieldStack {
    int ell = 0;
    std::vector<FPoly> fields; // fields[j-1] = p_j
    FPoly closing;
    FPoly P;
};

inline FieldStack reduce_vanishing(int ell)
{
    if (ell < 2) throw Error(ErrorKind::invalid_argument, "ell must be >= 2");
    const FPoly f = FPoly::f(), c = FPoly::c();
    const FPoly weight = c + f * Rational(1, 2);
    FieldStack st;
    st.ell = ell;
    FPoly p = f;
    st.fields.push_back(p);
    for (int j = 1; j <= ell; ++j) {
        p = -(weight * p.derivative() + p).integral();
        if (j < ell) st.fields.push_back(p);
    }
    st.closing = p;
    st.P = (p * Rational(-8)).integral();
    return st;
}

struct ConjectureRow {
    int ell;
    Rational leading;           // coefficient of the top power of f in P_ell
    bool power_form;            // P_ell is exactly leading * f^2 (f+2c)^ell
    bool matches_printed;       // -f^2 (f+2c)^ell / 2^(2 ell - 4)
    bool matches_pattern;       // (-1)^(ell-1) f^2 (f+2c)^ell / 2^(ell-2)
};

struct ConjectureReport {
    std::vector<ConjectureRow> rows;

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["schema"] = 1;
        j["candidate_printed"] = "-f^2 (f+2c)^l / 2^(2l-4)";
        j["candidate_pattern"] = "(-1)^(l-1) f^2 (f+2c)^l / 2^(l-2)";
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rows)
            j["rows"].push_back({{"ell", r.ell},
                                 {"leading", r.leading.str()},
                                 {"power_form", r.power_form},
                                 {"matches_printed", r.matches_printed},
                                 {"matches_pattern", r.matches_pattern}});
        return j;
    }

    std::string to_text() const
    {
        std::string s = "ell  leading      power_form  printed(2^(2l-4))  pattern(2^(l-2))\n";
        for (const auto& r : rows) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-4d %-12s %-11s %-18s %s\n", r.ell, r.leading.str().c_str(),
                          r.power_form ? "yes" : "no", r.matches_printed ? "match" : "mismatch",
                          r.matches_pattern ? "match" : "mismatch");
            s += buf;
        }
        return s;
    }
};

inline Rational pow2(int e)
{
    Rational r = 1;
    for (int i = 0; i < std::abs(e); ++i) r *= 2;
    return e >= 0 ? r : Rational(1) / r;
}

inline ConjectureReport conjecture_report(int ell_max)
{
    if (ell_max < 4) throw Error(ErrorKind::invalid_argument, "ell_max must be >= 4");
    const FPoly f = FPoly::f(), c = FPoly::c();
    const FPoly base = f * f;
    const FPoly lin = f + c * Rational(2);
    ConjectureReport rep;
    for (int ell = 2; ell <= ell_max; ++ell) {
        const FieldStack st = reduce_vanishing(ell);
        const FPoly shape = base * lin.pow(ell);
        ConjectureRow row;
        row.ell = ell;
        row.leading = st.P.coeff(st.P.degree_f(), 0);
        row.power_form = st.P == shape * row.leading;
        row.matches_printed = st.P == shape * (Rational(-1) / pow2(2 * ell - 4));
        row.matches_pattern = st.P == shape * (Rational(ell % 2 == 0 ? -1 : 1) / pow2(ell - 2));
        rep.rows.push_back(row);
    }
    return rep;
}

/// Quintic (f')^2 for ell = 3 with constants, coefficients of f^5 .. f^0.
template <class T>
std::array<T, 6> reduce_l3_full(const T& c, const T& d1, const T& d2, const T& d3, const T& d4)
{
    return {T(1) / T(2), T(3) * c, T(6) * c * c - T(2) * d1, T(4) * (c * c * c - c * d1 + d2), T(8) * d3, T(8) * d4};
}

struct L3Fields {
    double g;
    double h;
};

inline L3Fields l3_fields(double f, double c, double d1, double d2)
{
    return {g_from_f(f, c, d1), 1.5 * c * f * f + 0.5 * f * f * f + (c * c - d1) * f + d2};
}

namespace detail {

// With w = sqrt(1 + f/(2c)) in (0,1) and z = ln(1 - w^2):
//   G(z) = 1/w + z/2 - ln(1 + w), strictly increasing in z.
struct L3Relation {
    static double w_of(double z) { return std::sqrt(-std::expm1(z)); }
    static double G(double z)
    {
        const double w = w_of(z);
        return 1.0 / w + 0.5 * z - std::log1p(w);
    }
    static double dG(double z)
    {
        const double w = w_of(z);
        return 0.5 / (w * w * w);
    }
};

inline constexpr int l3_max_iterations = 200;
inline constexpr double l3_tolerance = 1e-13;

inline double solve_l3(double T)
{
    using R = L3Relation;
    double lo = std::min(-1.0, 2.0 * T - 4.0);
    while (R::G(lo) > T) {
        lo *= 2.0;
        if (lo < -1400.0) throw Error(ErrorKind::out_of_branch_range, "profile indistinguishable from f = 0");
    }
    const double wh = std::min(0.5, 1.0 / (std::abs(T) + 2.0));
    double hi = std::log1p(-wh * wh);
    if (!(hi < 0.0)) throw Error(ErrorKind::out_of_branch_range, "profile indistinguishable from f = -2c");
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < l3_max_iterations; ++it) {
        const double r = R::G(z) - T;
        if (std::abs(r) <= l3_tolerance * std::max(1.0, std::abs(T))) return z;
        if (r > 0.0) hi = z;
        else lo = z;
        double zn = z - r / R::dG(z);
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (hi - lo < 1e-16 * std::max(1.0, std::abs(z))) return zn;
        z = zn;
    }
    return z;
}

} // namespace detail

/// Solves the ell = 3 vanishing-boundary relation pointwise; sign = +1 gives
/// the profile rising from -2c (xi -> -inf) to 0 (xi -> +inf).
inline Profile l3_implicit_profile(double c, const std::vector<double>& xi_grid, int sign = 1, double xi0 = 0.0)
{
    if (!(c > 0.0)) throw Error(ErrorKind::invalid_argument, "c must be positive");
    if (sign != 1 && sign != -1) throw Error(ErrorKind::invalid_argument, "sign must be +1 or -1");
    const double c32 = c * std::sqrt(c);
    Profile out;
    for (double xi : xi_grid) {
        const double T = -double(sign) * c32 * (xi - xi0);
        const double z = detail::solve_l3(T);
        const double ez = std::exp(z);
        const double f = -2.0 * c * ez;
        if (f == 0.0 || f == -2.0 * c) throw Error(ErrorKind::out_of_branch_range, "xi = " + std::to_string(xi));
        const double dz = -double(sign) * c32 / detail::L3Relation::dG(z);
        out.xi.push_back(xi);
        out.f.push_back(f);
        out.f_prime.push_back(f * dz);
    }
    return out;
}

} // namespace kbwave

#endif
