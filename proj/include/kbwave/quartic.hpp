#ifndef KBWAVE_QUARTIC_HPP
#define KBWAVE_QUARTIC_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbwave/error.hpp"

namespace kbwave {

/// Reduction constants of the quartic first integral (f')^2 = F(f).
template <class T>
struct BasicParams {
    T c{};
    T d1{};
    T d2{};
    T d3{};

    friend bool operator==(const BasicParams&, const BasicParams&) = default;
};

using Params = BasicParams<double>;

/// Coefficients of F, highest power first.
template <class T>
std::array<T, 5> F_coefficients(const BasicParams<T>& p)
{
    return {T(-1), T(-4) * p.c, T(4) * (p.d1 - p.c * p.c), T(8) * p.d2, T(8) * p.d3};
}

template <class T>
T eval_F(const BasicParams<T>& p, const T& f)
{
    const auto a = F_coefficients(p);
    T r = a[0];
    for (std::size_t i = 1; i < a.size(); ++i) r = r * f + a[i];
    return r;
}

/// Derivatives of F up to fourth order.
inline double eval_F_derivative(const Params& p, double f, int order)
{
    const double c = p.c;
    switch (order) {
    case 0: return eval_F(p, f);
    case 1: return ((-4.0 * f - 12.0 * c) * f + 8.0 * (p.d1 - c * c)) * f + 8.0 * p.d2;
    case 2: return (-12.0 * f - 24.0 * c) * f + 8.0 * (p.d1 - c * c);
    case 3: return -24.0 * f - 24.0 * c;
    case 4: return -24.0;
    default: return 0.0;
    }
}

/// Real zero of F with its multiplicity.
struct RootEntry {
    double value;
    int multiplicity;

    friend bool operator==(const RootEntry&, const RootEntry&) = default;
};

/// Monic quadratic f^2 + p f + q carrying the complex-conjugate pair.
struct QuadraticFactor {
    double p;
    double q;

    double discriminant() const noexcept { return p * p - 4.0 * q; }
};

class RootMultiset {
public:
    RootMultiset() = default;

    explicit RootMultiset(std::vector<RootEntry> entries, std::optional<QuadraticFactor> cofactor = std::nullopt)
        : entries_(std::move(entries)), cofactor_(cofactor)
    {
        int total = 0;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].multiplicity <= 0 || !std::isfinite(entries_[i].value))
                throw Error(ErrorKind::invalid_argument, "root entries need finite values and positive multiplicities");
            if (i > 0 && !(entries_[i - 1].value < entries_[i].value))
                throw Error(ErrorKind::invalid_argument, "root values must be strictly increasing");
            total += entries_[i].multiplicity;
        }
        if (total != 0 && total != 2 && total != 4)
            throw Error(ErrorKind::invalid_argument, "total multiplicity must be 0, 2 or 4");
    }

    /// Groups a list of (possibly repeated, unsorted) values exactly.
    static RootMultiset from_values(std::vector<double> values)
    {
        std::sort(values.begin(), values.end());
        std::vector<RootEntry> e;
        for (double v : values) {
            if (!e.empty() && e.back().value == v)
                ++e.back().multiplicity;
            else
                e.push_back({v, 1});
        }
        return RootMultiset(std::move(e));
    }

    const std::vector<RootEntry>& entries() const noexcept { return entries_; }
    const std::optional<QuadraticFactor>& cofactor() const noexcept { return cofactor_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    int total_multiplicity() const noexcept
    {
        int t = 0;
        for (const auto& e : entries_) t += e.multiplicity;
        return t;
    }

    /// Values repeated by multiplicity, ascending.
    std::vector<double> expanded() const
    {
        std::vector<double> v;
        for (const auto& e : entries_)
            for (int i = 0; i < e.multiplicity; ++i) v.push_back(e.value);
        return v;
    }

    double scale() const noexcept
    {
        double s = 1.0;
        for (const auto& e : entries_) s = std::max(s, std::abs(e.value));
        return s;
    }

private:
    std::vector<RootEntry> entries_;
    std::optional<QuadraticFactor> cofactor_;
};

/// Inverse map from the four zeros to the constants (elementary symmetric
/// functions). Exact for exact T.
template <class T>
BasicParams<T> params_from_zeros(const std::array<T, 4>& f)
{
    const T e1 = f[0] + f[1] + f[2] + f[3];
    const T e2 = f[0] * f[1] + f[0] * f[2] + f[0] * f[3] + f[1] * f[2] + f[1] * f[3] + f[2] * f[3];
    const T e3 = f[0] * f[1] * f[2] + f[0] * f[1] * f[3] + f[0] * f[2] * f[3] + f[1] * f[2] * f[3];
    const T e4 = f[0] * f[1] * f[2] * f[3];
    BasicParams<T> p;
    p.c = -e1 / T(4);
    p.d1 = e1 * e1 / T(16) - e2 / T(4);
    p.d2 = e3 / T(8);
    p.d3 = -e4 / T(8);
    return p;
}

inline Params params_from_roots(const RootMultiset& r)
{
    if (r.total_multiplicity() != 4)
        throw Error(ErrorKind::underdetermined,
                    "need four zeros counted with multiplicity, got " + std::to_string(r.total_multiplicity()));
    const auto v = r.expanded();
    return params_from_zeros<double>({v[0], v[1], v[2], v[3]});
}

namespace detail {

using Poly = std::vector<double>; // highest power first

inline double horner(const Poly& a, double x)
{
    double r = 0.0;
    for (double c : a) r = r * x + c;
    return r;
}

inline Poly derivative(const Poly& a)
{
    const std::size_t n = a.size() - 1;
    Poly d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] * static_cast<double>(n - i);
    return d;
}

/// j-th Taylor coefficient P^(j)(x)/j! and a bound on its rounding error.
inline std::pair<double, double> taylor_coefficient(const Poly& a, double x, int j)
{
    const int n = static_cast<int>(a.size()) - 1;
    double val = 0.0, mag = 0.0;
    for (int i = j; i <= n; ++i) {
        double binom = 1.0;
        for (int t = 0; t < j; ++t) binom = binom * (i - t) / (t + 1);
        const double term = a[n - i] * binom * std::pow(x, i - j);
        val += term;
        mag += std::abs(term);
    }
    return {val, mag};
}

/// A zero of multiplicity m at x: every lower Taylor coefficient is
/// negligible against the m-th one on the scale rho.
inline bool has_multiplicity(const Poly& a, double x, int m, double tol)
{
    const double rho = tol * std::max(1.0, std::abs(x));
    const auto [lead, lead_mag] = taylor_coefficient(a, x, m);
    (void)lead_mag;
    for (int j = 0; j < m; ++j) {
        const auto [v, mag] = taylor_coefficient(a, x, j);
        const double floor = 256.0 * std::numeric_limits<double>::epsilon() * mag;
        if (std::abs(v) > std::max(std::abs(lead) * std::pow(rho, m - j), floor)) return false;
    }
    return true;
}

inline double bracket_root(const Poly& a, double lo, double hi)
{
    double flo = horner(a, lo);
    const Poly d = derivative(a);
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = horner(a, x);
        if (fx == 0.0) return x;
        if ((fx < 0.0) == (flo < 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double dx = horner(d, x);
        double xn = dx != 0.0 ? x - fx / dx : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return xn;
        x = xn;
    }
    return x;
}

inline std::vector<RootEntry> cluster(std::vector<RootEntry> r, double tol)
{
    std::sort(r.begin(), r.end(), [](const RootEntry& x, const RootEntry& y) { return x.value < y.value; });
    std::vector<RootEntry> out;
    for (const auto& e : r) {
        if (!out.empty() && e.value - out.back().value <= tol * std::max(1.0, std::abs(out.back().value))) {
            auto& b = out.back();
            const int m = b.multiplicity + e.multiplicity;
            b.value = (b.value * b.multiplicity + e.value * e.multiplicity) / m;
            b.multiplicity = m;
        } else {
            out.push_back(e);
        }
    }
    return out;
}

/// Real roots of a polynomial of degree <= 4 by recursive bracketing between
/// critical points; multiple roots are inherited from the derivative.
inline std::vector<RootEntry> real_roots(Poly a, double tol)
{
    while (a.size() > 1 && a.front() == 0.0) a.erase(a.begin());
    const std::size_t n = a.size() - 1;
    if (n == 0) return {};
    if (n == 1) return {{-a[1] / a[0], 1}};

    const auto crit = real_roots(derivative(a), tol);
    std::vector<RootEntry> roots;
    std::vector<bool> crit_is_root(crit.size(), false);
    for (std::size_t i = 0; i < crit.size(); ++i) {
        if (has_multiplicity(a, crit[i].value, crit[i].multiplicity + 1, tol)) {
            roots.push_back({crit[i].value, crit[i].multiplicity + 1});
            crit_is_root[i] = true;
        }
    }

    double bound = 0.0;
    for (std::size_t i = 1; i <= n; ++i) bound = std::max(bound, std::abs(a[i] / a[0]));
    bound += 1.0;

    const auto sign_at = [&](double x) { return horner(a, x); };
    for (std::size_t i = 0; i <= crit.size(); ++i) {
        const bool lo_root = i > 0 && crit_is_root[i - 1];
        const bool hi_root = i < crit.size() && crit_is_root[i];
        if (lo_root || hi_root) continue;
        const double lo = i == 0 ? -bound : crit[i - 1].value;
        const double hi = i == crit.size() ? bound : crit[i].value;
        if (!(lo < hi)) continue;
        const double flo = sign_at(lo), fhi = sign_at(hi);
        if (flo == 0.0 || fhi == 0.0 || (flo < 0.0) == (fhi < 0.0)) continue;
        roots.push_back({bracket_root(a, lo, hi), 1});
    }
    return cluster(std::move(roots), tol);
}

} // namespace detail

inline constexpr double default_root_tolerance = 1e-7;

/// Real zeros of F with multiplicities. When exactly two real zeros (with
/// multiplicity) exist, the complementary quadratic is kept as cofactor.
inline RootMultiset roots_of_F(const Params& p, double tol = default_root_tolerance)
{
    if (!(tol > 0.0)) throw Error(ErrorKind::invalid_argument, "tol must be positive");
    const auto c = F_coefficients(p);
    auto roots = detail::real_roots(detail::Poly(c.begin(), c.end()), tol);

    int total = 0;
    for (const auto& r : roots) total += r.multiplicity;
    // a lone triple can only be a numerical artefact of a near-quadruple
    if (total == 1 || total == 3) {
        if (total == 3 && roots.size() == 1) roots.front().multiplicity = 4;
        else if (total == 3) {
            // keep the entry of largest multiplicity, add one to it
            auto it = std::max_element(roots.begin(), roots.end(),
                                       [](const RootEntry& x, const RootEntry& y) { return x.multiplicity < y.multiplicity; });
            ++it->multiplicity;
        } else {
            roots.front().multiplicity = 2;
        }
        total = 0;
        for (const auto& r : roots) total += r.multiplicity;
    }

    std::optional<QuadraticFactor> cof;
    if (total == 2) {
        // F = -(f^2 + s f + t)(f^2 + p f + q): divide out the monic real part
        double s, t;
        if (roots.size() == 1) {
            s = -2.0 * roots[0].value;
            t = roots[0].value * roots[0].value;
        } else {
            s = -(roots[0].value + roots[1].value);
            t = roots[0].value * roots[1].value;
        }
        // monic quartic m = -F: 1, 4c, -4(d1-c^2), -8d2, -8d3
        const double m1 = -c[1], m2 = -c[2];
        const double pp = m1 - s;
        const double qq = m2 - t - s * pp;
        cof = QuadraticFactor{pp, qq};
    }
    return RootMultiset(std::move(roots), cof);
}

enum class CaseTag {
    NoRealZeros,
    TwoSimpleOnly,
    OneDoubleOnly,
    TwoDoublesOnly,
    Quadruple,
    DoubleBelowSimples,
    DoubleAboveSimples,
    DoubleBetweenSimples,
    TripleWithSimpleAbove,
    TripleWithSimpleBelow,
    FourSimple,
};

inline constexpr std::array<CaseTag, 11> all_case_tags{
    CaseTag::NoRealZeros,          CaseTag::TwoSimpleOnly,         CaseTag::OneDoubleOnly,
    CaseTag::TwoDoublesOnly,       CaseTag::Quadruple,             CaseTag::DoubleBelowSimples,
    CaseTag::DoubleAboveSimples,   CaseTag::DoubleBetweenSimples,  CaseTag::TripleWithSimpleAbove,
    CaseTag::TripleWithSimpleBelow, CaseTag::FourSimple,
};

inline std::string_view to_string(CaseTag t) noexcept
{
    switch (t) {
    case CaseTag::NoRealZeros: return "NoRealZeros";
    case CaseTag::TwoSimpleOnly: return "TwoSimpleOnly";
    case CaseTag::OneDoubleOnly: return "OneDoubleOnly";
    case CaseTag::TwoDoublesOnly: return "TwoDoublesOnly";
    case CaseTag::Quadruple: return "Quadruple";
    case CaseTag::DoubleBelowSimples: return "DoubleBelowSimples";
    case CaseTag::DoubleAboveSimples: return "DoubleAboveSimples";
    case CaseTag::DoubleBetweenSimples: return "DoubleBetweenSimples";
    case CaseTag::TripleWithSimpleAbove: return "TripleWithSimpleAbove";
    case CaseTag::TripleWithSimpleBelow: return "TripleWithSimpleBelow";
    case CaseTag::FourSimple: return "FourSimple";
    }
    return "?";
}

inline CaseTag classify(const RootMultiset& r)
{
    std::vector<int> sig;
    for (const auto& e : r.entries()) sig.push_back(e.multiplicity);
    using V = std::vector<int>;
    if (sig.empty()) return CaseTag::NoRealZeros;
    if (sig == V{1, 1}) return CaseTag::TwoSimpleOnly;
    if (sig == V{2}) return CaseTag::OneDoubleOnly;
    if (sig == V{2, 2}) return CaseTag::TwoDoublesOnly;
    if (sig == V{4}) return CaseTag::Quadruple;
    if (sig == V{2, 1, 1}) return CaseTag::DoubleBelowSimples;
    if (sig == V{1, 2, 1}) return CaseTag::DoubleBetweenSimples;
    if (sig == V{1, 1, 2}) return CaseTag::DoubleAboveSimples;
    if (sig == V{3, 1}) return CaseTag::TripleWithSimpleAbove;
    if (sig == V{1, 3}) return CaseTag::TripleWithSimpleBelow;
    if (sig == V{1, 1, 1, 1}) return CaseTag::FourSimple;
    throw Error(ErrorKind::invalid_argument, "multiplicity signature has no case");
}

enum class SolutionFamily { none, solitary, periodic };

inline std::string_view to_string(SolutionFamily s) noexcept
{
    switch (s) {
    case SolutionFamily::none: return "no non-constant real solution";
    case SolutionFamily::solitary: return "solitary";
    case SolutionFamily::periodic: return "periodic";
    }
    return "?";
}

/// Which non-constant real solutions each case admits.
inline SolutionFamily existence(CaseTag t) noexcept
{
    switch (t) {
    case CaseTag::NoRealZeros:
    case CaseTag::OneDoubleOnly:
    case CaseTag::TwoDoublesOnly:
    case CaseTag::Quadruple: return SolutionFamily::none;
    case CaseTag::DoubleBetweenSimples:
    case CaseTag::TripleWithSimpleAbove:
    case CaseTag::TripleWithSimpleBelow: return SolutionFamily::solitary;
    case CaseTag::TwoSimpleOnly:
    case CaseTag::DoubleBelowSimples:
    case CaseTag::DoubleAboveSimples:
    case CaseTag::FourSimple: return SolutionFamily::periodic;
    }
    return SolutionFamily::none;
}

/// Same table, but a lone double root is only a dead end when the cofactor
/// keeps F negative away from it.
inline SolutionFamily existence(const RootMultiset& r)
{
    const CaseTag t = classify(r);
    if (t == CaseTag::OneDoubleOnly && r.cofactor() && !(r.cofactor()->discriminant() < 0.0))
        throw Error(ErrorKind::invalid_argument, "cofactor of a lone double root has real zeros");
    return existence(t);
}

inline std::string_view verdict_phrase(CaseTag t) noexcept
{
    switch (t) {
    case CaseTag::NoRealZeros:
    case CaseTag::OneDoubleOnly:
    case CaseTag::TwoDoublesOnly:
    case CaseTag::Quadruple: return "no real solution";
    case CaseTag::DoubleBetweenSimples: return "two solitary branches";
    case CaseTag::TripleWithSimpleAbove:
    case CaseTag::TripleWithSimpleBelow: return "solitary";
    default: return "periodic";
    }
}

} // namespace kbwave

#endif
