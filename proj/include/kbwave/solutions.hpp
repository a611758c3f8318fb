#ifndef KBWAVE_SOLUTIONS_HPP
#define KBWAVE_SOLUTIONS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kbwave/elliptic.hpp"
#include "kbwave/oracle.hpp"
#include "kbwave/quartic.hpp"
#include "kbwave/reduction.hpp"

namespace kbwave {

enum class SolutionKind {
    Constant,
    SolitaryDouble,
    PeriodicTrig,
    SolitaryTriple,
    LimitSech,      // double zero midway between the simple zeros
    LimitSechRatio, // 2 f1 f3 = f2 (f1 + f3)
    LimitZeroDouble, // double zero at the origin
    Case1Cn,
    Case1Dn,
    Case2Sn,
    Case2Cn,
    Case2Dn,
    Case2InvSn,
    Case2InvCn,
    GeneralSn2,
};

inline std::string_view to_string(SolutionKind k) noexcept
{
    switch (k) {
    case SolutionKind::Constant: return "Constant";
    case SolutionKind::SolitaryDouble: return "SolitaryDouble";
    case SolutionKind::PeriodicTrig: return "PeriodicTrig";
    case SolutionKind::SolitaryTriple: return "SolitaryTriple";
    case SolutionKind::LimitSech: return "LimitSech";
    case SolutionKind::LimitSechRatio: return "LimitSechRatio";
    case SolutionKind::LimitZeroDouble: return "LimitZeroDouble";
    case SolutionKind::Case1Cn: return "Case1Cn";
    case SolutionKind::Case1Dn: return "Case1Dn";
    case SolutionKind::Case2Sn: return "Case2Sn";
    case SolutionKind::Case2Cn: return "Case2Cn";
    case SolutionKind::Case2Dn: return "Case2Dn";
    case SolutionKind::Case2InvSn: return "Case2InvSn";
    case SolutionKind::Case2InvCn: return "Case2InvCn";
    case SolutionKind::GeneralSn2: return "GeneralSn2";
    }
    return "?";
}

enum class Branch { upper, lower };

inline std::string_view to_string(Branch b) noexcept { return b == Branch::upper ? "upper" : "lower"; }

/// Coefficients of the closed form; only those meaningful for the kind are set.
struct DerivedCoefficients {
    std::optional<double> c1, c2;
    std::optional<double> alpha, beta, gamma;
    std::optional<double> a1, a2, b1, b2, a, b;
    std::optional<double> mu0, mu2;
    std::optional<double> nu0, nu2, nu4;
    std::optional<double> omega1, omega2, omega3;
    std::optional<double> Omega0, Omega1, Omega2, Omega3, Omega4;

    /// (name, value) for every populated field, in declaration order.
    std::vector<std::pair<std::string, double>> populated() const
    {
        std::vector<std::pair<std::string, double>> out;
        const auto add = [&](const char* n, const std::optional<double>& v) {
            if (v) out.emplace_back(n, *v);
        };
        add("c1", c1); add("c2", c2);
        add("alpha", alpha); add("beta", beta); add("gamma", gamma);
        add("a1", a1); add("a2", a2); add("b1", b1); add("b2", b2); add("a", a); add("b", b);
        add("mu0", mu0); add("mu2", mu2);
        add("nu0", nu0); add("nu2", nu2); add("nu4", nu4);
        add("omega1", omega1); add("omega2", omega2); add("omega3", omega3);
        add("Omega0", Omega0); add("Omega1", Omega1); add("Omega2", Omega2); add("Omega3", Omega3); add("Omega4", Omega4);
        return out;
    }
};

/// Machine-readable record of a departure from the literal printed formula.
struct ProvenanceNote {
    std::string code;
    std::string detail;
};

struct Sample {
    double f;
    double f_prime;
};

struct ValidationSummary {
    double residual = 0.0;    // max |f'^2 - F(f)| on the gate grid
    double oracle_linf = 0.0; // closed form vs RK4 oracle
    bool oracle_checked = false;
};

class ClosedFormSolution;

namespace detail {
struct SolutionBuilder;
}

/// Evaluable traveling-wave profile f(xi) with (f')^2 = F(f).
class ClosedFormSolution {
public:
    SolutionKind kind() const noexcept { return kind_; }
    const RootMultiset& roots() const noexcept { return roots_; }
    Params params() const { return params_; }
    double xi0() const noexcept { return xi0_; }
    Branch branch() const noexcept { return branch_; }
    /// Sign entering the printed +/- of the formula (+1 or -1).
    int sign() const noexcept { return sign_; }
    double speed() const noexcept { return params_.c; }
    const DerivedCoefficients& coeffs() const noexcept { return coeffs_; }
    const std::optional<Modulus>& modulus() const noexcept { return modulus_; }
    const std::vector<ProvenanceNote>& notes() const noexcept { return notes_; }
    /// False when the denominator can vanish somewhere on the real line.
    bool global() const noexcept { return global_; }
    std::optional<double> period() const noexcept { return period_; }
    std::optional<double> decay_rate() const noexcept { return decay_rate_; }
    const ValidationSummary& validation() const noexcept { return validation_; }
    /// max(1, max |root|), the natural size of f.
    double scale() const { return roots_.empty() ? std::max(1.0, std::abs(k_.base)) : roots_.scale(); }

    Sample evaluate(double xi) const;
    double operator()(double xi) const { return evaluate(xi).f; }

    ClosedFormSolution with_xi0(double xi0) const
    {
        ClosedFormSolution s = *this;
        s.xi0_ = xi0;
        return s;
    }

private:
    friend struct detail::SolutionBuilder;

    // Kernel data; meaning depends on kind (see evaluate).
    struct Kernel {
        double base = 0.0;
        double p = 0.0, q = 0.0, r = 0.0, s = 0.0;
        double rate = 0.0;
        double sgn = 1.0;
    };

    SolutionKind kind_ = SolutionKind::Constant;
    RootMultiset roots_;
    Params params_{};
    double xi0_ = 0.0;
    Branch branch_ = Branch::upper;
    int sign_ = 1;
    DerivedCoefficients coeffs_;
    std::optional<Modulus> modulus_;
    std::vector<ProvenanceNote> notes_;
    bool global_ = true;
    std::optional<double> period_;
    std::optional<double> decay_rate_;
    ValidationSummary validation_;
    Kernel k_;
};

inline Sample evaluate(const ClosedFormSolution& s, double xi) { return s.evaluate(xi); }

inline constexpr double singular_sample_tolerance = 1e-9;

namespace detail {

inline void check_denominator(double den, double size, double xi)
{
    if (!std::isfinite(den) || std::abs(den) < singular_sample_tolerance * std::max(size, 1e-300))
        throw Error(ErrorKind::singular_sample, "xi = " + std::to_string(xi));
}

/// 1/(A + B z) and its derivative for z with derivative dz.
inline Sample reciprocal(double A, double B, double z, double dz, double xi)
{
    const double den = A + B * z;
    check_denominator(den, std::abs(A) + std::abs(B * z), xi);
    return {1.0 / den, -B * dz / (den * den)};
}

} // namespace detail

inline Sample ClosedFormSolution::evaluate(double xi) const
{
    const double th = xi - xi0_;
    const Kernel& e = k_;
    switch (kind_) {
    case SolutionKind::Constant: return {e.base, 0.0};

    case SolutionKind::SolitaryDouble: {
        // f = fd + 2/(c1 + s c2 cosh(kt)); p=c1, q=c2, r = c1 + s c2
        const double x = e.rate * th;
        const double sc2 = e.sgn * e.q;
        if (std::abs(x) < 30.0) {
            const double sh = std::sinh(0.5 * x);
            const double den = e.r + 2.0 * sc2 * sh * sh;
            detail::check_denominator(den, std::abs(e.r) + std::abs(2.0 * sc2 * sh * sh), xi);
            const double dden = sc2 * e.rate * std::sinh(x);
            return {e.base + 2.0 / den, -2.0 * dden / (den * den)};
        }
        const double w = 1.0 / std::cosh(x), t = std::tanh(x);
        const double den = e.p * w + sc2;
        detail::check_denominator(den, std::abs(e.p * w) + std::abs(sc2), xi);
        return {e.base + 2.0 * w / den, -2.0 * sc2 * e.rate * w * t / (den * den)};
    }

    case SolutionKind::PeriodicTrig: {
        const double x = e.rate * th;
        const double sc2 = e.sgn * e.q;
        const double den = e.p + sc2 * std::sin(x);
        detail::check_denominator(den, std::abs(e.p) + std::abs(sc2), xi);
        return {e.base + 2.0 / den, -2.0 * sc2 * e.rate * std::cos(x) / (den * den)};
    }

    case SolutionKind::SolitaryTriple: {
        // f = ft + A/(1 + A^2 th^2 / 4)
        const double A = e.p;
        const double m = 0.25 * A * A;
        const double den = 1.0 + m * th * th;
        return {e.base + A / den, -A * 2.0 * m * th / (den * den)};
    }

    case SolutionKind::LimitSech: {
        const double x = e.rate * th;
        const double w = 1.0 / std::cosh(x);
        return {e.base + e.p * w, -e.p * e.rate * w * std::tanh(x)};
    }

    case SolutionKind::LimitSechRatio: {
        // f = f2 c2 / (c2 + s c1 sech)
        const double x = e.rate * th;
        const double w = 1.0 / std::cosh(x), t = std::tanh(x);
        const double sc1 = e.sgn * e.p;
        const double den = e.q + sc1 * w;
        detail::check_denominator(den, std::abs(e.q) + std::abs(sc1 * w), xi);
        return {e.base * e.q / den, e.base * e.q * sc1 * e.rate * w * t / (den * den)};
    }

    case SolutionKind::LimitZeroDouble: {
        // f = N w / (Q + P w), N = 2 f1 f3, P = f1 + f3, Q = s (f3 - f1)
        const double x = e.rate * th;
        const double w = 1.0 / std::cosh(x), t = std::tanh(x);
        const double den = e.q + e.p * w;
        detail::check_denominator(den, std::abs(e.q) + std::abs(e.p * w), xi);
        const double dw = -e.rate * w * t;
        return {e.r * w / den, e.r * dw * e.q / (den * den)};
    }

    case SolutionKind::Case1Cn:
    case SolutionKind::Case1Dn: {
        const Modulus k = *modulus_;
        const JacobiTriple j = jacobi(e.rate * th, k);
        const JacobiTriple d = jacobi_prime(j, k);
        const bool cn = kind_ == SolutionKind::Case1Cn;
        const double y = cn ? j.cn : j.dn;
        const double dy = cn ? d.cn : d.dn;
        return {e.base + e.p * y, e.p * e.rate * dy};
    }

    case SolutionKind::Case2Sn:
    case SolutionKind::Case2Cn:
    case SolutionKind::Case2Dn: {
        const Modulus k = *modulus_;
        const JacobiTriple j = jacobi(e.rate * th, k);
        const JacobiTriple d = jacobi_prime(j, k);
        double z = j.sn, dz = d.sn;
        if (kind_ == SolutionKind::Case2Cn) z = j.cn, dz = d.cn;
        if (kind_ == SolutionKind::Case2Dn) z = j.dn, dz = d.dn;
        return detail::reciprocal(e.p, e.q, z, e.rate * dz, xi);
    }

    case SolutionKind::Case2InvSn:
    case SolutionKind::Case2InvCn: {
        // u = z/(a z + b)
        const Modulus k = *modulus_;
        const JacobiTriple j = jacobi(e.rate * th, k);
        const JacobiTriple d = jacobi_prime(j, k);
        const bool sn = kind_ == SolutionKind::Case2InvSn;
        const double z = sn ? j.sn : j.cn;
        const double dz = e.rate * (sn ? d.sn : d.cn);
        const double den = e.p * z + e.q;
        detail::check_denominator(den, std::abs(e.p * z) + std::abs(e.q), xi);
        return {z / den, e.q * dz / (den * den)};
    }

    case SolutionKind::GeneralSn2: {
        // (p + q y)/(r + s y), y = sn^2
        const Modulus k = *modulus_;
        const JacobiTriple j = jacobi(e.rate * th, k);
        const double y = j.sn * j.sn;
        const double dy = 2.0 * j.sn * j.cn * j.dn * e.rate;
        const double den = e.r + e.s * y;
        detail::check_denominator(den, std::abs(e.r) + std::abs(e.s * y), xi);
        return {(e.p + e.q * y) / den, (e.q * e.r - e.p * e.s) * dy / (den * den)};
    }
    }
    return {std::nan(""), std::nan("")};
}

// ---------------------------------------------------------------------------
// Validation

struct GateSettings {
    double oracle_h = 1e-3;
    double oracle_tolerance = 1e-6;   // relative to scale
    double residual_tolerance = 1e-8; // relative to scale^4
    int residual_points = 2000;
    double pulse_half_width = 10.0;
    double max_period_span = 200.0;
};

/// Grid the gate and verification use by default: one period for periodic
/// kinds, [-10, 10] around xi0 otherwise.
inline std::pair<double, double> default_domain(const ClosedFormSolution& s, double pulse_half_width = 10.0)
{
    if (s.period()) return {s.xi0(), s.xi0() + *s.period()};
    return {s.xi0() - pulse_half_width, s.xi0() + pulse_half_width};
}

namespace detail {

inline double max_defining_residual(const ClosedFormSolution& s, const Params& p, double a, double b, int n,
                                    int* used = nullptr)
{
    double worst = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = a + (b - a) * double(i) / double(n - 1);
        Sample v;
        try {
            v = s.evaluate(xi);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::singular_sample) continue;
            throw;
        }
        ++count;
        const double r = std::abs(v.f_prime * v.f_prime - eval_F(p, v.f));
        if (!(r <= worst)) worst = r; // NaN propagates as failure
    }
    if (used) *used = count;
    return worst;
}

/// Closed form against the RK4 oracle started from f(xi0).
inline double oracle_distance(const ClosedFormSolution& s, double a, double b, double h)
{
    const Sample s0 = s.evaluate(s.xi0());
    const int sign = s0.f_prime < 0.0 ? -1 : 1;
    const double lo = std::min(0.0, a - s.xi0()), hi = std::max(0.0, b - s.xi0());
    const Profile prof = oracle_integrate(s.params(), s0.f, sign, lo, hi, h);
    double worst = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double xi = prof.xi[i] + s.xi0();
        if (xi < a - 1e-12 || xi > b + 1e-12) continue;
        double f;
        try {
            f = s.evaluate(xi).f;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::singular_sample) return std::numeric_limits<double>::infinity();
            throw;
        }
        const double d = std::abs(f - prof.f[i]);
        if (!(d <= worst)) worst = d;
    }
    return worst;
}

struct SolutionBuilder {
    ClosedFormSolution s;

    SolutionBuilder(SolutionKind kind, const RootMultiset& roots, double xi0)
    {
        s.kind_ = kind;
        s.roots_ = roots;
        if (roots.total_multiplicity() == 4) s.params_ = params_from_roots(roots);
        s.xi0_ = xi0;
    }

    ClosedFormSolution::Kernel& kernel() { return s.k_; }
    DerivedCoefficients& coeffs() { return s.coeffs_; }
    void branch(Branch b, int sign) { s.branch_ = b, s.sign_ = sign; }
    void modulus(Modulus k) { s.modulus_ = k; }
    void period(std::optional<double> t) { s.period_ = t; }
    void decay(std::optional<double> r) { s.decay_rate_ = r; }
    void global(bool g) { s.global_ = g; }
    void note(std::string code, std::string detail) { s.notes_.push_back({std::move(code), std::move(detail)}); }
    void params(const Params& p) { s.params_ = p; }

    /// Residual and oracle checks; fills the validation summary.
    bool gate(const GateSettings& g = {}, std::string* why = nullptr)
    {
        const double scale = s.scale();
        double a, b;
        if (s.period_) {
            a = s.xi0_;
            b = s.xi0_ + std::min(*s.period_, g.max_period_span);
        } else {
            a = s.xi0_ - g.pulse_half_width;
            b = s.xi0_ + g.pulse_half_width;
        }
        int used = 0;
        double res;
        try {
            res = max_defining_residual(s, s.params_, a, b, g.residual_points, &used);
        } catch (const Error& e) {
            if (why) *why = e.what();
            return false;
        }
        s.validation_.residual = res;
        if (used < g.residual_points || !(res < g.residual_tolerance * std::pow(scale, 4))) {
            if (why) *why = "defining residual " + std::to_string(res);
            return false;
        }
        double dist;
        try {
            dist = oracle_distance(s, a, b, g.oracle_h);
        } catch (const Error& e) {
            if (why) *why = e.what();
            return false;
        }
        s.validation_.oracle_linf = dist;
        s.validation_.oracle_checked = true;
        if (!(dist < g.oracle_tolerance * scale)) {
            if (why) *why = "oracle distance " + std::to_string(dist);
            return false;
        }
        return true;
    }
};

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline RootMultiset cluster_values(std::vector<double> v, double tol = 1e-9)
{
    std::sort(v.begin(), v.end());
    std::vector<RootEntry> e;
    for (double x : v) {
        if (!e.empty() && std::abs(x - e.back().value) <= tol * std::max(1.0, std::abs(x))) {
            auto& b = e.back();
            b.value = (b.value * b.multiplicity + x) / (b.multiplicity + 1);
            ++b.multiplicity;
        } else {
            e.push_back({x, 1});
        }
    }
    return RootMultiset(std::move(e));
}

inline int sign_of(Branch b) noexcept { return b == Branch::upper ? 1 : -1; }

} // namespace detail

// ---------------------------------------------------------------------------
// Hyperbolic, trigonometric and rational forms

inline ClosedFormSolution constant_solution(double value, const RootMultiset& roots)
{
    detail::SolutionBuilder b(SolutionKind::Constant, roots, 0.0);
    b.kernel().base = value;
    return b.s;
}

/// Pulse between two simple zeros decaying to the double zero between them.
/// `lower` touches f_lo at xi0, `upper` touches f_hi.
inline ClosedFormSolution solitary_double(double f_lo, double f_dbl, double f_hi, Branch branch = Branch::upper,
                                          double xi0 = 0.0)
{
    if (!(f_lo < f_dbl && f_dbl < f_hi))
        throw Error(ErrorKind::not_solitary_configuration, "need f_lo < f_dbl < f_hi");
    const double c1 = 1.0 / (f_lo - f_dbl) + 1.0 / (f_hi - f_dbl);
    const double c2 = 1.0 / (f_lo - f_dbl) - 1.0 / (f_hi - f_dbl);
    const int s = branch == Branch::lower ? 1 : -1;
    detail::SolutionBuilder b(SolutionKind::SolitaryDouble, RootMultiset({{f_lo, 1}, {f_dbl, 2}, {f_hi, 1}}), xi0);
    auto& k = b.kernel();
    k.base = f_dbl;
    k.p = c1;
    k.q = c2;
    k.r = 2.0 / ((branch == Branch::lower ? f_lo : f_hi) - f_dbl); // c1 + s c2
    k.rate = std::sqrt((f_dbl - f_lo) * (f_hi - f_dbl));
    k.sgn = s;
    b.coeffs().c1 = c1;
    b.coeffs().c2 = c2;
    b.branch(branch, s);
    b.decay(k.rate);
    return b.s;
}

/// Bounded oscillation between two simple zeros with the double zero outside
/// the band. `sign` multiplies c2.
inline ClosedFormSolution periodic_trig(double f_s1, double f_s2, double f_dbl, int sign = 1, double xi0 = 0.0)
{
    if (sign != 1 && sign != -1) throw Error(ErrorKind::invalid_argument, "sign must be +1 or -1");
    const double lo = std::min(f_s1, f_s2), hi = std::max(f_s1, f_s2);
    if (!(lo < hi) || (f_dbl >= lo && f_dbl <= hi))
        throw Error(ErrorKind::not_periodic_configuration, "double zero must lie outside the simple-zero band");
    const double c1 = 1.0 / (f_s1 - f_dbl) + 1.0 / (f_s2 - f_dbl);
    const double c2 = 1.0 / (f_s1 - f_dbl) - 1.0 / (f_s2 - f_dbl);
    if (!(std::abs(c2) < std::abs(c1)))
        throw Error(ErrorKind::singular_periodic_branch, "|c2| >= |c1|: denominator vanishes");
    const double arg = (f_dbl - f_s1) * (f_s2 - f_dbl);
    std::vector<double> v{f_s1, f_s2, f_dbl, f_dbl};
    detail::SolutionBuilder b(SolutionKind::PeriodicTrig, RootMultiset::from_values(v), xi0);
    auto& k = b.kernel();
    k.base = f_dbl;
    k.p = c1;
    k.q = c2;
    k.rate = std::sqrt(std::abs(arg));
    k.sgn = sign;
    b.coeffs().c1 = c1;
    b.coeffs().c2 = c2;
    b.branch(sign > 0 ? Branch::upper : Branch::lower, sign);
    b.period(2.0 * std::numbers::pi / k.rate);
    if (arg < 0.0)
        b.note("abs_frequency", "frequency uses sqrt|(f_dbl - f_s1)(f_s2 - f_dbl)|; the signed product is " +
                                    detail::fmt(arg));
    return b.s;
}

/// Algebraic pulse from a simple zero decaying to a triple zero.
inline ClosedFormSolution solitary_triple(double f_triple, double f_simple, double xi0 = 0.0)
{
    if (!(f_triple != f_simple) || !std::isfinite(f_triple) || !std::isfinite(f_simple))
        throw Error(ErrorKind::invalid_argument, "triple and simple zeros must differ");
    detail::SolutionBuilder b(SolutionKind::SolitaryTriple,
                              RootMultiset::from_values({f_triple, f_triple, f_triple, f_simple}), xi0);
    b.kernel().base = f_triple;
    b.kernel().p = f_simple - f_triple;
    b.branch(f_simple > f_triple ? Branch::upper : Branch::lower, f_simple > f_triple ? 1 : -1);
    b.decay(std::sqrt(std::abs(eval_F_derivative(b.s.params(), f_triple, 3)) / 6.0));
    return b.s;
}

enum class LimitCase { a, b, c, d };

inline constexpr double limiting_tolerance = 1e-10;

/// Reduced forms of the double-zero pulse under the special root relations.
inline ClosedFormSolution limiting_form(LimitCase which, double f1, double f2, double f3, Branch branch = Branch::upper,
                                        double xi0 = 0.0)
{
    const double scale = std::max({1.0, std::abs(f1), std::abs(f2), std::abs(f3)});
    const double tol = limiting_tolerance * scale;
    const int s = branch == Branch::lower ? 1 : -1; // same convention as solitary_double
    const RootMultiset roots = detail::cluster_values({f1, f2, f2, f3}, 0.0);

    switch (which) {
    case LimitCase::a: {
        if (!(f1 < f2 && f2 < f3)) throw Error(ErrorKind::not_solitary_configuration, "need f1 < f2 < f3");
        if (std::abs(f1 + f3 - 2.0 * f2) > tol) throw Error(ErrorKind::limiting_constraint_unmet, "f1 + f3 != 2 f2");
        detail::SolutionBuilder b(SolutionKind::LimitSech, roots, xi0);
        auto& k = b.kernel();
        k.base = f2;
        k.p = -double(s) * 2.0 * (f2 - f1) * (f3 - f2) / (f3 - f1);
        k.rate = std::sqrt((f2 - f1) * (f3 - f2));
        b.branch(branch, s);
        b.decay(k.rate);
        return b.s;
    }
    case LimitCase::b: {
        if (!(f1 < f2 && f2 < f3)) throw Error(ErrorKind::not_solitary_configuration, "need f1 < f2 < f3");
        if (std::abs(2.0 * f1 * f3 - f2 * (f1 + f3)) > tol * scale)
            throw Error(ErrorKind::limiting_constraint_unmet, "2 f1 f3 != f2 (f1 + f3)");
        const double c1 = 1.0 / (f1 - f2) + 1.0 / (f3 - f2);
        const double c2 = 1.0 / (f1 - f2) - 1.0 / (f3 - f2);
        detail::SolutionBuilder b(SolutionKind::LimitSechRatio, roots, xi0);
        auto& k = b.kernel();
        k.base = f2;
        k.p = c1;
        k.q = c2;
        k.sgn = s;
        k.rate = std::sqrt((f2 - f1) * (f3 - f2));
        b.coeffs().c1 = c1;
        b.coeffs().c2 = c2;
        b.branch(branch, s);
        b.decay(k.rate);
        b.note("limit_b_scale", "reduced form carries the factor f2: f = f2 c2 / (c2 + s c1 sech)");
        return b.s;
    }
    case LimitCase::c: {
        if (!(f1 < f2 && f2 < f3)) throw Error(ErrorKind::not_solitary_configuration, "need f1 < f2 < f3");
        if (std::abs(f2) > tol) throw Error(ErrorKind::limiting_constraint_unmet, "f2 != 0");
        detail::SolutionBuilder b(SolutionKind::LimitZeroDouble, detail::cluster_values({f1, 0.0, 0.0, f3}, 0.0), xi0);
        auto& k = b.kernel();
        k.r = 2.0 * f1 * f3;
        k.p = f1 + f3;
        k.q = double(s) * (f3 - f1);
        k.rate = std::sqrt(-f1 * f3);
        b.branch(branch, s);
        b.decay(k.rate);
        return b.s;
    }
    case LimitCase::d: {
        const bool to_lo = std::abs(f2 - f1) <= tol, to_hi = std::abs(f3 - f2) <= tol;
        if (!(to_lo || to_hi) || (to_lo && to_hi))
            throw Error(ErrorKind::limiting_constraint_unmet, "f2 must merge with exactly one of f1, f3");
        if (to_hi) {
            if (branch == Branch::lower) return solitary_triple(f3, f1, xi0);
            auto c = constant_solution(f3, detail::cluster_values({f1, f3, f3, f3}, 0.0));
            return c;
        }
        if (branch == Branch::lower)
            return constant_solution(f1, detail::cluster_values({f1, f1, f1, f3}, 0.0));
        return solitary_triple(f1, f3, xi0);
    }
    }
    throw Error(ErrorKind::invalid_argument, "unknown limiting case");
}

// ---------------------------------------------------------------------------
// Elliptic families

enum class Case1Kind { cn, dn };
enum class Case2Kind { sn, cn, dn, inv_sn, inv_cn, tn, dn_tn };

inline std::string_view to_string(Case2Kind k) noexcept
{
    switch (k) {
    case Case2Kind::sn: return "sn";
    case Case2Kind::cn: return "cn";
    case Case2Kind::dn: return "dn";
    case Case2Kind::inv_sn: return "inv_sn";
    case Case2Kind::inv_cn: return "inv_cn";
    case Case2Kind::tn: return "tn";
    case Case2Kind::dn_tn: return "dn_tn";
    }
    return "?";
}

inline constexpr double modulus_clamp = 1e-9;

namespace detail {

inline void elliptic_period(SolutionBuilder& b, Modulus k, double beta, double quarter_multiple)
{
    if (k.is_one()) {
        b.period(std::nullopt);
        b.decay(beta);
    } else {
        b.period(quarter_multiple * complete_K(k) / beta);
    }
}

inline ClosedFormSolution gate_or_throw(SolutionBuilder& b, ErrorKind kind)
{
    std::string why;
    if (!b.gate({}, &why)) throw Error(kind, std::string(to_string(b.s.kind())) + " failed validation: " + why);
    return b.s;
}

} // namespace detail

/// u = gamma + alpha y(beta xi), y = cn or dn, fourth zero f1 + f3 - f2.
/// `upper` takes alpha > 0 so the profile touches f3 at xi0.
inline ClosedFormSolution case1(Case1Kind kind, double f1, double f2, double f3, Branch branch = Branch::upper,
                                double xi0 = 0.0)
{
    if (!(f1 <= f2 && f2 <= f3)) throw Error(ErrorKind::invalid_argument, "need f1 <= f2 <= f3");
    const double f4 = f1 + f3 - f2;
    const RootMultiset roots = detail::cluster_values({f1, f2, f3, f4});
    if (f1 == f3) {
        auto c = constant_solution(f1, roots);
        return c;
    }
    const int s = detail::sign_of(branch);
    const double gamma = 0.5 * (f1 + f3);
    const double alpha = s * 0.5 * (f3 - f1);
    const double prod = (f2 - f1) * (f3 - f2);

    Modulus k;
    double beta;
    SolutionKind sk;
    if (kind == Case1Kind::cn) {
        if (!(prod > 0.0)) throw Error(ErrorKind::branch_infeasible, "cn needs f1 < f2 < f3");
        const double k2 = (f1 - f3) * (f1 - f3) / (4.0 * prod);
        if (k2 > 1.0 + modulus_clamp)
            throw Error(ErrorKind::branch_infeasible,
                        "cn modulus k^2 = " + detail::fmt(k2) + " > 1; the dn kind covers this band");
        k = Modulus::from_k2(k2, modulus_clamp);
        beta = std::sqrt(prod);
        sk = SolutionKind::Case1Cn;
    } else {
        k = Modulus(2.0 * std::sqrt(prod) / (f3 - f1));
        beta = 0.5 * (f3 - f1);
        sk = SolutionKind::Case1Dn;
    }

    detail::SolutionBuilder b(sk, roots, xi0);
    auto& ker = b.kernel();
    ker.base = gamma;
    ker.p = alpha;
    ker.rate = beta;
    b.modulus(k);
    b.branch(branch, s);
    const double e1 = f1 + f2 + f3 + f4;
    const double e2 = f1 * f2 + f1 * f3 + f1 * f4 + f2 * f3 + f2 * f4 + f3 * f4;
    auto& c = b.coeffs();
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.mu2 = 0.375 * e1 * e1 - e2;
    c.mu0 = e1 * e1 / 16.0 * e2 - 5.0 / 256.0 * std::pow(e1, 4) - f1 * f2 * f3 * f4;
    detail::elliptic_period(b, k, beta, kind == Case1Kind::cn ? 4.0 : 2.0);
    return detail::gate_or_throw(b, ErrorKind::branch_infeasible);
}

struct Infeasible {
    std::string reason;
};

using Case2Result = std::variant<ClosedFormSolution, Infeasible>;

/// u = 1/(a + b y(beta xi)) and the inverse-kernel forms u = z/(a z + b),
/// fourth zero f1 f2 f3 / (f2 f3 + f1 f2 - f1 f3).
inline Case2Result case2(Case2Kind kind, double f1, double f2, double f3, double xi0 = 0.0)
{
    if (kind == Case2Kind::tn)
        return Infeasible{"tn kernel: b^2 = nu0/(nu2 - nu4) < 0, b is not real for any k"};
    if (kind == Case2Kind::dn_tn)
        return Infeasible{"dn*tn kernel: k^2 >= 1 on every real branch; no real solution for k in [0,1]"};
    if (f1 == 0.0 || f3 == 0.0) throw Error(ErrorKind::invalid_argument, "f1 and f3 must be nonzero");
    const double D = f2 * f3 + f1 * f2 - f1 * f3;
    if (D == 0.0) throw Error(ErrorKind::invalid_argument, "f2 f3 + f1 f2 - f1 f3 = 0: fourth zero undefined");
    if (f1 == f3) return Infeasible{"f1 = f3 gives the constant solution u = f1"};

    const double f4 = f1 * f2 * f3 / D;
    const double P = f1 * f3;
    const double a = (f1 + f3) / (2.0 * P);
    const double bb = (f1 - f3) / (2.0 * P);
    const double lam = f2 * (f1 + f3) - 2.0 * P;
    const double g = (f1 - f2) * (f2 - f3);
    const double fd = f2 * (f1 - f3);

    double beta2 = 0.0, k2 = 0.0, quarter = 4.0;
    SolutionKind sk{};
    switch (kind) {
    case Case2Kind::sn:
        beta2 = -lam * lam / (4.0 * D);
        k2 = fd * fd / (lam * lam);
        sk = SolutionKind::Case2Sn;
        break;
    case Case2Kind::cn:
        beta2 = P * g / D;
        k2 = fd * fd / (4.0 * P * g);
        sk = SolutionKind::Case2Cn;
        break;
    case Case2Kind::dn:
        beta2 = fd * fd / (4.0 * D);
        k2 = 4.0 * P * g / (fd * fd);
        sk = SolutionKind::Case2Dn;
        quarter = 2.0;
        break;
    case Case2Kind::inv_sn:
        beta2 = -fd * fd / (4.0 * D);
        k2 = (lam / fd) * (lam / fd);
        sk = SolutionKind::Case2InvSn;
        break;
    case Case2Kind::inv_cn:
        beta2 = -P * g / D;
        k2 = -lam * lam / (4.0 * P * g);
        sk = SolutionKind::Case2InvCn;
        break;
    default: break;
    }
    if (!std::isfinite(beta2) || !(beta2 > 0.0))
        return Infeasible{"beta^2 = " + detail::fmt(beta2) + " is not positive"};
    if (!std::isfinite(k2) || k2 < -modulus_clamp || k2 > 1.0 + modulus_clamp)
        return Infeasible{"k^2 = " + detail::fmt(k2) + " outside [0, 1]"};

    const Modulus k = Modulus::from_k2(k2, modulus_clamp);
    const double beta = std::sqrt(beta2);
    detail::SolutionBuilder b(sk, detail::cluster_values({f1, f2, f3, f4}), xi0);
    auto& ker = b.kernel();
    ker.p = a;
    ker.q = bb;
    ker.rate = beta;
    b.modulus(k);

    auto& c = b.coeffs();
    c.a1 = 2.0 * P;
    c.a2 = f1 + f3;
    c.b2 = f1 - f3;
    c.a = a;
    c.b = bb;
    c.beta = beta;
    const double pi4 = f1 * f2 * f3 * f4;
    if (pi4 != 0.0) {
        const double s3 = f1 * f2 * f3 + f1 * f2 * f4 + f1 * f3 * f4 + f2 * f3 * f4;
        const double s1 = f1 + f2 + f3 + f4;
        c.nu4 = -bb * bb * pi4;
        c.nu2 = s3 * s3 / (8.0 * pi4) - 2.0 * pi4 * s1 / s3;
        c.nu0 = s3 * s1 / (8.0 * pi4) - std::pow(s3, 4) / (256.0 * std::pow(pi4, 3)) - 1.0;
    }

    // denominator sign range of the kernel
    if (kind == Case2Kind::inv_sn || kind == Case2Kind::inv_cn) b.global(std::abs(bb) > std::abs(a));
    else if (kind == Case2Kind::dn) b.global((a + bb) * (a + bb * std::sqrt(k.kp2())) > 0.0);
    else b.global(std::abs(a) > std::abs(bb));

    detail::elliptic_period(b, k, beta, quarter);
    std::string why;
    if (!b.gate({}, &why)) return Infeasible{"validation failed: " + why};
    return b.s;
}

/// Convenience: unwraps a case2 result or throws branch_infeasible.
inline ClosedFormSolution case2_or_throw(Case2Kind kind, double f1, double f2, double f3, double xi0 = 0.0)
{
    auto r = case2(kind, f1, f2, f3, xi0);
    if (auto* inf = std::get_if<Infeasible>(&r)) throw Error(ErrorKind::branch_infeasible, inf->reason);
    return std::get<ClosedFormSolution>(r);
}

class UnresolvedBranch : public Error {
public:
    UnresolvedBranch(const std::string& detail, ClosedFormSolution candidate)
        : Error(ErrorKind::unresolved_branch, detail), candidate_(std::move(candidate))
    {}
    const ClosedFormSolution& candidate() const noexcept { return candidate_; }

private:
    ClosedFormSolution candidate_;
};

namespace detail {

/// f = (a + b R y)/(1 + R y), y = sn^2(beta xi, k).
inline ClosedFormSolution sn2_candidate(const RootMultiset& roots, double a, double bv, double ratio, double k2,
                                        double beta, double xi0, std::vector<ProvenanceNote>& log)
{
    if (k2 > 1.0 + modulus_clamp) {
        // sn(u, k) = sn(k u, 1/k)/k  =>  sn^2 picks up 1/k^2
        const double kk = std::sqrt(k2);
        log.push_back({"reciprocal_modulus", "printed k^2 = " + fmt(k2) + " > 1; used modulus 1/k"});
        ratio /= k2;
        beta *= kk;
        k2 = 1.0 / k2;
    }
    SolutionBuilder b(SolutionKind::GeneralSn2, roots, xi0);
    auto& ker = b.kernel();
    ker.p = a;
    ker.q = bv * ratio;
    ker.r = 1.0;
    ker.s = ratio;
    ker.rate = beta;
    const Modulus k = Modulus::from_k2(std::clamp(k2, 0.0, 1.0), 1.0);
    b.modulus(k);
    auto& c = b.coeffs();
    c.a1 = a;
    c.a2 = 1.0;
    c.b1 = bv * ratio;
    c.b2 = ratio;
    c.a = a;
    c.b = bv;
    c.beta = beta;
    const Params p = b.s.params();
    const double cc = p.c, d1 = p.d1, d2 = p.d2, d3 = p.d3;
    const double A = a, B = bv;
    c.omega3 = 2 * A * d3 - cc * B * B * B + 8 * d3 - 3 * A * cc * B * B + 2 * d1 * A * B + 2 * d1 * B * B -
               2 * cc * cc * A * B - 2 * cc * cc * B * B + 6 * d2 * B - A * B * B * B;
    c.omega2 = 2 * d1 * A * A + 2 * d1 * B * B - 2 * cc * cc * A * A - 2 * cc * cc * B * B + 24 * d3 -
               6 * cc * A * A * B - 6 * cc * A * B * B + 12 * d2 * A + 12 * d2 * B - 3 * A * A * B * B +
               8 * d1 * A * B - 8 * cc * cc * A * B;
    c.omega1 = 2 * d2 * B - cc * A * A * A + 8 * d3 - 3 * B * cc * A * A + 2 * d1 * A * B + 2 * d1 * A * A -
               2 * cc * cc * A * B - 2 * cc * cc * A * A + 6 * d2 * A - B * A * A * A;
    const double a1 = a, a2 = 1.0, b1 = bv * ratio, b2 = ratio;
    c.Omega4 = std::pow(b2, 4) * eval_F(p, B);
    c.Omega0 = std::pow(a2, 4) * eval_F(p, A);
    c.Omega3 = 4 * (2 * d2 * a1 * b2 * b2 * b2 - cc * b1 * b1 * b1 * a2 + 8 * d3 * a2 * b2 * b2 * b2 -
                    3 * cc * a1 * b1 * b1 * b2 + 2 * d1 * a1 * b1 * b2 * b2 + 2 * d1 * b1 * b1 * a2 * b2 -
                    2 * cc * cc * a1 * b1 * b2 * b2 - 2 * cc * cc * b1 * b1 * a2 * b2 + 6 * d2 * b1 * a2 * b2 * b2 -
                    a1 * b1 * b1 * b1);
    c.Omega2 = 4 * d1 * a1 * a1 * b2 * b2 + 4 * d1 * b1 * b1 * a2 * a2 - 4 * cc * cc * a1 * a1 * b2 * b2 -
               4 * cc * cc * b1 * b1 * a2 * a2 + 48 * d3 * a2 * a2 * b2 * b2 - 12 * cc * a1 * a1 * b1 * b2 -
               12 * cc * a1 * b1 * b1 * a2 + 24 * d2 * a1 * a2 * b2 * b2 + 24 * d2 * b1 * a2 * a2 * b2 -
               6 * a1 * a1 * b1 * b1 + 16 * d1 * a1 * b1 * a2 * b2 - 16 * cc * cc * a1 * b1 * a2 * b2;
    c.Omega1 = 4 * (2 * d2 * b1 * a2 * a2 * a2 - cc * a1 * a1 * a1 * b2 + 8 * d3 * a2 * a2 * a2 * b2 -
                    3 * cc * a1 * a1 * b1 * a2 + 2 * d1 * a1 * a1 * a2 * b2 + 2 * d1 * a1 * b1 * a2 * a2 -
                    2 * cc * cc * a1 * a1 * a2 * b2 - 2 * cc * cc * a1 * b1 * a2 * a2 + 6 * d2 * a1 * a2 * a2 * b2 -
                    a1 * a1 * a1 * b1);
    b.global(1.0 * (1.0 + ratio) > 0.0);
    if (k.is_one()) b.period(std::nullopt);
    else b.period(2.0 * complete_K(k) / beta);
    for (const auto& n : log) b.note(n.code, n.detail);
    return b.s;
}

} // namespace detail

/// Periodic orbit through four distinct simple zeros starting at the zero
/// selected by `initial_index` (1..4). Each candidate is gated; when the
/// literal printed assignment fails, the remaining band assignments are tried
/// and the accepted correction is noted.
inline ClosedFormSolution general_sn2(std::array<double, 4> f, int initial_index, double xi0 = 0.0)
{
    if (initial_index < 1 || initial_index > 4) throw Error(ErrorKind::invalid_argument, "initial_index must be 1..4");
    for (double v : f)
        if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "roots must be finite");
    if (!(f[0] < f[1] && f[1] < f[2] && f[2] < f[3]))
        throw Error(ErrorKind::invalid_argument, "need four distinct sorted roots");
    const RootMultiset roots = RootMultiset::from_values({f[0], f[1], f[2], f[3]});
    const double f1 = f[0], f2 = f[1], f3 = f[2], f4 = f[3];

    double a = 0, bv = 0, ratio = 0, k2 = 0;
    const double beta_printed = 0.5 * std::sqrt((f1 - f3) * (f2 - f4));
    switch (initial_index) {
    case 1: a = f1, bv = f2, ratio = (f4 - f1) / (f2 - f4), k2 = (f2 - f3) * (f1 - f4) / ((f1 - f3) * (f2 - f4)); break;
    case 2: a = f2, bv = f1, ratio = (f3 - f2) / (f1 - f3), k2 = (f2 - f4) * (f1 - f3) / ((f1 - f4) * (f2 - f3)); break;
    case 3: a = f3, bv = f4, ratio = (f2 - f3) / (f4 - f2), k2 = (f4 - f1) * (f3 - f2) / ((f3 - f1) * (f4 - f2)); break;
    case 4: a = f4, bv = f3, ratio = (f1 - f4) / (f3 - f1), k2 = (f3 - f2) * (f4 - f1) / ((f3 - f1) * (f4 - f2)); break;
    }

    std::vector<ProvenanceNote> log;
    std::optional<ClosedFormSolution> raw;
    if (k2 >= -modulus_clamp) {
        auto cand = detail::sn2_candidate(roots, a, bv, ratio, k2, beta_printed, xi0, log);
        raw = cand;
        detail::SolutionBuilder b(SolutionKind::GeneralSn2, roots, xi0);
        b.s = cand;
        std::string why;
        if (b.gate({}, &why)) return b.s;
        log.push_back({"printed_branch_rejected", "printed assignment a=" + detail::fmt(a) + ", b=" + detail::fmt(bv) +
                                                      " failed validation: " + why});
    } else {
        log.push_back({"printed_branch_rejected", "printed k^2 = " + detail::fmt(k2) + " < 0"});
    }

    // Search: y in {0, 1, 1/k^2, inf} maps to {a, p, r, b}.
    std::vector<double> others;
    for (double v : f)
        if (v != a) others.push_back(v);
    std::array<int, 3> idx{0, 1, 2};
    do {
        const double p = others[idx[0]], r = others[idx[1]], bb = others[idx[2]];
        const double R = (a - p) / (p - bb);
        const double kk2 = 1.0 - (r - p) * (bb - a) / ((r - a) * (bb - p));
        if (!(kk2 > 0.0 && kk2 < 1.0)) continue;
        const double beta2 = R * (bb - p) * (bb - r) / (4.0 * kk2);
        if (!(beta2 > 0.0)) continue;
        std::vector<ProvenanceNote> trial = log;
        trial.push_back({"band_assignment_corrected",
                         "start " + detail::fmt(a) + ", band partner " + detail::fmt(p) + ", pole-side zero " +
                             detail::fmt(bb) + ", k^2 = " + detail::fmt(kk2) + ", beta = " + detail::fmt(std::sqrt(beta2))});
        auto cand = detail::sn2_candidate(roots, a, bb, R, kk2, std::sqrt(beta2), xi0, trial);
        detail::SolutionBuilder b(SolutionKind::GeneralSn2, roots, xi0);
        b.s = cand;
        if (b.gate()) return b.s;
    } while (std::next_permutation(idx.begin(), idx.end()));

    throw UnresolvedBranch("no validated sn^2 branch from zero " + detail::fmt(a),
                           raw ? *raw : detail::sn2_candidate(roots, a, bv, 0.0, 0.0, 1.0, xi0, log));
}

// ---------------------------------------------------------------------------

/// Traveling pair (u, v) of the system built from a profile.
struct TravelingPair {
    ClosedFormSolution profile;
    Params params;

    double u(double x, double t) const { return profile.evaluate(x - params.c * t).f; }
    double v(double x, double t) const { return g_from_f(u(x, t), params.c, params.d1); }
};

inline TravelingPair u_v_pair(const ClosedFormSolution& s, const Params& p) { return {s, p}; }
inline TravelingPair u_v_pair(const ClosedFormSolution& s) { return {s, s.params()}; }

struct Discrepancy {
    std::string fixture;
    std::string code;
    std::string detail;
};

/// Departures from the printed formulas found on canonical fixtures.
inline std::vector<Discrepancy> discrepancy_report()
{
    std::vector<Discrepancy> out;
    const auto collect = [&](const std::string& name, const ClosedFormSolution& s) {
        for (const auto& n : s.notes()) out.push_back({name, n.code, n.detail});
    };
    collect("periodic_trig(-1, 1/3, 1)", periodic_trig(-1.0, 1.0 / 3.0, 1.0, -1));
    collect("limiting_form(b, 1.5, 2, 3)", limiting_form(LimitCase::b, 1.5, 2.0, 3.0));
    for (int i = 1; i <= 4; ++i)
        collect("general_sn2((0,1,2,3), " + std::to_string(i) + ")", general_sn2({0.0, 1.0, 2.0, 3.0}, i));
    try {
        case1(Case1Kind::cn, -3.0, -2.5, -1.0);
    } catch (const Error& e) {
        out.push_back({"case1(cn, -3, -2.5, -1)", "cn_modulus_above_one", e.what()});
    }
    out.push_back({"limiting_form(d)", "branch_dependent_limit",
                   "f2 -> f1 on the upper branch and f2 -> f3 on the lower branch give the triple-zero pulse; the "
                   "other branch collapses to the constant"});
    return out;
}

} // namespace kbwave

#endif
