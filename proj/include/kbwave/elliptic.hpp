#ifndef KBWAVE_ELLIPTIC_HPP
#define KBWAVE_ELLIPTIC_HPP

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kbwave/error.hpp"

namespace kbwave {

/// Elliptic modulus k in [0, 1]. Values within `snap_tolerance` of an end
/// point are snapped to it exactly so the degenerate trig/hyperbolic closed
/// forms take over.
class Modulus {
public:
    static constexpr double snap_tolerance = 1e-12;

    constexpr Modulus() noexcept = default;

    explicit Modulus(double k) : k_(normalize(k)) {}

    /// Build from k^2. `clamp` widens the accepted overshoot past 0 and 1.
    static Modulus from_k2(double k2, double clamp = snap_tolerance)
    {
        if (!std::isfinite(k2) || k2 < -clamp || k2 > 1.0 + clamp)
            throw Error(ErrorKind::invalid_argument, "k^2 = " + std::to_string(k2) + " outside [0,1]");
        if (k2 <= 0.0) return Modulus(0.0);
        if (k2 >= 1.0) return Modulus(1.0);
        return Modulus(std::sqrt(k2));
    }

    double k() const noexcept { return k_; }
    double k2() const noexcept { return k_ * k_; }
    /// Complementary parameter 1 - k^2, formed without cancellation.
    double kp2() const noexcept { return (1.0 - k_) * (1.0 + k_); }
    bool is_zero() const noexcept { return k_ == 0.0; }
    bool is_one() const noexcept { return k_ == 1.0; }

private:
    static double normalize(double k)
    {
        if (!std::isfinite(k) || k < -snap_tolerance || k > 1.0 + snap_tolerance)
            throw Error(ErrorKind::invalid_argument, "modulus k = " + std::to_string(k) + " outside [0,1]");
        if (k <= snap_tolerance) return 0.0;
        if (k >= 1.0 - snap_tolerance) return 1.0;
        return k;
    }

    double k_ = 0.0;
};

struct JacobiTriple {
    double sn;
    double cn;
    double dn;
};

enum class DerivedKind { tn, inv_sn, inv_cn, dn_tn };

namespace detail {

inline constexpr int agm_max_iterations = 64;
inline constexpr double agm_tolerance = 1e-15;

inline double agm(double a, double b)
{
    for (int i = 0; i < agm_max_iterations; ++i) {
        if (std::abs(a - b) <= agm_tolerance * a) break;
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return 0.5 * (a + b);
}

} // namespace detail

/// Complete elliptic integral of the first kind.
inline double complete_K(Modulus k)
{
    if (k.is_one()) throw Error(ErrorKind::infinite_period, "K(1) diverges");
    return std::numbers::pi / (2.0 * detail::agm(1.0, std::sqrt(k.kp2())));
}

/// sn, cn, dn by Bulirsch's descending Landen (AGM) scheme.
inline JacobiTriple jacobi(double u, Modulus k)
{
    if (k.is_zero()) return {std::sin(u), std::cos(u), 1.0};
    if (k.is_one()) {
        const double s = 1.0 / std::cosh(u);
        return {std::tanh(u), s, s};
    }

    std::array<double, detail::agm_max_iterations> m{}, n{};
    double mc = k.kp2();
    double c = 0.0;
    int l = 0;
    for (double a = 1.0; l < detail::agm_max_iterations; ++l) {
        m[l] = a;
        n[l] = mc = std::sqrt(mc);
        c = 0.5 * (a + mc);
        if (!(std::abs(a - mc) > detail::agm_tolerance * a)) {
            ++l;
            break;
        }
        mc *= a;
        a = c;
    }

    const double x = u * c;
    double sn = std::sin(x), cn = std::cos(x), dn = 1.0;
    if (sn != 0.0) {
        double a = cn / sn;
        c *= a;
        while (l-- > 0) {
            const double b = m[l];
            a *= c;
            c *= dn;
            dn = (n[l] + a) / (b + a);
            a = c / b;
        }
        a = 1.0 / std::sqrt(c * c + 1.0);
        sn = sn < 0.0 ? -a : a;
        cn = c * sn;
    }
    return {sn, cn, dn};
}

inline constexpr double pole_tolerance = 1e-12;

inline double jacobi_derived(double u, Modulus k, DerivedKind kind)
{
    const JacobiTriple t = jacobi(u, k);
    const double denom = kind == DerivedKind::inv_sn ? t.sn : t.cn;
    if (std::abs(denom) < pole_tolerance)
        throw Error(ErrorKind::pole, "u = " + std::to_string(u));
    switch (kind) {
    case DerivedKind::tn: return t.sn / t.cn;
    case DerivedKind::inv_sn: return 1.0 / t.sn;
    case DerivedKind::inv_cn: return 1.0 / t.cn;
    case DerivedKind::dn_tn: return t.dn * t.sn / t.cn;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// u-derivatives of the triple.
inline JacobiTriple jacobi_prime(const JacobiTriple& t, Modulus k) noexcept
{
    return {t.cn * t.dn, -t.sn * t.dn, -k.k2() * t.sn * t.cn};
}

} // namespace kbwave

#endif
