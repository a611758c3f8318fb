#ifndef KBWAVE_REDUCTION_HPP
#define KBWAVE_REDUCTION_HPP

#include <cmath>
#include <string>
#include <string_view>

#include "kbwave/quartic.hpp"

namespace kbwave {

/// Second field of the traveling pair.
inline double g_from_f(double f, double c, double d1) noexcept
{
    return -c * f - 0.75 * f * f + d1;
}

enum class LocalKind {
    SimpleMin,
    SimpleMax,
    DoubleExponentialApproach,
    TripleAlgebraicApproach,
    QuadrupleConstantOnly,
};

inline std::string_view to_string(LocalKind k) noexcept
{
    switch (k) {
    case LocalKind::SimpleMin: return "SimpleMin";
    case LocalKind::SimpleMax: return "SimpleMax";
    case LocalKind::DoubleExponentialApproach: return "DoubleExponentialApproach";
    case LocalKind::TripleAlgebraicApproach: return "TripleAlgebraicApproach";
    case LocalKind::QuadrupleConstantOnly: return "QuadrupleConstantOnly";
    }
    return "?";
}

struct LocalForm {
    LocalKind kind;
    /// sqrt(F''/2) for a double zero, sqrt(|F'''|/6) for a triple zero.
    double rate = 0.0;
    /// f'' at a simple turning point, F'(f1)/2.
    double curvature = 0.0;
    /// Triple zero: the orbit lies above the zero iff F''' > 0.
    bool approach_from_above = false;
};

inline constexpr double zero_membership_tolerance = 1e-8;

inline LocalForm local_behavior(double f1, int mult, const Params& p)
{
    const double scale = std::max(1.0, std::pow(std::abs(f1), 4));
    if (std::abs(eval_F(p, f1)) > zero_membership_tolerance * scale)
        throw Error(ErrorKind::invalid_argument, "f1 = " + std::to_string(f1) + " is not a zero of F");
    switch (mult) {
    case 1: {
        const double d = eval_F_derivative(p, f1, 1);
        if (d == 0.0) throw Error(ErrorKind::invalid_argument, "F'(f1) = 0 at a simple zero");
        return {d > 0.0 ? LocalKind::SimpleMin : LocalKind::SimpleMax, 0.0, 0.5 * d, false};
    }
    case 2: {
        const double d2 = eval_F_derivative(p, f1, 2);
        if (!(d2 > 0.0)) throw Error(ErrorKind::no_real_orbit, "F''(f1) <= 0");
        return {LocalKind::DoubleExponentialApproach, std::sqrt(0.5 * d2), 0.0, false};
    }
    case 3: {
        const double d3 = eval_F_derivative(p, f1, 3);
        return {LocalKind::TripleAlgebraicApproach, std::sqrt(std::abs(d3) / 6.0), 0.0, d3 > 0.0};
    }
    case 4: return {LocalKind::QuadrupleConstantOnly};
    default: throw Error(ErrorKind::invalid_argument, "multiplicity must be 1..4");
    }
}

/// Vanishing-boundary reduction: every constant is zero and
/// F = -f^2 (f + 2c)^2.
struct VanishingReduction {
    Params params;
    double zero_a = 0.0;
    double zero_b = 0.0;
    /// Expanded F matches the factored form coefficient by coefficient.
    bool certified = false;

    double factored(double f) const noexcept
    {
        const double s = f + 2.0 * params.c;
        return -f * f * s * s;
    }
};

inline VanishingReduction vanishing_reduction_l2(double c)
{
    VanishingReduction r;
    r.params = Params{c, 0.0, 0.0, 0.0};
    r.zero_b = -2.0 * c;
    const auto a = F_coefficients(r.params);
    // -f^2(f^2 + 4c f + 4c^2)
    r.certified = a[0] == -1.0 && a[1] == -4.0 * c && a[2] == -4.0 * (c * c) && a[3] == 0.0 && a[4] == 0.0;
    return r;
}

} // namespace kbwave

#endif
