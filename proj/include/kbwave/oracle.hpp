#ifndef KBWAVE_ORACLE_HPP
#define KBWAVE_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "kbwave/quartic.hpp"

namespace kbwave {

/// Samples on a uniform grid xi[i] = xi0 + i*h. f_prime and g may be empty.
struct Profile {
    std::vector<double> xi;
    std::vector<double> f;
    std::vector<double> f_prime;
    std::vector<double> g;

    std::size_t size() const noexcept { return xi.size(); }
    double step() const noexcept { return xi.size() > 1 ? (xi.back() - xi.front()) / double(xi.size() - 1) : 0.0; }

    /// Throws unless the grid is uniform, increasing and all columns agree in length.
    void validate() const
    {
        const std::size_t n = xi.size();
        if (f.size() != n || (!f_prime.empty() && f_prime.size() != n) || (!g.empty() && g.size() != n))
            throw Error(ErrorKind::invalid_argument, "profile columns differ in length");
        if (n < 2) return;
        const double h = step();
        if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "profile grid not increasing");
        const double span = std::max(std::abs(xi.front()), std::abs(xi.back()));
        for (std::size_t i = 1; i < n; ++i) {
            const double expect = xi.front() + double(i) * h;
            if (std::abs(xi[i] - expect) > 1e-12 * std::max(span, h) + 1e-12 * h)
                throw Error(ErrorKind::invalid_argument, "profile grid not uniform");
        }
    }
};

struct TurningPoint {
    double xi;
    double f;
};

namespace detail {

struct OracleField {
    Params p;
    std::vector<double> simple;     // simple zeros
    std::vector<double> radius;     // second-order zone around each simple zero
    std::vector<double> multiple;   // zeros of multiplicity >= 2

    explicit OracleField(const Params& params) : p(params)
    {
        const auto r = roots_of_F(p);
        std::vector<double> all;
        for (const auto& e : r.entries()) all.push_back(e.value);
        for (const auto& e : r.entries()) {
            if (e.multiplicity == 1) {
                double d = std::numeric_limits<double>::infinity();
                for (double o : all)
                    if (o != e.value) d = std::min(d, std::abs(o - e.value));
                if (!std::isfinite(d)) d = 1.0;
                simple.push_back(e.value);
                radius.push_back(0.25 * d);
            } else {
                multiple.push_back(e.value);
            }
        }
    }

    bool near_simple(double f) const noexcept
    {
        for (std::size_t i = 0; i < simple.size(); ++i)
            if (std::abs(f - simple[i]) < radius[i]) return true;
        return false;
    }

    double slope(double f, double sigma) const { return sigma * std::sqrt(std::max(eval_F(p, f), 0.0)); }

    /// Slope for a start point; F below its own rounding bound counts as zero.
    double initial_slope(double f, double sigma) const
    {
        const auto a = F_coefficients(p);
        double bound = 0.0, pw = 1.0;
        for (std::size_t i = a.size(); i-- > 0;) {
            bound += std::abs(a[i]) * pw;
            pw *= std::abs(f);
        }
        const double F = eval_F(p, f);
        return F <= 16.0 * std::numeric_limits<double>::epsilon() * bound ? 0.0 : sigma * std::sqrt(F);
    }
    double accel(double f) const { return 0.5 * eval_F_derivative(p, f, 1); }

    void rk4_second(double& f, double& q, double h) const
    {
        const double k1f = q, k1q = accel(f);
        const double k2f = q + 0.5 * h * k1q, k2q = accel(f + 0.5 * h * k1f);
        const double k3f = q + 0.5 * h * k2q, k3q = accel(f + 0.5 * h * k2f);
        const double k4f = q + h * k3q, k4q = accel(f + h * k3f);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    }

    double rk4_first(double f, double sigma, double h) const
    {
        const double k1 = slope(f, sigma);
        const double k2 = slope(f + 0.5 * h * k1, sigma);
        const double k3 = slope(f + 0.5 * h * k2, sigma);
        const double k4 = slope(f + h * k3, sigma);
        return f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

inline constexpr double clamp_distance = 1e-10;
inline constexpr int event_bisections = 60;

/// March n steps of size h from f0; xi advances by `dir*h` per step.
inline void oracle_march(const OracleField& fld, double f0, double sigma, double xi_start, double dir, double h,
                         std::size_t n, std::vector<double>& f_out, std::vector<double>& fp_out,
                         std::vector<TurningPoint>* events)
{
    double f = f0;
    double q = fld.initial_slope(f0, sigma);
    bool clamped = false;
    for (double m : fld.multiple)
        if (std::abs(f - m) < clamp_distance) {
            f = m;
            q = 0.0;
            clamped = true;
        }
    f_out.push_back(f);
    fp_out.push_back(q);
    for (std::size_t i = 1; i <= n; ++i) {
        if (!clamped) {
            if (fld.near_simple(f)) {
                const double f_start = f, q_start = q;
                fld.rk4_second(f, q, h);
                if (q_start != 0.0 && q != 0.0 && (q_start < 0.0) != (q < 0.0)) {
                    double lo = 0.0, hi = h;
                    double fe = f_start;
                    for (int it = 0; it < event_bisections; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        double ft = f_start, qt = q_start;
                        fld.rk4_second(ft, qt, mid);
                        if ((qt < 0.0) == (q_start < 0.0)) lo = mid;
                        else hi = mid;
                        fe = ft;
                    }
                    if (events) events->push_back({xi_start + dir * (double(i - 1) * h + 0.5 * (lo + hi)), fe});
                }
                if (q != 0.0) sigma = q > 0.0 ? 1.0 : -1.0;
            } else {
                f = fld.rk4_first(f, sigma, h);
                q = fld.slope(f, sigma);
                for (double m : fld.multiple)
                    if (std::abs(f - m) < clamp_distance) {
                        f = m;
                        q = 0.0;
                        clamped = true;
                    }
            }
            if (!std::isfinite(f)) throw Error(ErrorKind::blow_up, "oracle state left the real line");
        }
        f_out.push_back(f);
        fp_out.push_back(q);
    }
}

} // namespace detail

/// Brute-force ground truth for (f')^2 = F(f) on [xi_begin, xi_end] with
/// f(0) = f0 and f'(0) = sign*sqrt(F(f0)). Requires xi_begin <= 0 <= xi_end.
///
/// Away from simple zeros the first-order form f' = sigma*sqrt(F) is stepped
/// (stable on the approach to a multiple zero); within a quarter root-gap of
/// a simple zero the smooth second-order form f'' = F'(f)/2 is stepped so the
/// reflection keeps fourth order.
inline Profile oracle_integrate(const Params& p, double f0, int sign, double xi_begin, double xi_end, double h,
                                std::vector<TurningPoint>* events = nullptr)
{
    if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "h must be positive");
    if (!(xi_begin <= 0.0 && 0.0 <= xi_end)) throw Error(ErrorKind::invalid_argument, "domain must contain 0");
    if (sign != 1 && sign != -1) throw Error(ErrorKind::invalid_argument, "sign must be +1 or -1");
    const double scale = std::max(1.0, std::abs(f0));
    if (eval_F(p, f0) < -1e-12 * std::pow(scale, 4))
        throw Error(ErrorKind::start_point_infeasible, "F(f0) < 0");

    const detail::OracleField fld(p);
    const auto n_fwd = static_cast<std::size_t>(std::llround(xi_end / h));
    const auto n_bwd = static_cast<std::size_t>(std::llround(-xi_begin / h));

    std::vector<double> ff, fpf, fb, fpb;
    std::vector<TurningPoint> ev_b;
    detail::oracle_march(fld, f0, double(sign), 0.0, 1.0, h, n_fwd, ff, fpf, events);
    if (n_bwd > 0) detail::oracle_march(fld, f0, -double(sign), 0.0, -1.0, h, n_bwd, fb, fpb, events ? &ev_b : nullptr);

    Profile out;
    const std::size_t n = n_bwd + n_fwd + 1;
    out.xi.resize(n);
    out.f.resize(n);
    out.f_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.xi[i] = (double(i) - double(n_bwd)) * h;
        if (i < n_bwd) {
            const std::size_t j = n_bwd - i;
            out.f[i] = fb[j];
            out.f_prime[i] = -fpb[j];
        } else {
            out.f[i] = ff[i - n_bwd];
            out.f_prime[i] = fpf[i - n_bwd];
        }
    }
    if (events) {
        events->insert(events->begin(), ev_b.rbegin(), ev_b.rend());
    }
    return out;
}

/// Forward-only form on [0, length].
inline Profile oracle_integrate(const Params& p, double f0, int sign, double length, double h)
{
    return oracle_integrate(p, f0, sign, 0.0, length, h);
}

struct ProfileDistance {
    double linf;
    double l2; // root-mean-square over compared samples
};

/// Distance of b from a on a's grid; b is resampled by a cubic B-spline when
/// the grids differ.
inline ProfileDistance compare_profiles(const Profile& a, const Profile& b)
{
    a.validate();
    b.validate();
    if (a.size() == 0 || b.size() == 0) throw Error(ErrorKind::disjoint_domains, "empty profile");
    const double ha = a.step(), hb = b.step();
    const bool same = a.size() == b.size() &&
                      std::abs(a.xi.front() - b.xi.front()) <= 1e-12 * std::max(1.0, std::abs(a.xi.front())) &&
                      std::abs(ha - hb) <= 1e-12 * std::max(ha, hb);
    double linf = 0.0, sum = 0.0;
    std::size_t count = 0;
    if (same) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = std::abs(a.f[i] - b.f[i]);
            linf = std::max(linf, d);
            sum += d * d;
            ++count;
        }
    } else {
        if (b.size() < 4) throw Error(ErrorKind::invalid_argument, "resampling needs at least 4 samples");
        boost::math::interpolators::cardinal_cubic_b_spline<double> spline(b.f.begin(), b.f.end(), b.xi.front(), hb);
        const double lo = b.xi.front(), hi = b.xi.back();
        const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.xi[i] < lo - slack || a.xi[i] > hi + slack) continue;
            const double d = std::abs(a.f[i] - spline(std::clamp(a.xi[i], lo, hi)));
            linf = std::max(linf, d);
            sum += d * d;
            ++count;
        }
        if (count == 0) throw Error(ErrorKind::disjoint_domains, "profiles do not overlap");
    }
    return {linf, std::sqrt(sum / double(count))};
}

} // namespace kbwave

#endif
