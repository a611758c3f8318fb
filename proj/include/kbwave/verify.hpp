#ifndef KBWAVE_VERIFY_HPP
#define KBWAVE_VERIFY_HPP

#include <cmath>
#include <limits>
#include <utility>

#include "kbwave/oracle.hpp"
#include "kbwave/solutions.hpp"

namespace kbwave {

struct Domain {
    double a;
    double b;
};

/// max |f'^2 - F(f)| over n uniform samples of [a, b], analytic f'.
/// Samples flagged singular are skipped.
inline double ode_residual(const ClosedFormSolution& s, const Params& p, Domain d, int n)
{
    if (n < 2) throw Error(ErrorKind::invalid_argument, "need n >= 2");
    int used = 0;
    const double r = detail::max_defining_residual(s, p, d.a, d.b, n, &used);
    if (used == 0) throw Error(ErrorKind::degenerate_domain, "every sample is singular");
    return r;
}

struct PdeResidual {
    double r_u;
    double r_v;
};

/// Residuals of both field equations for the traveling pair, time derivative
/// replaced by -c d/dxi. First derivatives are central differences of u and v;
/// u_xxx is the matching second difference of the analytic f'. `order` picks
/// the stencil: 4 (5 points) or 6 (7 points).
inline PdeResidual pde_residual(const ClosedFormSolution& s, const Params& p, Domain d, int n, double h_fd,
                                int order = 6)
{
    if (!(h_fd > 0.0)) throw Error(ErrorKind::invalid_argument, "h_fd must be positive");
    if (n < 2) throw Error(ErrorKind::invalid_argument, "need n >= 2");
    if (order != 4 && order != 6) throw Error(ErrorKind::invalid_argument, "order must be 4 or 6");
    const int half = order / 2;
    if (!(d.b - d.a > 2.0 * half * h_fd)) throw Error(ErrorKind::domain_too_small, "domain narrower than the stencil");

    // first-derivative and second-derivative weights on offsets -half..half
    static constexpr double d1_4[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    static constexpr double d2_4[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    static constexpr double d1_6[7] = {-1.0 / 60, 9.0 / 60, -45.0 / 60, 0.0, 45.0 / 60, -9.0 / 60, 1.0 / 60};
    static constexpr double d2_6[7] = {2.0 / 180,   -27.0 / 180, 270.0 / 180, -490.0 / 180,
                                       270.0 / 180, -27.0 / 180, 2.0 / 180};
    const double* w1 = order == 4 ? d1_4 : d1_6;
    const double* w2 = order == 4 ? d2_4 : d2_6;

    const double c = p.c;
    PdeResidual out{0.0, 0.0};
    int used = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = d.a + (d.b - d.a) * double(i) / double(n - 1);
        double u[7], v[7], up[7];
        try {
            for (int j = 0; j <= 2 * half; ++j) {
                const Sample smp = s.evaluate(xi + double(j - half) * h_fd);
                u[j] = smp.f;
                up[j] = smp.f_prime;
                v[j] = g_from_f(smp.f, c, p.d1);
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::singular_sample) continue;
            throw;
        }
        ++used;
        double ux = 0.0, vx = 0.0, uxxx = 0.0;
        for (int j = 0; j <= 2 * half; ++j) {
            ux += w1[j] * u[j];
            vx += w1[j] * v[j];
            uxxx += w2[j] * up[j];
        }
        ux /= h_fd;
        vx /= h_fd;
        uxxx /= h_fd * h_fd;
        const double u0 = u[half], v0 = v[half];
        const double ut = -c * ux, vt = -c * vx;
        const double ru = ut - (1.5 * u0 * ux + vx);
        const double rv = vt - (-0.25 * uxxx + v0 * ux + 0.5 * u0 * vx);
        if (!std::isfinite(ru) || !std::isfinite(rv))
            return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        out.r_u = std::max(out.r_u, std::abs(ru));
        out.r_v = std::max(out.r_v, std::abs(rv));
    }
    if (used == 0) throw Error(ErrorKind::degenerate_domain, "every sample is singular");
    return out;
}

/// Samples a closed form onto a Profile (f, f', g) over n uniform points.
inline Profile sample_profile(const ClosedFormSolution& s, Domain d, int n)
{
    if (n < 2) throw Error(ErrorKind::invalid_argument, "need n >= 2");
    const Params p = s.params();
    Profile out;
    const double h = (d.b - d.a) / double(n - 1);
    for (int i = 0; i < n; ++i) {
        const double xi = d.a + double(i) * h;
        const Sample v = s.evaluate(xi);
        out.xi.push_back(xi);
        out.f.push_back(v.f);
        out.f_prime.push_back(v.f_prime);
        out.g.push_back(g_from_f(v.f, p.c, p.d1));
    }
    return out;
}

/// Closed form vs oracle (step h) on [a, b], oracle started at xi0.
inline ProfileDistance oracle_vs_closed_form(const ClosedFormSolution& s, Domain d, double h)
{
    const Sample s0 = s.evaluate(s.xi0());
    const int sign = s0.f_prime < 0.0 ? -1 : 1;
    const Profile o =
        oracle_integrate(s.params(), s0.f, sign, std::min(0.0, d.a - s.xi0()), std::max(0.0, d.b - s.xi0()), h);
    double linf = 0.0, sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double xi = o.xi[i] + s.xi0();
        if (xi < d.a - 1e-9 * h || xi > d.b + 1e-9 * h) continue;
        const double e = std::abs(s.evaluate(xi).f - o.f[i]);
        linf = std::max(linf, e);
        sum += e * e;
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::disjoint_domains, "oracle grid misses the domain");
    return {linf, std::sqrt(sum / double(count))};
}

} // namespace kbwave

#endif
