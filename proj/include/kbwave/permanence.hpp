#ifndef KBWAVE_PERMANENCE_HPP
#define KBWAVE_PERMANENCE_HPP

#include <cmath>

#include "kbwave/evolution.hpp"
#include "kbwave/reduction.hpp"
#include "kbwave/solutions.hpp"

namespace kbwave {

/// Samples the traveling pair at t = 0 on a periodic window of length L
/// centred on xi0.
inline EvolutionState traveling_state(const ClosedFormSolution& s, const Params& p, double L, std::size_t n)
{
    if (!(L > 0.0)) throw Error(ErrorKind::invalid_argument, "L must be positive");
    if (s.period()) {
        const double m = L / *s.period();
        if (std::round(m) < 1.0 || std::abs(m - std::round(m)) > 1e-9 * m)
            throw Error(ErrorKind::invalid_argument, "L must be a whole number of periods");
    }
    EvolutionState st;
    st.L = L;
    st.x_begin = s.xi0() - 0.5 * L;
    const double dx = L / double(n);
    st.u.reserve(n);
    st.v.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double f = s(st.x_begin + double(j) * dx);
        st.u.push_back(f);
        st.v.push_back(g_from_f(f, p.c, p.d1));
    }
    st.validate();
    return st;
}

/// max |u(x, t) - f(x - c t)| with the translate wrapped into the window.
inline double permanence_error(const ClosedFormSolution& s, const Params& p, const EvolutionState& st)
{
    double err = 0.0;
    for (std::size_t j = 0; j < st.n(); ++j) {
        double xi = st.x(j) - p.c * st.t - st.x_begin;
        xi = st.x_begin + (xi - st.L * std::floor(xi / st.L));
        err = std::max(err, std::abs(st.u[j] - s(xi)));
    }
    return err;
}

inline double mean_u(const EvolutionState& st)
{
    double m = 0.0;
    for (double x : st.u) m += x;
    return m / double(st.n());
}

} // namespace kbwave

#endif
