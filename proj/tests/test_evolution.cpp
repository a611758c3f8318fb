#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "kbwave/permanence.hpp"

using namespace kbwave;

namespace {

constexpr double pi = std::numbers::pi;
const double L40 = 40.0 * pi;

const ClosedFormSolution& case1a()
{
    static const ClosedFormSolution s = case1(Case1Kind::cn, -3, -2, -1);
    return s;
}

EvolutionState constant_state(double u0, double v0, std::size_t n, double L)
{
    EvolutionState s;
    s.L = L;
    s.u.assign(n, u0);
    s.v.assign(n, v0);
    return s;
}

double linf(const std::vector<double>& a, const std::vector<double>& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

} // namespace

TEST(Evolution, ConstantStateHasZeroRate)
{
    const auto r = kb_rhs(constant_state(-2.0, -0.75, 64, 10.0));
    for (double x : r.du_dt) EXPECT_LT(std::abs(x), 1e-14);
    for (double x : r.dv_dt) EXPECT_LT(std::abs(x), 1e-14);
}

TEST(Evolution, ConstantStateUnchanged)
{
    const auto s0 = constant_state(-2.0, -0.75, 64, 10.0);
    const auto s1 = evolve(s0, 1e-3, 1.0);
    EXPECT_NEAR(s1.t, 1.0, 1e-12);
    EXPECT_LT(linf(s1.u, s0.u), 1e-13);
    EXPECT_LT(linf(s1.v, s0.v), 1e-13);
}

TEST(Evolution, SpectralDerivativeOfSine)
{
    const std::size_t n = 128;
    const double L = 7.5;
    SpectralKB op(n, L);
    std::vector<double> f(n), want(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = L * double(j) / double(n);
        f[j] = std::sin(2 * pi * x / L);
        want[j] = 2 * pi / L * std::cos(2 * pi * x / L);
    }
    EXPECT_LT(linf(op.derivative(f, 1), want), 1e-12);
}

TEST(Evolution, TravelingPairSatisfiesAnsatz)
{
    const Params p = case1a().params();
    const auto s = traveling_state(case1a(), p, L40, 1024);
    const auto r = kb_rhs(s);
    SpectralKB op(s.n(), s.L);
    const auto ux = op.derivative(s.u, 1), vx = op.derivative(s.v, 1);
    for (std::size_t j = 0; j < s.n(); ++j) {
        EXPECT_NEAR(r.du_dt[j], -p.c * ux[j], 1e-6);
        EXPECT_NEAR(r.dv_dt[j], -p.c * vx[j], 1e-6);
    }
}

TEST(Evolution, FourierModeFollowsLinearDispersion)
{
    // central difference in amplitude is exact for the quadratic right-hand side
    const double u0 = -2.0, v0 = g_from_f(u0, 2.0, -1.75), L = 20.0, eps = 1e-3;
    const std::size_t n = 64;
    for (int m : {1, 3, 7}) {
        const double k = 2 * pi * m / L;
        const auto lam = linear_dispersion(u0, v0, k);
        // eigenvector of [[3u0/2, 1], [k^2/4 + v0, u0/2]] for mu = lam / (i k)
        const std::complex<double> mu = lam[0] / std::complex<double>(0.0, k);
        const std::complex<double> a = 1.0, b = mu - 1.5 * u0;
        EvolutionState sp = constant_state(u0, v0, n, L), sm = sp;
        for (std::size_t j = 0; j < n; ++j) {
            const std::complex<double> e = std::exp(std::complex<double>(0.0, k * L * double(j) / double(n)));
            sp.u[j] += eps * std::real(a * e), sm.u[j] -= eps * std::real(a * e);
            sp.v[j] += eps * std::real(b * e), sm.v[j] -= eps * std::real(b * e);
        }
        const auto rp = kb_rhs(sp), rm = kb_rhs(sm);
        for (std::size_t j = 0; j < n; ++j) {
            const std::complex<double> e = std::exp(std::complex<double>(0.0, k * L * double(j) / double(n)));
            const double du = (rp.du_dt[j] - rm.du_dt[j]) / (2 * eps);
            const double dv = (rp.dv_dt[j] - rm.dv_dt[j]) / (2 * eps);
            EXPECT_NEAR(du, std::real(lam[0] * a * e), 1e-8);
            EXPECT_NEAR(dv, std::real(lam[0] * b * e), 1e-8);
        }
        // neutral about this background
        EXPECT_LT(std::abs(lam[0].real()), 1e-15);
        EXPECT_LT(std::abs(lam[1].real()), 1e-15);
    }
}

TEST(Evolution, Case1aPermanence)
{
    const Params p = case1a().params();
    const auto s0 = traveling_state(case1a(), p, L40, 1024);
    const auto s1 = evolve(s0, 1e-3, 1.0);
    EXPECT_LT(permanence_error(case1a(), p, s1), 1e-3);
    EXPECT_LT(std::abs(mean_u(s1) - mean_u(s0)), 1e-10);
}

TEST(Evolution, RefinementReducesError)
{
    const Params p = case1a().params();
    double e[2];
    int i = 0;
    for (std::size_t n : {128u, 256u}) {
        const auto s1 = evolve(traveling_state(case1a(), p, L40, n), 1e-3, 1.0);
        e[i++] = permanence_error(case1a(), p, s1);
    }
    EXPECT_GE(e[0] / e[1], 4.0) << e[0] << " " << e[1];
}

TEST(Evolution, TimeReversal)
{
    const Params p = case1a().params();
    const auto s0 = traveling_state(case1a(), p, L40, 256);
    const auto s1 = evolve(s0, 1e-3, 1.0);
    const auto s2 = evolve(s1, -1e-3, 1.0);
    EXPECT_NEAR(s2.t, 0.0, 1e-12);
    EXPECT_LT(linf(s2.u, s0.u), 1e-6);
    EXPECT_LT(linf(s2.v, s0.v), 1e-6);
}

TEST(Evolution, Deterministic)
{
    const Params p = case1a().params();
    const auto s0 = traveling_state(case1a(), p, L40, 128);
    const auto a = evolve(s0, 1e-3, 0.2), b = evolve(s0, 1e-3, 0.2);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.v, b.v);
}

TEST(Evolution, Errors)
{
    const auto s = constant_state(0.0, 0.0, 64, 10.0);
    EXPECT_THROW(evolve(s, 1.0, 1.0), Error); // step bound
    EXPECT_THROW(evolve(s, 0.0, 1.0), Error);
    EXPECT_THROW(kb_rhs(constant_state(0.0, 0.0, 48, 10.0)), Error);

    EvolutionState big = constant_state(0.0, 0.0, 64, 10.0);
    for (std::size_t j = 0; j < 64; ++j) big.u[j] = 1e200 * std::sin(2 * pi * double(j) / 64);
    try {
        evolve(big, 1e-3, 0.01);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::blow_up);
    }
    EXPECT_THROW(traveling_state(periodic_trig(-1, 1.0 / 3, 1, -1), Params{}, 1.0, 64), Error);
}
