#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kbwave/elliptic.hpp"
#include "kbwave/oracle.hpp"

using namespace kbwave;

namespace {

const Params case1a{2.0, -7.0 / 4, -7.0 / 2, -3.0 / 2};

double sech(double x) { return 1.0 / std::cosh(x); }

double linf_vs(const Profile& p, double (*exact)(double))
{
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) e = std::max(e, std::abs(p.f[i] - exact(p.xi[i])));
    return e;
}

double pulse(double x) { return -2.0 + sech(x); }

// sin(w x)/(sin(w x) + 2), w = 2/sqrt(3): zeros -1, 1/3 and a double zero at 1
const Params case2e = params_from_zeros<double>({-1.0, 1.0 / 3, 1.0, 1.0});
double wave2e(double x)
{
    const double s = std::sin(2.0 / std::sqrt(3.0) * x);
    return s / (s + 2.0);
}

} // namespace

TEST(Oracle, SolitaryPulseMatchesClosedForm)
{
    const Profile p = oracle_integrate(case1a, -1.0, -1, -10.0, 10.0, 1e-4);
    p.validate();
    EXPECT_EQ(p.size(), 200001u);
    EXPECT_LT(linf_vs(p, pulse), 1e-6);
    // f' column consistent with the closed form derivative
    for (std::size_t i = 0; i < p.size(); i += 1000) {
        const double x = p.xi[i];
        EXPECT_NEAR(p.f_prime[i], -sech(x) * std::tanh(x), 1e-6);
    }
}

TEST(Oracle, SimpleMaximumDescendsWithNegativeSign)
{
    const Profile p = oracle_integrate(case1a, -1.0, -1, 1.0, 1e-2);
    EXPECT_LT(p.f[1], p.f[0]);
}

TEST(Oracle, FourSimpleBandAndPeriod)
{
    // F = -f(f-1)(f-2)(f-3); orbit from 0 stays in [0, 1]
    const Params p = params_from_zeros<double>({0.0, 1.0, 2.0, 3.0});
    std::vector<TurningPoint> ev;
    const Profile o = oracle_integrate(p, 0.0, 1, 0.0, 20.0, 1e-4, &ev);
    const auto [mn, mx] = std::minmax_element(o.f.begin(), o.f.end());
    // grid samples miss the extremum by at most f'' (h/2)^2 / 2
    EXPECT_NEAR(*mn, 0.0, 1e-8);
    EXPECT_NEAR(*mx, 1.0, 1e-8);
    // independent period: 2K(k)/beta with k^2 = 1/4, beta = 1 for this band
    const double T = 2.0 * complete_K(Modulus(0.5));
    std::vector<double> at_top;
    for (const auto& e : ev)
        if (std::abs(e.f - 1.0) < 1e-6) at_top.push_back(e.xi);
    ASSERT_GE(at_top.size(), 3u);
    for (std::size_t i = 1; i < at_top.size(); ++i) EXPECT_NEAR(at_top[i] - at_top[i - 1], T, 1e-6);
}

TEST(Oracle, TurningPointsLandOnZeros)
{
    std::vector<TurningPoint> ev;
    oracle_integrate(case2e, 0.0, 1, -12.0, 12.0, 1e-3, &ev);
    ASSERT_GE(ev.size(), 6u);
    for (const auto& e : ev) EXPECT_LT(std::min(std::abs(e.f + 1.0), std::abs(e.f - 1.0 / 3)), 1e-9);
    for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_GT(ev[i].xi, ev[i - 1].xi);
}

TEST(Oracle, FourthOrderConvergence)
{
    const double e1 = linf_vs(oracle_integrate(case2e, 0.0, 1, 0.0, 8.0, 0.02), wave2e);
    const double e2 = linf_vs(oracle_integrate(case2e, 0.0, 1, 0.0, 8.0, 0.01), wave2e);
    EXPECT_GE(e1 / e2, 8.0) << e1 << " " << e2;
}

TEST(Oracle, StartOnTurningPointConverges)
{
    // cos(w x)/(cos(w x) + 2) starts on its maximum 1/3, where F(1/3) is rounding noise
    const auto wave2f = [](double x) {
        const double c = std::cos(2.0 / std::sqrt(3.0) * x);
        return c / (c + 2.0);
    };
    double e[3];
    int i = 0;
    for (double h : {0.02, 0.01, 0.005}) {
        const Profile p = oracle_integrate(case2e, 1.0 / 3, 1, -6.0, 6.0, h);
        e[i] = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) e[i] = std::max(e[i], std::abs(p.f[j] - wave2f(p.xi[j])));
        ++i;
    }
    EXPECT_GE(e[0] / e[1], 8.0);
    EXPECT_GE(e[1] / e[2], 8.0) << e[1] << " " << e[2];
}

TEST(Oracle, EnergyIdentity)
{
    for (const auto& [p, f0] : {std::pair{case1a, -1.0}, std::pair{case2e, 0.0}}) {
        const Profile o = oracle_integrate(p, f0, -1, -10.0, 10.0, 1e-3);
        double worst = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i)
            worst = std::max(worst, std::abs(o.f_prime[i] * o.f_prime[i] - eval_F(p, o.f[i])));
        EXPECT_LT(worst, 1e-8);
    }
}

TEST(Oracle, ReflectionIsContinuous)
{
    const double h = 1e-3;
    const Profile o = oracle_integrate(case2e, 1.0 / 3, -1, 0.0, 10.0, h);
    double fmax = 0.0, amax = 0.0;
    for (double f = -1.0; f <= 1.0 / 3; f += 1e-4) {
        fmax = std::max(fmax, std::sqrt(std::max(eval_F(case2e, f), 0.0)));
        amax = std::max(amax, 0.5 * std::abs(eval_F_derivative(case2e, f, 1)));
    }
    for (std::size_t i = 1; i < o.size(); ++i) {
        EXPECT_LE(std::abs(o.f[i] - o.f[i - 1]), 1.01 * h * fmax);
        EXPECT_LE(std::abs(o.f_prime[i] - o.f_prime[i - 1]), 1.01 * h * amax);
    }
}

TEST(Oracle, ClampsAtDoubleZero)
{
    const Profile o = oracle_integrate(case1a, -1.0, -1, 0.0, 60.0, 1e-2);
    // F is at rounding level once |f + 2| ~ sqrt(eps), so the tail plateaus there
    EXPECT_NEAR(o.f.back(), -2.0, 1e-6);
    EXPECT_EQ(o.f.back(), o.f[o.size() - 2]);
    EXPECT_LT(std::abs(o.f_prime.back()), 1e-6);
}

TEST(Oracle, InfeasibleStart)
{
    try {
        oracle_integrate(case1a, 0.0, 1, 1.0, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::start_point_infeasible);
    }
}

TEST(Oracle, OnlyDoubleZerosGiveNoOrbit)
{
    // OneDoubleOnly: -(f-1)^2 (f^2+1); TwoDoublesOnly: -f^2 (f-2)^2
    const Params one{-0.5, -0.25, 0.25, -0.125};
    const Params two{-1.0, 0.0, 0.0, 0.0};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-5, 5);
    for (int i = 0; i < 50; ++i) {
        const double f0 = U(rng);
        EXPECT_THROW(oracle_integrate(one, f0, 1, 1.0, 1e-2), Error);
        EXPECT_THROW(oracle_integrate(two, f0, 1, 1.0, 1e-2), Error);
    }
    for (const auto& [p, z] : {std::pair{one, 1.0}, std::pair{two, 0.0}, std::pair{two, 2.0}}) {
        const Profile o = oracle_integrate(p, z, 1, -5.0, 5.0, 1e-2);
        for (double f : o.f) EXPECT_EQ(f, z);
    }
}

TEST(Oracle, TwoSimpleOnlyIsBounded)
{
    const Params p{-1.0, 1.0, 1.0, 1.0};
    const auto r = roots_of_F(p);
    ASSERT_EQ(classify(r), CaseTag::TwoSimpleOnly);
    const double lo = r.entries()[0].value, hi = r.entries()[1].value;
    const Profile o = oracle_integrate(p, hi, -1, 0.0, 100.0, 1e-3);
    const auto [mn, mx] = std::minmax_element(o.f.begin(), o.f.end());
    EXPECT_NEAR(*mn, lo, 1e-8);
    EXPECT_NEAR(*mx, hi, 1e-8);
}

TEST(Oracle, Arguments)
{
    EXPECT_THROW(oracle_integrate(case1a, -1.0, 0, 1.0, 1e-3), Error);
    EXPECT_THROW(oracle_integrate(case1a, -1.0, 1, 1.0, 0.0), Error);
    EXPECT_THROW(oracle_integrate(case1a, -1.0, 1, 1.0, 2.0, 1e-3), Error);
}

TEST(CompareProfiles, Identical)
{
    const Profile o = oracle_integrate(case2e, 0.0, 1, 0.0, 5.0, 1e-2);
    const auto d = compare_profiles(o, o);
    EXPECT_EQ(d.linf, 0.0);
    EXPECT_EQ(d.l2, 0.0);
}

TEST(CompareProfiles, ShiftedByOneStep)
{
    Profile a, b;
    const double h = 1e-2;
    for (int i = 0; i <= 1000; ++i) {
        a.xi.push_back(i * h);
        a.f.push_back(wave2e(i * h));
        b.xi.push_back(i * h);
        b.f.push_back(wave2e((i + 1) * h));
    }
    double maxslope = 0.0;
    for (int i = 0; i < 1000; ++i) maxslope = std::max(maxslope, std::abs(a.f[i + 1] - a.f[i]) / h);
    const auto d = compare_profiles(a, b);
    EXPECT_LE(d.linf, 1.05 * h * maxslope);
    EXPECT_GE(d.linf, 0.8 * h * maxslope);
}

TEST(CompareProfiles, ResamplesOtherGrids)
{
    Profile a, b;
    for (int i = 0; i <= 200; ++i) a.xi.push_back(i * 0.05), a.f.push_back(wave2e(i * 0.05));
    for (int i = 0; i <= 3000; ++i) b.xi.push_back(-1.0 + i * 0.004), b.f.push_back(wave2e(-1.0 + i * 0.004));
    EXPECT_LT(compare_profiles(a, b).linf, 1e-8);
}

TEST(CompareProfiles, Disjoint)
{
    Profile a, b;
    for (int i = 0; i < 10; ++i) a.xi.push_back(i), a.f.push_back(0), b.xi.push_back(100 + 0.5 * i), b.f.push_back(0);
    try {
        compare_profiles(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::disjoint_domains);
    }
}

TEST(ProfileType, Validation)
{
    Profile p;
    p.xi = {0.0, 1.0, 2.5};
    p.f = {0, 0, 0};
    EXPECT_THROW(p.validate(), Error);
    p.xi = {0.0, 1.0, 2.0};
    p.f = {0, 0};
    EXPECT_THROW(p.validate(), Error);
}
