#include <cmath>

#include <gtest/gtest.h>

#include "kbwave/presets.hpp"
#include "kbwave/verify.hpp"

using namespace kbwave;

namespace {

const ClosedFormSolution& case1a()
{
    static const ClosedFormSolution s = case1(Case1Kind::cn, -3, -2, -1);
    return s;
}

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::invalid_argument;
}

} // namespace

TEST(OdeResidual, Case1aBelowGate)
{
    EXPECT_LT(ode_residual(case1a(), case1a().params(), {-10, 10}, 2000), 1e-10);
}

TEST(OdeResidual, ConstantAtZeroIsExact)
{
    const auto k = constant_solution(-3.0, case1a().roots());
    EXPECT_EQ(ode_residual(k, case1a().params(), {-10, 10}, 2000), 0.0);
}

TEST(OdeResidual, DetectsScaledProfile)
{
    // same detector formula on 1.01 f
    const Params p = case1a().params();
    double r = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const Sample v = case1a().evaluate(-10 + 20.0 * i / 1999);
        r = std::max(r, std::abs(std::pow(1.01 * v.f_prime, 2) - eval_F(p, 1.01 * v.f)));
    }
    EXPECT_GT(r, 1e-3);
}

TEST(OdeResidual, DetectsWrongParams)
{
    Params p = case1a().params();
    p.d3 *= 1.01;
    EXPECT_GT(ode_residual(case1a(), p, {-10, 10}, 2000), 1e-3);
}

TEST(OdeResidual, Preconditions)
{
    EXPECT_EQ(kind_of([] { ode_residual(case1a(), case1a().params(), {-1, 1}, 1); }), ErrorKind::invalid_argument);
}

TEST(PdeResidual, Case1aPair)
{
    const auto r = pde_residual(case1a(), case1a().params(), {-10, 10}, 2000, 1e-3);
    EXPECT_LT(r.r_u, 1e-6);
    EXPECT_LT(r.r_v, 1e-6);
    const auto r4 = pde_residual(case1a(), case1a().params(), {-10, 10}, 2000, 1e-3, 4);
    EXPECT_LT(r4.r_u, 1e-6);
    EXPECT_LT(r4.r_v, 1e-6);
}

TEST(PdeResidual, ConstantPairIsZero)
{
    const auto k = constant_solution(-2.0, case1a().roots());
    const auto r = pde_residual(k, case1a().params(), {-1, 1}, 50, 1e-3);
    EXPECT_LT(r.r_u, 1e-12);
    EXPECT_LT(r.r_v, 1e-12);
}

TEST(PdeResidual, AllPresets)
{
    for (const auto& pr : figure_presets()) {
        const auto s = pr.build();
        const auto [a, b] = default_domain(s);
        const auto r = pde_residual(s, s.params(), {a, b}, 2000, 1e-3);
        EXPECT_LT(r.r_u, 1e-6) << pr.name;
        EXPECT_LT(r.r_v, 1e-6) << pr.name;
    }
}

TEST(PdeResidual, DetectsWrongSpeed)
{
    Params p = case1a().params();
    p.c += 0.01;
    const auto r = pde_residual(case1a(), p, {-10, 10}, 500, 1e-3);
    EXPECT_GT(std::max(r.r_u, r.r_v), 1e-4);
}

TEST(PdeResidual, Errors)
{
    const Params p = case1a().params();
    EXPECT_EQ(kind_of([&] { pde_residual(case1a(), p, {0, 0.004}, 10, 1e-3); }), ErrorKind::domain_too_small);
    EXPECT_EQ(kind_of([&] { pde_residual(case1a(), p, {0, 1}, 10, 0.0); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of([&] { pde_residual(case1a(), p, {0, 1}, 10, 1e-3, 5); }), ErrorKind::invalid_argument);
}

TEST(SampleProfile, ColumnsAndGrid)
{
    const Profile pr = sample_profile(case1a(), {-10, 10}, 201);
    pr.validate();
    ASSERT_EQ(pr.size(), 201u);
    EXPECT_EQ(pr.xi.front(), -10.0);
    EXPECT_EQ(pr.xi.back(), 10.0);
    EXPECT_NEAR(pr.f[100], -1.0, 1e-15);
    EXPECT_NEAR(pr.g[100], g_from_f(-1.0, 2.0, -1.75), 1e-15);
}

TEST(OracleVsClosedForm, Case2eOnePeriod)
{
    const auto s = find_preset("fig-case2e").build();
    const auto d = oracle_vs_closed_form(s, {0.0, *s.period()}, 1e-4);
    EXPECT_LT(d.linf, 1e-6);
}

TEST(OracleVsClosedForm, SolitaryWindow)
{
    const auto d = oracle_vs_closed_form(case1a(), {-10, 10}, 1e-4);
    EXPECT_LT(d.linf, 1e-6);
    EXPECT_LE(d.l2, d.linf);
}
