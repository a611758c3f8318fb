#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "kbwave/quartic.hpp"

using namespace kbwave;
using Q = boost::multiprecision::cpp_rational;

namespace {

const Params case1a{2.0, -7.0 / 4, -7.0 / 2, -3.0 / 2};

double factored(const std::vector<double>& z, double f)
{
    double r = -1.0;
    for (double x : z) r *= (f - x);
    return r;
}

} // namespace

TEST(EvalF, DoubleRootVanishes) { EXPECT_EQ(eval_F(case1a, -2.0), 0.0); }

TEST(EvalF, ConstantTerm)
{
    const Params p{1.3, -0.2, 4.1, 0.77};
    EXPECT_DOUBLE_EQ(eval_F(p, 0.0), 8 * 0.77);
}

TEST(EvalF, MatchesFactoredForm)
{
    EXPECT_NEAR(eval_F(case1a, -2.5), -(-2.5 + 3) * (-2.5 + 1) * (-2.5 + 2) * (-2.5 + 2), 1e-14);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-5, 5);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> z{U(rng), U(rng), U(rng), U(rng)};
        const Params p = params_from_zeros<double>({z[0], z[1], z[2], z[3]});
        const double f = U(rng);
        EXPECT_NEAR(eval_F(p, f), factored(z, f), 1e-10 * std::pow(10.0, 4));
    }
}

TEST(EvalF, DerivativesMatchFiniteDifferences)
{
    const Params p{0.7, -1.1, 0.4, 0.25};
    for (double f : {-2.0, -0.3, 0.0, 1.7}) {
        for (int m = 1; m <= 4; ++m) {
            const double h = 1e-3;
            const double fd = (eval_F_derivative(p, f + h, m - 1) - eval_F_derivative(p, f - h, m - 1)) / (2 * h);
            EXPECT_NEAR(eval_F_derivative(p, f, m), fd, 1e-4) << m;
        }
    }
}

TEST(ParamsFromRoots, ExactRationalFixture)
{
    const auto p = params_from_zeros<Q>({Q(-3), Q(-2), Q(-2), Q(-1)});
    EXPECT_EQ(p.c, Q(2));
    EXPECT_EQ(p.d1, Q(-7, 4));
    EXPECT_EQ(p.d2, Q(-7, 2));
    EXPECT_EQ(p.d3, Q(-3, 2));
}

TEST(ParamsFromRoots, IrrationalFixture)
{
    const double r = std::sqrt(14.0);
    const auto p = params_from_roots(RootMultiset({{8 - 2 * r, 1}, {1.0, 2}, {8 + 2 * r, 1}}));
    EXPECT_NEAR(p.c, -4.5, 1e-12);
    EXPECT_NEAR(p.d1, 10.0, 1e-12);
    EXPECT_NEAR(p.d2, 4.0, 1e-12);
    EXPECT_NEAR(p.d3, -1.0, 1e-12);
}

TEST(ParamsFromRoots, QuadrupleAtZero)
{
    EXPECT_EQ(params_from_roots(RootMultiset({{0.0, 4}})), (Params{0, 0, 0, 0}));
}

TEST(ParamsFromRoots, Underdetermined)
{
    try {
        params_from_roots(RootMultiset({{-1.0, 1}, {2.0, 1}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::underdetermined);
    }
}

TEST(RootMultiset, Invariants)
{
    EXPECT_THROW(RootMultiset({{1.0, 1}, {0.0, 1}}), Error);
    EXPECT_THROW(RootMultiset({{1.0, 3}}), Error);
    EXPECT_THROW(RootMultiset({{1.0, 0}, {2.0, 2}}), Error);
    const auto r = RootMultiset::from_values({2.0, -1.0, 2.0, 0.5});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r.entries()[2], (RootEntry{2.0, 2}));
    EXPECT_EQ(r.expanded(), (std::vector<double>{-1.0, 0.5, 2.0, 2.0}));
    EXPECT_EQ(r.scale(), 2.0);
}

TEST(RootsOfF, SolitaryFixture)
{
    const auto r = roots_of_F(case1a);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_NEAR(r.entries()[0].value, -3.0, 1e-12);
    EXPECT_EQ(r.entries()[0].multiplicity, 1);
    EXPECT_NEAR(r.entries()[1].value, -2.0, 1e-9);
    EXPECT_EQ(r.entries()[1].multiplicity, 2);
    EXPECT_NEAR(r.entries()[2].value, -1.0, 1e-12);
}

TEST(RootsOfF, NoRealZeros)
{
    const auto r = roots_of_F({0, 0, 0, -1.0 / 8});
    EXPECT_TRUE(r.empty());
    EXPECT_EQ(classify(r), CaseTag::NoRealZeros);
}

TEST(RootsOfF, FourSimpleFixture)
{
    const auto r = roots_of_F({2.0, -25.0 / 16, -25.0 / 8, -39.0 / 32});
    const double h = std::sqrt(3.0) / 2;
    ASSERT_EQ(r.size(), 4u);
    const double want[4] = {-3.0, -2.0 - h, -2.0 + h, -1.0};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(r.entries()[i].value, want[i], 1e-12);
        EXPECT_EQ(r.entries()[i].multiplicity, 1);
    }
    EXPECT_EQ(classify(r), CaseTag::FourSimple);
}

TEST(RootsOfF, TripleAndQuadruple)
{
    const auto t = roots_of_F(params_from_zeros<double>({0.0, 0.0, 0.0, 1.0}));
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.entries()[0].multiplicity, 3);
    EXPECT_EQ(classify(t), CaseTag::TripleWithSimpleAbove);
    const auto q = roots_of_F(params_from_zeros<double>({1.5, 1.5, 1.5, 1.5}));
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q.entries()[0].multiplicity, 4);
    EXPECT_NEAR(q.entries()[0].value, 1.5, 1e-3);
}

TEST(RootsOfF, TwoSimpleKeepsCofactor)
{
    // F = -(f^2 - 1)(f^2 + 2f + 5)
    const auto r = roots_of_F({0.5, -0.75, 0.25, 0.625});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r.entries()[0].value, -1.0, 1e-12);
    EXPECT_NEAR(r.entries()[1].value, 1.0, 1e-12);
    ASSERT_TRUE(r.cofactor());
    EXPECT_NEAR(r.cofactor()->p, 2.0, 1e-12);
    EXPECT_NEAR(r.cofactor()->q, 5.0, 1e-12);
    EXPECT_LT(r.cofactor()->discriminant(), 0.0);
    EXPECT_EQ(classify(r), CaseTag::TwoSimpleOnly);
}

TEST(RootsOfF, RandomRoundTrip)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-4, 4);
    for (int i = 0; i < 300; ++i) {
        std::array<double, 4> z{U(rng), U(rng), U(rng), U(rng)};
        std::sort(z.begin(), z.end());
        bool spread = true;
        for (int j = 1; j < 4; ++j) spread = spread && z[j] - z[j - 1] > 1e-2;
        if (!spread) continue;
        const Params p = params_from_zeros(z);
        const auto r = roots_of_F(p);
        ASSERT_EQ(r.total_multiplicity(), 4);
        const Params back = params_from_roots(r);
        EXPECT_NEAR(back.c, p.c, 1e-9);
        EXPECT_NEAR(back.d1, p.d1, 1e-9 * 16);
        EXPECT_NEAR(back.d2, p.d2, 1e-9 * 64);
        EXPECT_NEAR(back.d3, p.d3, 1e-9 * 256);
        for (const auto& e : r.entries()) EXPECT_NEAR(eval_F(p, e.value), 0.0, 1e-9 * 256);
    }
}

TEST(RootsOfF, RandomDoubleRoots)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-4, 4);
    for (int i = 0; i < 200; ++i) {
        std::array<double, 3> z{U(rng), U(rng), U(rng)};
        std::sort(z.begin(), z.end());
        if (z[1] - z[0] < 0.05 || z[2] - z[1] < 0.05) continue;
        const auto r = roots_of_F(params_from_zeros<double>({z[0], z[1], z[1], z[2]}));
        ASSERT_EQ(r.size(), 3u);
        EXPECT_EQ(r.entries()[1].multiplicity, 2);
        EXPECT_NEAR(r.entries()[1].value, z[1], 1e-7 * std::max(1.0, std::abs(z[1])));
        EXPECT_EQ(classify(r), CaseTag::DoubleBetweenSimples);
    }
}

TEST(Classify, EveryTag)
{
    using V = std::vector<RootEntry>;
    const std::vector<std::pair<V, CaseTag>> table{
        {{}, CaseTag::NoRealZeros},
        {{{0, 1}, {1, 1}}, CaseTag::TwoSimpleOnly},
        {{{0, 2}}, CaseTag::OneDoubleOnly},
        {{{0, 2}, {1, 2}}, CaseTag::TwoDoublesOnly},
        {{{0, 4}}, CaseTag::Quadruple},
        {{{0, 2}, {1, 1}, {2, 1}}, CaseTag::DoubleBelowSimples},
        {{{0, 1}, {1, 1}, {2, 2}}, CaseTag::DoubleAboveSimples},
        {{{0, 1}, {1, 2}, {2, 1}}, CaseTag::DoubleBetweenSimples},
        {{{0, 3}, {1, 1}}, CaseTag::TripleWithSimpleAbove},
        {{{0, 1}, {1, 3}}, CaseTag::TripleWithSimpleBelow},
        {{{0, 1}, {1, 1}, {2, 1}, {3, 1}}, CaseTag::FourSimple},
    };
    std::set<CaseTag> seen;
    for (const auto& [e, tag] : table) {
        EXPECT_EQ(classify(RootMultiset(e)), tag) << to_string(tag);
        seen.insert(tag);
    }
    EXPECT_EQ(seen.size(), all_case_tags.size());
}

TEST(Classify, ReferenceFixtures)
{
    const double r = std::sqrt(3.0);
    EXPECT_EQ(classify(RootMultiset({{-3, 1}, {-2, 2}, {-1, 1}})), CaseTag::DoubleBetweenSimples);
    EXPECT_EQ(classify(RootMultiset({{-2 - r, 1}, {-2 + r, 1}, {0, 2}})), CaseTag::DoubleAboveSimples);
    EXPECT_EQ(classify(RootMultiset({{0, 3}, {1, 1}})), CaseTag::TripleWithSimpleAbove);
}

TEST(Existence, DispatchTable)
{
    for (CaseTag t : {CaseTag::NoRealZeros, CaseTag::OneDoubleOnly, CaseTag::TwoDoublesOnly, CaseTag::Quadruple})
        EXPECT_EQ(existence(t), SolutionFamily::none);
    for (CaseTag t : {CaseTag::DoubleBetweenSimples, CaseTag::TripleWithSimpleAbove, CaseTag::TripleWithSimpleBelow})
        EXPECT_EQ(existence(t), SolutionFamily::solitary);
    for (CaseTag t : {CaseTag::TwoSimpleOnly, CaseTag::DoubleBelowSimples, CaseTag::DoubleAboveSimples,
                      CaseTag::FourSimple})
        EXPECT_EQ(existence(t), SolutionFamily::periodic);
    EXPECT_EQ(verdict_phrase(CaseTag::DoubleBetweenSimples), "two solitary branches");
    EXPECT_EQ(verdict_phrase(CaseTag::NoRealZeros), "no real solution");
    EXPECT_EQ(verdict_phrase(CaseTag::FourSimple), "periodic");
}

TEST(Existence, LoneDoubleNeedsNegativeCofactor)
{
    // F = -(f - 1)^2 (f^2 + 1)
    const auto lone = roots_of_F({-0.5, -0.25, 0.25, -0.125});
    ASSERT_EQ(lone.size(), 1u);
    EXPECT_NEAR(lone.entries()[0].value, 1.0, 1e-7);
    EXPECT_EQ(classify(lone), CaseTag::OneDoubleOnly);
    ASSERT_TRUE(lone.cofactor());
    EXPECT_LT(lone.cofactor()->discriminant(), 0.0);
    EXPECT_EQ(existence(lone), SolutionFamily::none);
}
