#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "resdeloc/seba.hpp"
#include "resdeloc/stats.hpp"

using namespace resdeloc;

namespace {

double naive_stieltjes(const std::vector<double>& pts, double x) {
    long double s = 0;
    for (double v : pts) s += 1.0L / (static_cast<long double>(v) - x);
    return static_cast<double>(s);
}

std::vector<SebaSolution> ensemble(std::size_t n, double L, double alpha, double W, std::uint64_t seed) {
    std::vector<SebaSolution> out;
    for (std::size_t j = 0; j < n; ++j) out.push_back(solve_seba(sample_poisson(L, seed, j), alpha, W));
    return out;
}

}  // namespace

TEST(Poisson, MeanCount) {
    double total = 0.0;
    for (std::size_t j = 0; j < 1000; ++j) total += static_cast<double>(sample_poisson(1e4, 1, j).points.size());
    EXPECT_LE(std::abs(total / 1000.0 - 2e4), 0.01 * 2e4);
}

TEST(Poisson, GapsAreExponential) {
    std::vector<double> gaps;
    for (std::size_t j = 0; gaps.size() < 10000; ++j) {
        PoissonConfiguration c = sample_poisson(10.0, 2, j);
        for (std::size_t i = 1; i < c.points.size(); ++i) gaps.push_back(c.points[i] - c.points[i - 1]);
    }
    EXPECT_LE(ks_distance(gaps, exponential_cdf), 0.05);
}

TEST(Poisson, DeterministicAndLabelled) {
    PoissonConfiguration a = sample_poisson(50.0, 3, 4), b = sample_poisson(50.0, 3, 4);
    EXPECT_EQ(a.points, b.points);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.label(i) <= 0) EXPECT_LE(a.points[i], 0.0);
        if (a.label(i) >= 1) EXPECT_GT(a.points[i], 0.0);
    }
    EXPECT_THROW(sample_poisson(0.0, 1), DomainError);
    EXPECT_THROW(PoissonConfiguration::from_points({1.0, 1.0}), DegenerateSampleError);
}

TEST(Stieltjes, SmallConfigurations) {
    EXPECT_EQ(stieltjes(PoissonConfiguration::from_points({-1.0, 1.0}), 0.0), 0.0);
    EXPECT_EQ(stieltjes(PoissonConfiguration::from_points({0.5}), 0.0), 2.0);
    EXPECT_EQ(stieltjes_derivative(PoissonConfiguration::from_points({-1.0, 1.0}), 0.0), 2.0);
    EXPECT_THROW(stieltjes(PoissonConfiguration::from_points({0.5}), 0.5), PoleError);
}

TEST(Stieltjes, DerivativeMatchesFiniteDifference) {
    PoissonConfiguration c = sample_poisson(200.0, 5);
    for (std::size_t g = 1; g < c.points.size(); g += 37) {
        double lo = c.points[g - 1], hi = c.points[g], x = lo + 0.37 * (hi - lo), h = 1e-6 * (hi - lo);
        double fd = (stieltjes(c, x + h) - stieltjes(c, x - h)) / (2 * h);
        EXPECT_NEAR(stieltjes_derivative(c, x), fd, 1e-6 * std::abs(fd));
        EXPECT_GE(stieltjes_derivative(c, x), 1.0 / ((hi - lo) * (hi - lo)));
    }
}

TEST(Stieltjes, CauchyLawAtFixedPoint) {
    std::vector<double> s;
    for (std::size_t j = 0; j < 10000; ++j) s.push_back(stieltjes(sample_poisson(1000.0, 6, j), 0.0));
    EXPECT_LE(ks_distance(s, [](double x) { return cauchy_cdf(x, M_PI); }), 0.05);
}

TEST(Evaluator, MatchesLongDoubleSum) {
    PoissonConfiguration c = sample_poisson(1e4, 7);
    SebaEvaluator ev(c, 5.0);
    for (double x : {-4.9, -1.234567, 0.0001, 2.5, 4.99}) {
        bool on_point = std::binary_search(c.points.begin(), c.points.end(), x);
        if (on_point) continue;
        double ref = naive_stieltjes(c.points, x);
        EXPECT_NEAR(ev(x).f, ref, 1e-11 * std::max(1.0, std::abs(ref)));
        EXPECT_NEAR(ev(x).df, stieltjes_derivative(c, x), 1e-11 * ev(x).df);
    }
}

TEST(SolveSeba, SymmetricPair) {
    SebaSolution s = solve_seba(PoissonConfiguration::from_points({-1.0, 1.0}), 0.0, 2.0);
    ASSERT_EQ(s.roots.size(), 1u);
    EXPECT_NEAR(s.roots[0].u, 0.0, 1e-12);
    EXPECT_NEAR(s.roots[0].dist, 1.0, 1e-12);
}

TEST(SolveSeba, LargeLevelCoalescesWithPoles) {
    PoissonConfiguration c = sample_poisson(100.0, 8);
    for (double alpha : {1e6, -1e6}) {
        SebaSolution s = solve_seba(c, alpha, 5.0);
        for (const auto& r : s.roots) EXPECT_LE(r.dist, 1e-4);
    }
}

TEST(SolveSeba, InterlacingAndMonotoneInLevel) {
    PoissonConfiguration c = sample_poisson(200.0, 9);
    SebaEvaluator ev(c, 5.0);
    SebaSolution lo = solve_seba(c, ev, -3.0, 5.0), hi = solve_seba(c, ev, 3.0, 5.0);
    ASSERT_EQ(lo.roots.size(), hi.roots.size());
    for (std::size_t i = 0; i < lo.roots.size(); ++i) {
        EXPECT_LT(lo.roots[i].left, lo.roots[i].u);
        EXPECT_LT(lo.roots[i].u, lo.roots[i].right);
        EXPECT_LT(hi.roots[i].u, lo.roots[i].u);
        EXPECT_NEAR(ev(lo.roots[i].u).f, 3.0, 1e-9 * std::max(1.0, ev(lo.roots[i].u).df));
    }
}

TEST(SolveSeba, ShiftCovariance) {
    PoissonConfiguration c = sample_poisson(500.0, 10);
    const double b = 1.75, W = 8.0;
    SebaSolution base = solve_seba(c, 0.7, W);
    SebaSolution moved = solve_seba(c.shifted(b), 0.7, W + 2.0);
    std::size_t matched = 0;
    for (const auto& r : base.roots) {
        if (std::abs(r.u + b) > W) continue;
        for (const auto& m : moved.roots)
            if (std::abs(m.u - (r.u + b)) <= 1e-10) ++matched;
    }
    std::size_t expected = 0;
    for (const auto& r : base.roots) expected += std::abs(r.u + b) <= W;
    EXPECT_EQ(matched, expected);
}

TEST(SolveSeba, PartialEllOneNorms) {
    PoissonConfiguration c = sample_poisson(200.0, 11);
    SebaOptions o;
    o.ell1_windows = {2.0, 10.0, 50.0};
    SebaSolution s = solve_seba(c, 0.0, 5.0, o);
    for (const auto& r : s.roots) {
        ASSERT_EQ(r.ell1_partial.size(), 3u);
        EXPECT_LE(r.ell1_partial[0], r.ell1_partial[1]);
        EXPECT_LE(r.ell1_partial[1], r.ell1_partial[2]);
    }
}

TEST(SolveSeba, Preconditions) {
    PoissonConfiguration c = sample_poisson(20.0, 12);
    EXPECT_THROW(solve_seba(c, 0.0, 5.0), DomainError);  // W > truncation/10
    EXPECT_THROW(solve_seba(c, 0.0, -1.0), DomainError);
}

TEST(LocalizationBounds, HoldWithBinomialSlack) {
    auto zero = ensemble(1000, 1000.0, 0.0, 5.0, 13);
    LocalizationBoundReport r0 = localization_bound_check(zero, 0.0, 5.0, {1.0, 10.0}, {10.0});
    EXPECT_TRUE(r0.pass());
    EXPECT_EQ(r0.max_distance[0].bound, 1.0);
    EXPECT_LE(r0.max_distance[1].empirical, 0.1 + r0.max_distance[1].slack);
    auto strong = ensemble(1000, 1000.0, 20.0, 5.0, 14);
    LocalizationBoundReport r20 = localization_bound_check(strong, 20.0, 5.0, {2.0}, {40.0});
    EXPECT_LE(r20.min_distance[0].empirical, 0.5 + r20.min_distance[0].slack);
    EXPECT_THROW(localization_bound_check(zero, 0.0, 5.0, {2.0}, {0.0}), DomainError);
    std::vector<SebaSolution> few(zero.begin(), zero.begin() + 999);
    EXPECT_THROW(localization_bound_check(few, 0.0, 5.0, {2.0}, {10.0}), InsufficientEnsembleError);
}

TEST(GapExtremes, SmallCases) {
    GapExtremes g = gap_extremes({-1.0, 0.0, 2.0}, 3.0);
    EXPECT_EQ(g.delta_minus, 1.0);
    EXPECT_EQ(g.delta_plus, 2.0);
    GapExtremes e = gap_extremes({-1.5, -0.5, 0.5, 1.5}, 3.0);
    EXPECT_EQ(e.delta_minus, e.delta_plus);
    EXPECT_THROW(gap_extremes({0.0, 5.0}, 1.0), InsufficientEnsembleError);
}

TEST(GapExtremes, PoissonBounds) {
    const double W = 10.0;
    const std::size_t n = 4000;
    std::size_t big = 0, small = 0;
    for (std::size_t j = 0; j < n; ++j) {
        PoissonConfiguration c = sample_poisson(W, 15, j);
        if (c.points.size() < 2) {
            ++big;
            continue;
        }
        GapExtremes g = gap_extremes(c.points, W);
        big += g.delta_plus > 2.0 * std::log(W);  // t = 1
        small += g.delta_minus < 0.01;
    }
    EXPECT_TRUE(binomial_bound_point(1.0, big, n, 2.0 * W / std::pow(W, 2.0)).pass);
    EXPECT_TRUE(binomial_bound_point(0.01, small, n, 2.0 * W * 0.01).pass);
}
