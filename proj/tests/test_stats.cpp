#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "resdeloc/secular.hpp"
#include "resdeloc/stats.hpp"

using namespace resdeloc;

namespace {

// Dense-grid Hausdorff distance: points of A against a sampled B and back.
double brute_hausdorff(const std::vector<double>& A, const std::vector<double>& Bpts,
                       const std::vector<std::pair<double, double>>& Bint) {
    std::vector<double> B = Bpts;
    for (auto [a, b] : Bint)
        for (int i = 0; i <= 200000; ++i) B.push_back(a + (b - a) * i / 200000.0);
    auto d = [](double x, const std::vector<double>& S) {
        double best = INFINITY;
        for (double s : S) best = std::min(best, std::abs(x - s));
        return best;
    };
    double h = 0.0;
    for (double x : A) h = std::max(h, d(x, B));
    for (double y : B) h = std::max(h, d(y, A));
    return h;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Engine eng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(eng);
    return v;
}

}  // namespace

TEST(Norms, SmallVectors) {
    NormProfile one = norm_profile(std::vector<double>{0.0, 0.0, 1.0});
    EXPECT_EQ(one.ell_inf, 1.0);
    EXPECT_EQ(one.ratio21, 1.0);
    EXPECT_EQ(one.ratio11, 1.0);
    NormProfile two = norm_profile(std::vector<double>{-1.0, 1.0});
    EXPECT_NEAR(two.ell2, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(two.ratio11, 2.0);
    EXPECT_THROW(norm_profile(std::vector<double>{0.0}), DomainError);
}

TEST(Norms, OrderingOnRandomVectors) {
    std::vector<double> v = normals(500, 1);
    NormProfile np = norm_profile(v);
    EXPECT_LE(np.ell_inf, np.ell2);
    EXPECT_LE(np.ell2, np.ell1);
    EXPECT_LE(np.ratio21, std::sqrt(500.0) * (1 + 1e-12));
}

TEST(Participation, DeltaAndUniform) {
    std::vector<double> delta(100, 0.0);
    delta[7] = 3.0;
    EXPECT_NEAR(participation_ratio(delta, 2.0).value, 1.0, 1e-15);
    std::vector<double> flat(100, 0.25);
    EXPECT_NEAR(participation_ratio(flat, 2.0).value, 0.01, 1e-15);
    EXPECT_THROW(participation_ratio(flat, 0.5), DomainError);
}

TEST(Participation, SandwichHoldsForAllQ) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::vector<double> v = normals(300, seed + 10);
        for (double q : {1.5, 2.0, 3.0}) {
            ParticipationRatio pr = participation_ratio(v, q);
            EXPECT_TRUE(pr.sandwich) << seed << " q=" << q;
            EXPECT_LE(std::pow(pr.r, 2 * q), pr.value * (1 + 1e-12));
            EXPECT_LE(pr.value, std::pow(pr.r, 2 * (q - 1)) * (1 + 1e-12));
        }
    }
}

TEST(Hausdorff, SmallSets) {
    EXPECT_EQ(hausdorff_distance(std::vector<double>{0.0}, std::vector<double>{0.0}), 0.0);
    ClosedSet B{{-1.0}, {{-0.5, 0.5}}};
    std::vector<double> A{-1.0, 0.3};
    double h = hausdorff_distance(A, B);
    EXPECT_NEAR(h, 0.65, 1e-12);
    EXPECT_NEAR(h, brute_hausdorff(A, B.points, B.intervals), 1e-5);
    EXPECT_THROW(hausdorff_distance(std::vector<double>{}, B), EmptyInputError);
}

TEST(Hausdorff, RandomSetsAgreeWithGrid) {
    Engine eng(3);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> A(12);
        for (auto& x : A) x = U(eng);
        ClosedSet B{{U(eng)}, {{-0.7, 0.4}}};
        EXPECT_NEAR(hausdorff_distance(A, B), brute_hausdorff(A, B.points, B.intervals), 1e-5);
    }
}

TEST(Hausdorff, SpectrumApproachesLimitSet) {
    ModelParams p = ModelParams::make(100000, 0.5, 4);
    PotentialSample s = sample_potential(p);
    SolverOptions o;
    o.method = SecularMethod::Tree;
    o.newton_switch = INFINITY;
    SpectrumResult sp = solve_spectrum_full(s, o);
    ClosedSet limit{{-1.0}, {{-p.lambda, p.lambda}}};
    EXPECT_LE(hausdorff_distance(sp.eigenvalues, limit), 0.1);
}

TEST(KolmogorovSmirnov, Basics) {
    std::vector<double> a = normals(100, 5);
    EXPECT_EQ(ks_distance(a, a), 0.0);
    EXPECT_EQ(ks_distance(std::vector<double>{0.0}, std::vector<double>{1.0}), 1.0);
    EXPECT_NEAR(ks_critical_value(1000, 1000), 0.0608, 1e-4);
    EXPECT_LE(ks_distance(normals(1000, 6), normals(1000, 7)), ks_critical_value(1000, 1000));
    EXPECT_THROW(ks_distance(std::vector<double>{}, a), EmptyInputError);
}

TEST(KolmogorovSmirnov, OneSampleAgainstTwoSample) {
    std::vector<double> a = normals(2000, 8);
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    EXPECT_LE(ks_distance(a, Phi), 1.36 / std::sqrt(2000.0));
    EXPECT_NEAR(exponential_cdf(1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(cauchy_cdf(kPi, kPi), 0.75, 1e-15);
}

TEST(Tunneling, FlatPotential) {
    ModelParams p = ModelParams::make(3, 1.0);
    PotentialSample s = PotentialSample::from_values(p, {0.0, 0.0, 0.0});
    TunnelingResult t = tunneling_amplitude(s, 0, 1, -0.5);
    EXPECT_NEAR(t.tau, 1.0, 1e-15);
    EXPECT_NEAR(t.boost, 3.0, 1e-15);
    EXPECT_THROW(tunneling_amplitude(s, 1, 1, -0.5), DomainError);
    EXPECT_THROW(tunneling_amplitude(s, 0, 1, 0.0), PoleError);
}

TEST(Tunneling, AmplitudeTimesSizeInvertsBoost) {
    ModelParams p = ModelParams::make(5000, 1.0, 9);
    PotentialSample s = sample_potential(p);
    for (double E : {-0.5, -0.1, 0.3}) {
        TunnelingResult t = tunneling_amplitude(s, 0, 1, E);
        CompensatedSum sum;
        for (std::size_t n = 2; n < s.size(); ++n) sum.add(1.0 / (p.kappa * s.raw_values[n] - E));
        EXPECT_NEAR(t.tau * 5000.0 * std::abs(1.0 - sum.value() / 5000.0), 1.0, 1e-12);
        EXPECT_NEAR(t.criterion, hybridization_criterion(p, E), 1e-12 * t.criterion);
    }
}

TEST(Hybridization, CriterionSeparatesRegimes) {
    ModelParams p = ModelParams::make(100000, 1.0);
    ReferenceEnergies r = solve_reference_energies(p.kappa);
    EXPECT_LT(hybridization_criterion(p, r.e_zero), 1.0);
    EXPECT_GT(hybridization_criterion(p, -0.5), 1.0);
}

TEST(Concentration, GaussianTails) {
    std::vector<double> v = normals(5000, 11);
    ConcentrationReport rep = concentration_check(v, {0.0, 1.0, 2.0, 3.0}, 1.0, 10.0);
    EXPECT_NEAR(rep.mean, 0.0, 0.05);
    EXPECT_NEAR(rep.stddev, 1.0, 0.05);
    EXPECT_LE(rep.curve[0].empirical, rep.bound(0.0, 1.0));
    EXPECT_LE(rep.curve[3].empirical, 0.01);
    EXPECT_GT(rep.calibrated_c, 0.0);
    for (const auto& cp : rep.curve) EXPECT_LE(cp.empirical, rep.bound(cp.tau, rep.calibrated_c) * (1 + 1e-12));
    EXPECT_THROW(concentration_check(normals(999, 1), {1.0}, 1.0, 1.0), InsufficientEnsembleError);
}

TEST(Summaries, MeanMedianVariance) {
    std::vector<double> v{3.0, 1.0, 2.0, 10.0};
    EXPECT_EQ(mean(v), 4.0);
    EXPECT_EQ(median(v), 2.5);
    EXPECT_NEAR(variance(v), 50.0 / 3.0, 1e-14);
    EXPECT_THROW(mean(std::vector<double>{}), EmptyInputError);
}
