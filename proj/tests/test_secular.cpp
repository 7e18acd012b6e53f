#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "resdeloc/dense_oracle.hpp"
#include "resdeloc/secular.hpp"

using namespace resdeloc;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

// Long-double reference for F and F'.
SecularValue reference_sum(const std::vector<double>& poles, double E) {
    long double f = 0, df = 0;
    for (double p : poles) {
        long double d = static_cast<long double>(p) - E;
        f += 1.0L / d;
        df += 1.0L / (d * d);
    }
    long double m = poles.size();
    return {static_cast<double>(f / m), static_cast<double>(df / m)};
}

std::vector<double> eigen_reference(const PotentialSample& s) {
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Constant(n, n, -1.0 / static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i) H(i, i) += s.kappa() * s.raw_values[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    return ev;
}

}  // namespace

TEST(SecularValue, TwoPoleArithmetic) {
    PotentialSample s = PotentialSample::from_scaled({-1.0, 1.0});
    EXPECT_DOUBLE_EQ(secular_value(s, 0.0), 0.0);
    PotentialSample t = PotentialSample::from_scaled({0.0, 2.0});
    EXPECT_NEAR(secular_value(t, 0.5), -2.0 / 3.0, 1e-15);
    EXPECT_NEAR(secular_value(t, 1.0 - kGolden), 1.0, 1e-14);
    EXPECT_THROW(secular_value(t, 2.0), PoleError);
}

TEST(SecularValue, MatchesLongDoubleSum) {
    PotentialSample s = sample_potential(ModelParams::make(3000, 1.0, 5));
    for (double E : {-1.3, -0.41, 0.0137, 0.77}) {
        SecularValue v = secular_pair(s, E), r = reference_sum(s.sorted_scaled, E);
        EXPECT_NEAR(v.f, r.f, 1e-13 * std::max(1.0, std::abs(r.f)));
        EXPECT_NEAR(v.df, r.df, 1e-13 * r.df);
    }
}

TEST(SecularValue, DerivativeMatchesFiniteDifference) {
    PotentialSample s = sample_potential(ModelParams::make(500, 1.0, 6));
    double E = 0.5 * (s.sorted_scaled[200] + s.sorted_scaled[201]);
    double h = 1e-6 * (s.sorted_scaled[201] - s.sorted_scaled[200]);
    double fd = (secular_value(s, E + h) - secular_value(s, E - h)) / (2 * h);
    EXPECT_NEAR(secular_derivative(s, E), fd, 1e-5 * std::abs(fd));
    EXPECT_GT(secular_derivative(s, E), 0.0);
}

TEST(SolveGap, OneByOne) {
    PotentialSample s = PotentialSample::from_scaled({0.3});
    EXPECT_NEAR(solve_gap(s, 0), 0.3 - 1.0, 1e-14);
}

TEST(SolveGap, GoldenRatioPair) {
    PotentialSample s = PotentialSample::from_scaled({0.0, 2.0});
    SpectrumResult r = solve_spectrum_full(s, SolverOptions{1e-15});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r.eigenvalues[0], 1.0 - kGolden, 1e-14);
    EXPECT_NEAR(r.eigenvalues[1], kGolden, 1e-14);
    // Default tolerance stops within tol times the gap width (2 here).
    SpectrumResult loose = solve_spectrum_full(s);
    EXPECT_NEAR(loose.eigenvalues[1], kGolden, 2e-12);
    std::vector<double> dense = dense_oracle(s);
    EXPECT_NEAR(dense[0], 1.0 - kGolden, 1e-14);
    EXPECT_NEAR(dense[1], kGolden, 1e-14);
}

TEST(SolveGap, ConstantPotentialGroundState) {
    ModelParams p = ModelParams::make(50, 1.0);
    PotentialSample s = PotentialSample::from_values(p, std::vector<double>(50, 0.7));
    EXPECT_NEAR(ground_state_energy(s), p.kappa * 0.7 - 1.0, 1e-12);
    EXPECT_THROW(solve_spectrum_full(s), DegenerateSampleError);
}

TEST(SolveGap, RejectsBadTolerance) {
    PotentialSample s = PotentialSample::from_scaled({0.0, 2.0});
    EXPECT_THROW(ground_state_energy(s, 0.0), DomainError);
    EXPECT_THROW(solve_spectrum_full(s, SolverOptions{-1.0}), DomainError);
}

TEST(DenseOracle, ZeroPotential) {
    ModelParams p = ModelParams::make(6, 1.0);
    std::vector<double> ev = dense_oracle(PotentialSample::from_values(p, std::vector<double>(6, 0.0)));
    EXPECT_NEAR(ev[0], -1.0, 1e-14);
    for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_NEAR(ev[i], 0.0, 1e-14);
}

TEST(DenseOracle, SizeLimit) {
    PotentialSample s = sample_potential(ModelParams::make(kDenseOracleMaxSize + 1, 1.0));
    EXPECT_THROW(dense_oracle(s), SizeError);
}

class OracleEquivalence : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OracleEquivalence, SecularMatchesDense) {
    const std::size_t M = GetParam();
    ModelParams p = ModelParams::make(M, 1.3, 2024);
    for (std::size_t i = 0; i < 10; ++i) {
        PotentialSample s = sample_potential(p, i);
        SpectrumResult r = solve_spectrum_full(s);
        std::vector<double> ref = eigen_reference(s);
        std::vector<double> lib = dense_oracle(s);
        ASSERT_EQ(r.size(), M);
        for (std::size_t k = 0; k < M; ++k) {
            EXPECT_NEAR(r.eigenvalues[k], ref[k], 1e-9);
            EXPECT_NEAR(lib[k], ref[k], 1e-12);
        }
        double trace = std::accumulate(s.sorted_scaled.begin(), s.sorted_scaled.end(), 0.0) - 1.0;
        double sum = std::accumulate(r.eigenvalues.begin(), r.eigenvalues.end(), 0.0);
        EXPECT_NEAR(sum, trace, 1e-8 * static_cast<double>(M));
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, OracleEquivalence, ::testing::Values(2, 3, 8, 64, 256));

TEST(Spectrum, InterlacesWithPoles) {
    ModelParams p = ModelParams::make(2000, 0.7, 8);
    for (std::size_t i = 0; i < 3; ++i) {
        PotentialSample s = sample_potential(p, i);
        SpectrumResult r = solve_spectrum_full(s);
        const auto& q = s.sorted_scaled;
        EXPECT_LT(r.eigenvalues[0], q[0]);
        for (std::size_t k = 1; k < r.size(); ++k) {
            EXPECT_GT(r.eigenvalues[k], q[k - 1]);
            EXPECT_LT(r.eigenvalues[k], q[k]);
        }
    }
}

TEST(Spectrum, TreeAgreesWithDirect) {
    PotentialSample s = sample_potential(ModelParams::make(5000, 1.0, 9));
    SpectrumResult direct = solve_spectrum_full(s);
    SolverOptions o;
    o.method = SecularMethod::Tree;
    o.newton_switch = std::numeric_limits<double>::infinity();
    SpectrumResult tree = solve_spectrum_full(s, o);
    ASSERT_EQ(tree.size(), direct.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < direct.size(); ++k)
        worst = std::max(worst, std::abs(tree.eigenvalues[k] - direct.eigenvalues[k]));
    EXPECT_LE(worst, 1e-12);
}

TEST(TreeEvaluator, MatchesLongDoubleSum) {
    PotentialSample s = sample_potential(ModelParams::make(4000, 1.0, 10));
    TreeSecular tree(s.sorted_scaled);
    for (std::size_t gap : {1u, 17u, 2000u, 3999u}) {
        double E = 0.5 * (s.sorted_scaled[gap - 1] + s.sorted_scaled[gap]);
        SecularValue v = tree.evaluate(gap, E), r = reference_sum(s.sorted_scaled, E);
        EXPECT_NEAR(v.f, r.f, 1e-11 * std::max(1.0, std::abs(r.f)));
        EXPECT_NEAR(v.df, r.df, 1e-11 * r.df);
    }
}

TEST(Window, WholeLineEqualsFull) {
    PotentialSample s = sample_potential(ModelParams::make(300, 1.0, 11));
    SpectrumResult full = solve_spectrum_full(s);
    SpectrumResult w = solve_spectrum_window(s, s.min_pole() - 3.0, s.max_pole() + 1.0);
    EXPECT_EQ(w.eigenvalues, full.eigenvalues);
    EXPECT_EQ(w.pole_index, full.pole_index);
}

TEST(Window, EmptyGapGivesEmptyResult) {
    PotentialSample s = sample_potential(ModelParams::make(300, 1.0, 12));
    SpectrumResult full = solve_spectrum_full(s);
    // A slice of gap 150 strictly on one side of its root.
    double lo = s.sorted_scaled[149], E = full.eigenvalues[150];
    SpectrumResult w = solve_spectrum_window(s, lo + 0.1 * (E - lo), lo + 0.9 * (E - lo));
    EXPECT_EQ(w.size(), 0u);
    EXPECT_THROW(solve_spectrum_window(s, 1.0, 0.0), DomainError);
}

TEST(Window, PartitionUnionEqualsFull) {
    PotentialSample s = sample_potential(ModelParams::make(4096, 1.0, 13));
    SpectrumResult full = solve_spectrum_full(s);
    SpectrumResult mid = solve_spectrum_window(s, -0.6, -0.4);
    std::vector<double> expect;
    for (double E : full.eigenvalues)
        if (E >= -0.6 && E <= -0.4) expect.push_back(E);
    EXPECT_EQ(mid.eigenvalues, expect);
    double lo = s.min_pole() - 2.0, hi = s.max_pole() + 1.0;
    std::vector<double> cuts = {lo, -0.6, -0.4, hi};
    for (int k = 1; k < 20; ++k) cuts.push_back(lo + (hi - lo) * k / 20.0);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> joined;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        SpectrumResult part = solve_spectrum_window(s, cuts[i], cuts[i + 1]);
        for (double E : part.eigenvalues)
            if (E < cuts[i + 1] || i + 2 == cuts.size()) joined.push_back(E);
    }
    EXPECT_EQ(joined, full.eigenvalues);
}

TEST(Eigenfunction, TwoByTwoParallelToDense) {
    PotentialSample s = PotentialSample::from_scaled({0.0, 2.0});
    double E = 1.0 - kGolden;
    EigenfunctionValues psi = eigenfunction(s, E, 1.0);
    EXPECT_NEAR(psi.values[0], 1.6180339887, 1e-9);
    EXPECT_NEAR(psi.values[1], 0.3819660113, 1e-9);
    Eigen::Matrix2d H;
    H << -0.5, -0.5, -0.5, 1.5;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
    Eigen::Vector2d v = es.eigenvectors().col(0);
    EXPECT_NEAR(std::abs(v(0) * psi.values[1] - v(1) * psi.values[0]), 0.0, 1e-12);
    EigenfunctionValues zero = eigenfunction(s, E, 0.0);
    EXPECT_EQ(zero.values, std::vector<double>(2, 0.0));
}

TEST(Eigenfunction, ResidualSmall) {
    PotentialSample s = sample_potential(ModelParams::make(128, 1.0, 14));
    SpectrumResult r = solve_spectrum_full(s);
    for (std::size_t k : {0u, 1u, 60u, 127u}) {
        EigenfunctionValues psi = eigenfunction(s, r.eigenvalues[k], 1.0);
        std::vector<double> h = apply_hamiltonian(s, psi.values);
        double res = 0.0, nrm = 0.0;
        for (std::size_t x = 0; x < h.size(); ++x) {
            res += std::pow(h[x] - r.eigenvalues[k] * psi.values[x], 2);
            nrm += psi.values[x] * psi.values[x];
        }
        EXPECT_LE(std::sqrt(res), 1e-8 * std::sqrt(nrm));
    }
}

TEST(Tolerance, LooseToleranceDegradesAgreement) {
    PotentialSample s = sample_potential(ModelParams::make(64, 1.0, 15));
    SpectrumResult loose = solve_spectrum_full(s, SolverOptions{1e-2});
    std::vector<double> ref = eigen_reference(s);
    double worst = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(loose.eigenvalues[k] - ref[k]));
    EXPECT_GT(worst, 1e-9);
}
