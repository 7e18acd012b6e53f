#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "resdeloc/hilbert.hpp"

using namespace resdeloc;

namespace {

// D(x) = ∫₀ˣ e^{t²−x²} dt; the integrand never exceeds 1.
double dawson_reference(double x) {
    double ax = std::abs(x);
    auto f = [ax](double t) { return std::exp((t - ax) * (t + ax)); };
    double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, ax, 20, 1e-14);
    return x < 0 ? -v : v;
}

}  // namespace

TEST(Dawson, MatchesQuadrature) {
    for (double x : {0.0, 1e-6, 0.3, 0.9241388730, 2.5, 5.9, 6.0, 6.1, 8.0, 20.0, 35.0, -3.3}) {
        double ref = dawson_reference(x);
        EXPECT_NEAR(dawson(x), ref, 2e-15 + 1e-13 * std::abs(ref)) << x;
    }
}

TEST(GaussianHilbert, KnownValues) {
    EXPECT_EQ(gaussian_hilbert(0.0), 0.0);
    EXPECT_NEAR(gaussian_hilbert(10.0), -0.1010, 2e-4);
    EXPECT_NEAR(gaussian_hilbert(0.1), -0.0997, 1e-4);
    EXPECT_DOUBLE_EQ(gaussian_hilbert(-2.7), -gaussian_hilbert(2.7));
}

TEST(GaussianHilbert, SlopeAtOriginIsMinusOne) {
    EXPECT_NEAR(gaussian_hilbert(1e-4) / 1e-4, -1.0, 1e-8);
    EXPECT_NEAR(pv_quadrature_oracle(1e-4) / 1e-4, -1.0, 1e-8);
}

TEST(GaussianHilbert, LargeArgumentRemainder) {
    for (double xi : {20.0, 50.0}) {
        double rem = gaussian_hilbert(xi) + 1.0 / xi + 1.0 / (xi * xi * xi);
        // Next term of the asymptotic series is −3ξ⁻⁵.
        EXPECT_NEAR(rem * std::pow(xi, 5), -3.0, 0.1) << xi;
    }
}

TEST(PvOracle, KnownValuesAndAgreement) {
    EXPECT_NEAR(pv_quadrature_oracle(0.0), 0.0, 1e-12);
    EXPECT_NEAR(pv_quadrature_oracle(0.1), -0.0997, 1e-4);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double xi = -50.0 + 0.5 * i;
        worst = std::max(worst, std::abs(gaussian_hilbert(xi) - pv_quadrature_oracle(xi)));
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_THROW(pv_quadrature_oracle(30.0, 35.0), DomainError);
}

TEST(RhoHat, LimitsAndValues) {
    EXPECT_EQ(rho_hat(0.0, 0.3), 0.0);
    EXPECT_LE(std::abs(rho_hat(-0.5, 0.05) - 2.0), 0.05);
    const double k = 0.1;
    EXPECT_LE(std::abs(rho_hat(-1.0 - k * k, k) - 1.0), 5.0 * std::pow(k, 4));
    EXPECT_THROW(rho_hat(1.0, 0.0), DomainError);
}

TEST(ReferenceEnergies, SmallKappaExpansions) {
    for (double k : {0.05, 0.1, 0.2}) {
        ReferenceEnergies r = solve_reference_energies(k);
        EXPECT_LE(std::abs(r.e_minus1 + 1.0 + k * k), 5.0 * std::pow(k, 4)) << k;
        EXPECT_NEAR(rho_hat(r.e_minus1, k), 1.0, 1e-12);
        EXPECT_NEAR(rho_hat(r.e_zero, k), 1.0, 1e-12);
        EXPECT_TRUE(r.asymptotic_regime);
    }
    ReferenceEnergies r = solve_reference_energies(0.1);
    EXPECT_NEAR(r.e_minus1, -1.0100, 5e-4);
    EXPECT_NEAR(r.e_zero, -0.0100, 5e-4);
    EXPECT_NEAR(small_xi_prefactor_prediction(0.1), -0.00282, 1e-5);
    EXPECT_THROW(solve_reference_energies(0.0), DomainError);
}

TEST(IntegralBounds, CenterValue) {
    IntegralBounds b = intrho_bounds_check(0.0, 1.0);
    EXPECT_NEAR(b.integral, 0.1666, 1e-3);
    EXPECT_TRUE(b.holds());
    EXPECT_THROW(intrho_bounds_check(0.0, 0.0), DomainError);
    EXPECT_THROW(intrho_bounds_check(0.0, 1.5), DomainError);
}

TEST(IntegralBounds, FarFieldScaling) {
    for (double v = 5.0; v <= 10.0; v += 0.5) {
        IntegralBounds b = intrho_bounds_check(v, 0.5);
        double scaled = b.integral * (1.0 + v) * (1.0 + v);
        EXPECT_GE(scaled, kIntegralLowerConstant);
        EXPECT_LE(scaled, 2.0 * kIntegralUpperConstant);
    }
}

TEST(IntegralBounds, NearSingularity) {
    const double d = 0.01;
    double ratio = intrho_bounds_check(0.0, d).integral / (gaussian_density(0.0) / d);
    EXPECT_GE(ratio, 1.5);
    EXPECT_LE(ratio, 2.5);
}

TEST(IntegralBounds, GridHasNoViolations) {
    for (int i = 0; i <= 80; ++i)
        for (double d : {0.01, 0.1, 1.0}) EXPECT_TRUE(intrho_bounds_check(-10.0 + 0.25 * i, d).holds());
}
