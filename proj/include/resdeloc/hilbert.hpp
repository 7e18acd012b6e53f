#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace resdeloc {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double gaussian_density(double v) { return std::exp(-0.5 * v * v) / std::sqrt(2.0 * kPi); }

// Dawson integral D(x) = e^{−x²} ∫₀ˣ e^{t²} dt.
// Positive-term series up to |x| = 6, asymptotic series beyond.
inline double dawson(double x) {
    double ax = std::abs(x);
    double result;
    if (ax <= 6.0) {
        double x2 = ax * ax;
        double term = ax;  // x^{2k+1}/k!
        double sum = ax;
        for (int k = 1; k < 400; ++k) {
            term *= x2 / k;
            double add = term / (2 * k + 1);
            sum += add;
            if (add < 1e-17 * sum) break;
        }
        result = std::exp(-x2) * sum;
    } else {
        // D(x) ~ 1/(2x) Σ (2k−1)!!/(2x²)^k, truncated at its smallest term.
        double r = 1.0 / (2.0 * ax * ax);
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            double next = term * (2 * k - 1) * r;
            if (next >= term) break;
            term = next;
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        result = sum / (2.0 * ax);
    }
    return x < 0 ? -result : result;
}

// PV ∫ ϱ(v)/(v − ξ) dv for the standard Gaussian density ϱ.
inline double gaussian_hilbert(double xi) { return -std::sqrt(2.0) * dawson(xi / std::sqrt(2.0)); }

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Adaptive Gauss–Kronrod over [a, b] split at the given breakpoints and into
// chunks no longer than max_chunk.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, double max_chunk, double tol) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
        if (!(hi > lo)) continue;
        int chunks = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_chunk)));
        for (int c = 0; c < chunks; ++c) {
            double x0 = lo + (hi - lo) * c / chunks, x1 = lo + (hi - lo) * (c + 1) / chunks;
            double err = 0.0;
            double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x0, x1, 15, tol, &err);
            if (!(err <= std::max(1e-13, 1e3 * tol * std::abs(val)))) throw QuadratureError("adaptive quadrature did not converge");
            total += val;
        }
    }
    return total;
}

}  // namespace detail

// Independent reference for gaussian_hilbert: the symmetric substitution
// ∫₀^cutoff [ϱ(ξ+w) − ϱ(ξ−w)]/w dw has no singularity.
inline double pv_quadrature_oracle(double xi, double cutoff = -1.0, double tol = 1e-12) {
    if (cutoff < 0.0) cutoff = std::abs(xi) + 14.0;
    if (cutoff < std::abs(xi) + 12.0) throw DomainError("pv_quadrature_oracle: cutoff must be at least |xi| + 12");
    // ϱ(ξ+w) − ϱ(ξ−w) = ϱ(ξ∓w)·expm1(∓2ξw), free of cancellation at small w
    // and of overflow at large |ξ|.
    auto f = [xi](double w) {
        if (w == 0.0) return -2.0 * xi * gaussian_density(xi);
        if (xi >= 0.0) return gaussian_density(xi - w) * std::expm1(-2.0 * xi * w) / w;
        return -gaussian_density(xi + w) * std::expm1(2.0 * xi * w) / w;
    };
    return detail::integrate_pieces(f, 0.0, cutoff, {std::abs(xi)}, 2.0, tol);
}

// ρ̂(E) = (1/κ)·H(E/κ).
inline double rho_hat(double E, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("rho_hat: kappa must be positive");
    return gaussian_hilbert(E / kappa) / kappa;
}

struct ReferenceEnergies {
    double e_minus1 = 0.0;
    double e_zero = 0.0;
    double kappa = 0.0;
    bool asymptotic_regime = true;  // kappa ≤ 0.5
};

// Zeroth-order prediction of the near-zero reference energy from the small-ξ
// prefactor −2√π; kept for reporting next to the root-found value.
inline double small_xi_prefactor_prediction(double kappa) { return -kappa * kappa / (2.0 * std::sqrt(kPi)); }

namespace detail {

inline double bisect_rho_hat(double lo, double hi, double kappa, const char* which) {
    auto g = [&](double E) { return rho_hat(E, kappa) - 1.0; };
    double glo = g(lo), ghi = g(hi);
    if (!(glo * ghi < 0.0)) {
        std::ostringstream msg;
        msg << "solve_reference_energies: no sign change for " << which << " in [" << lo << ", " << hi
            << "]; rho_hat profile:";
        for (int i = 0; i <= 8; ++i) {
            double E = lo + (hi - lo) * i / 8.0;
            msg << " (" << E << ", " << rho_hat(E, kappa) << ")";
        }
        throw DomainError(msg.str());
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline ReferenceEnergies solve_reference_energies(double kappa) {
    if (!(kappa > 0.0)) throw DomainError("solve_reference_energies: kappa must be positive");
    ReferenceEnergies out;
    out.kappa = kappa;
    out.asymptotic_regime = kappa <= 0.5;
    double k2 = kappa * kappa;
    out.e_minus1 = detail::bisect_rho_hat(-1.0 - 4.0 * k2, -1.0, kappa, "e_minus1");
    out.e_zero = detail::bisect_rho_hat(-4.0 * k2, 0.0, kappa, "e_zero");
    return out;
}

struct IntegralBounds {
    double integral = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool holds() const { return lower <= integral && integral <= upper; }
};

inline constexpr double kIntegralLowerConstant = 0.05;
inline constexpr double kIntegralUpperConstant = 20.0;

// ∫_{|u−v|≥δ} ϱ(u)/|u−v|² du against c/(1+|v|)² and C·(ϱ(v)/δ + 1/(1+|v|)²).
inline IntegralBounds intrho_bounds_check(double v, double delta, double c = kIntegralLowerConstant,
                                          double C = kIntegralUpperConstant) {
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("intrho_bounds_check: delta must lie in (0, 1]");
    auto f = [v](double w) { return (gaussian_density(v + w) + gaussian_density(v - w)) / (w * w); };
    double upper_limit = std::abs(v) + 40.0;
    IntegralBounds out;
    // Beyond the last breakpoint ϱ is negligible; the 1/w² tail of the
    // density-free part is absent, so truncation error is below 1e-300.
    out.integral = detail::integrate_pieces(f, delta, upper_limit, {1.0, std::abs(v)}, 2.0, 1e-12);
    double s = 1.0 / ((1.0 + std::abs(v)) * (1.0 + std::abs(v)));
    out.lower = c * s;
    out.upper = C * (gaussian_density(v) / delta + s);
    return out;
}

}  // namespace resdeloc
