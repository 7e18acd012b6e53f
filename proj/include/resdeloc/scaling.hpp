#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "hilbert.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "secular.hpp"

namespace resdeloc {

// Local mean level spacing √(2π)·κ·M^{(center/λ)²−1}.
// Outside the band the formula is still defined; callers must opt in.
inline double mean_gap(const ModelParams& params, double center, bool allow_outside_band = false) {
    if (!allow_outside_band && !(std::abs(center) < params.lambda))
        throw DomainError("mean_gap: center must lie strictly inside (-lambda, lambda)");
    double r = center / params.lambda;
    return std::sqrt(2.0 * kPi) * params.kappa * std::pow(static_cast<double>(params.M), r * r - 1.0);
}

inline double default_cutoff(std::size_t M) { return std::log(static_cast<double>(M)); }

struct LabeledPoint {
    long long label = 0;
    double value = 0.0;
};

struct ScalingWindow {
    double center = 0.0;
    double delta = 1.0;
    double half_width = 1.0;
    double cutoff = 1.0;
    std::size_t M = 0;
    long long zero_rank = -1;  // rank of ω_0, the largest pole at or below center
    std::size_t cutoff_lo = 0, cutoff_hi = 0;  // ranks with |ω| ≤ cutoff
    std::vector<LabeledPoint> omega;           // |ω| ≤ cutoff, ascending
    std::vector<LabeledPoint> u;               // |u| ≤ half_width, ascending

    double to_omega(double energy) const { return (energy - center) / delta; }
    double to_energy(double x) const { return center + x * delta; }
    long long label_of_rank(std::size_t rank) const { return static_cast<long long>(rank) - zero_rank; }

    const LabeledPoint* find_u(long long label) const {
        for (const auto& p : u)
            if (p.label == label) return &p;
        return nullptr;
    }
};

// Builds the window with an explicit gap scale (synthetic samples) or the
// model's mean gap at center.
inline ScalingWindow build_window(const PotentialSample& sample, const SpectrumResult& spectrum, double center,
                                  double delta, double half_width, double cutoff) {
    if (!(delta > 0.0) || !(half_width > 0.0) || !(cutoff > 0.0))
        throw DomainError("build_window: delta, half_width and cutoff must be positive");
    double margin = (half_width + 2.0) * delta;
    if (!spectrum.covers(center - margin, center + margin))
        throw CoverageError("build_window: eigenvalues do not span the window plus margin");
    const auto& p = sample.sorted_scaled;
    ScalingWindow w;
    w.center = center;
    w.delta = delta;
    w.half_width = half_width;
    w.cutoff = cutoff;
    w.M = p.size();
    w.zero_rank = static_cast<long long>(std::upper_bound(p.begin(), p.end(), center) - p.begin()) - 1;
    std::size_t lo = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), center - cutoff * delta) - p.begin());
    std::size_t hi = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), center + cutoff * delta) - p.begin());
    while (lo < hi && std::abs(w.to_omega(p[lo])) > cutoff) ++lo;
    while (hi > lo && std::abs(w.to_omega(p[hi - 1])) > cutoff) --hi;
    while (lo > 0 && std::abs(w.to_omega(p[lo - 1])) <= cutoff) --lo;
    while (hi < p.size() && std::abs(w.to_omega(p[hi])) <= cutoff) ++hi;
    w.cutoff_lo = lo;
    w.cutoff_hi = hi;
    for (std::size_t r = lo; r < hi; ++r) w.omega.push_back({w.label_of_rank(r), w.to_omega(p[r])});
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        double x = w.to_omega(spectrum.eigenvalues[i]);
        if (std::abs(x) <= half_width) w.u.push_back({w.label_of_rank(spectrum.pole_index[i]), x});
    }
    return w;
}

inline ScalingWindow build_window(const PotentialSample& sample, const SpectrumResult& spectrum, double center,
                                  double half_width, std::optional<double> cutoff = std::nullopt) {
    return build_window(sample, spectrum, center, mean_gap(sample.params, center), half_width,
                        cutoff.value_or(default_cutoff(sample.size())));
}

// Solves just enough of the spectrum for build_window at this center.
inline SpectrumResult window_spectrum(const PotentialSample& sample, double center, double delta, double half_width,
                                      const SolverOptions& opts = {}) {
    double margin = (half_width + 2.0) * delta;
    const auto& p = sample.sorted_scaled;
    auto inside = std::upper_bound(p.begin(), p.end(), center + margin) - std::lower_bound(p.begin(), p.end(), center - margin);
    // Windows spanning most of the spectrum: the O(M log M) tree solve of everything is cheaper.
    if (inside > 4096) {
        SolverOptions tree = opts;
        tree.method = SecularMethod::Tree;
        tree.newton_switch = std::numeric_limits<double>::infinity();
        return solve_spectrum_full(sample, tree);
    }
    return solve_spectrum_window(sample, center - margin, center + margin, opts);
}

// ψ(x) = Δ/(κV(x) − E): the eigenfunction normalized by the window's gap scale.
inline EigenfunctionValues eigenfunction(const PotentialSample& sample, double E, const ScalingWindow& window) {
    return eigenfunction(sample, E, window.delta);
}

struct SplitSums {
    double S = 0.0;
    double T = 0.0;
};

namespace detail {

// Σ 1/(ω − u) and Σ 1/(ω − u)² over ranks outside [lo, hi), farthest first.
inline SecularValue outer_sums(const ScalingWindow& w, const PotentialSample& sample, double u) {
    const auto& p = sample.sorted_scaled;
    CompensatedSum f, df;
    auto take = [&](std::size_t r) {
        double d = w.to_omega(p[r]) - u;
        if (d == 0.0) throw PoleError("split_secular: u coincides with a pole");
        double inv = 1.0 / d;
        f.add(inv);
        df.add(inv * inv);
    };
    std::size_t l = 0, r = p.size();
    while (l < w.cutoff_lo && r > w.cutoff_hi) {
        if (u - w.to_omega(p[l]) >= w.to_omega(p[r - 1]) - u)
            take(l++);
        else
            take(--r);
    }
    while (l < w.cutoff_lo) take(l++);
    while (r > w.cutoff_hi) take(--r);
    return {f.value(), df.value()};
}

}  // namespace detail

inline SplitSums split_secular(const ScalingWindow& w, const PotentialSample& sample, double u) {
    CompensatedSum s;
    // Inner sum from the window edges inward.
    std::size_t l = 0, r = w.omega.size();
    while (l < r) {
        double dl = std::abs(w.omega[l].value - u), dr = std::abs(w.omega[r - 1].value - u);
        double v = dl >= dr ? w.omega[l++].value : w.omega[--r].value;
        if (v == u) throw PoleError("split_secular: u coincides with a pole");
        s.add(1.0 / (v - u));
    }
    return {s.value(), detail::outer_sums(w, sample, u).f};
}

// R(u) = T(u) − MΔ.
inline double tail_function(const ScalingWindow& w, const PotentialSample& sample, double u) {
    return detail::outer_sums(w, sample, u).f - static_cast<double>(w.M) * w.delta;
}

// dR/du = Σ_{|ω|>L} (ω − u)⁻².
inline double tail_slope(const ScalingWindow& w, const PotentialSample& sample, double u) {
    return detail::outer_sums(w, sample, u).df;
}

// Σ 1/ω over poles with W < |ω| < L.
inline double y_statistic(const ScalingWindow& w, double W) {
    if (!(W < w.cutoff)) throw DomainError("y_statistic: W must be below the cutoff");
    CompensatedSum s;
    for (const auto& p : w.omega) {
        double a = std::abs(p.value);
        if (a > W && a < w.cutoff) s.add(1.0 / p.value);
    }
    return s.value();
}

// Worst ratio of the slope-deviation to its interpolation bound (6W/L)·slope
// over all grid triples. The tail function must be nondecreasing on the grid.
inline double interpolation_check(const std::vector<double>& u, const std::vector<double>& R, double W, double L) {
    if (u.size() != R.size() || u.size() < 3) throw DomainError("interpolation_check: need at least three grid points");
    if (!(W < L / 10.0)) throw DomainError("interpolation_check: need W < L/10");
    for (std::size_t i = 1; i < u.size(); ++i) {
        if (!(u[i] > u[i - 1])) throw DomainError("interpolation_check: grid must be increasing");
        if (R[i] < R[i - 1]) throw DomainError("interpolation_check: monotonicity violation in R");
    }
    double worst = 0.0;
    const std::size_t n = u.size();
    for (std::size_t i0 = 0; i0 < n; ++i0) {
        for (std::size_t i1 = 0; i1 < n; ++i1) {
            if (i1 == i0) continue;
            double ref = (R[i1] - R[i0]) / (u[i1] - u[i0]);
            double bound = (6.0 * W / L) * ref;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == i0 || i == i1) continue;
                double dev = std::abs((R[i] - R[i0]) / (u[i] - u[i0]) - ref);
                if (dev == 0.0) continue;
                double ratio = bound > 0.0 ? dev / bound : std::numeric_limits<double>::infinity();
                worst = std::max(worst, ratio);
            }
        }
    }
    return worst;
}

// ── tail classification ─────────────────────────────────────────────────

struct TailThresholds {
    double slope = 0.5;
    double spread = 0.5;
    double magnitude = 10.0;
    double success_fraction = 0.9;
};

struct TailMember {
    std::vector<double> u;
    std::vector<double> R;
};

struct RegularLinear {
    double a = 0.0;
    double b = 0.0;
};
struct SingularPlus {};
struct SingularMinus {};
struct SingularWithTransition {
    double tau = 0.0;
};
struct Ambiguous {
    std::string reason;
};

using TailLimit = std::variant<RegularLinear, SingularPlus, SingularMinus, SingularWithTransition, Ambiguous>;

struct TailClassification {
    TailLimit limit;
    TailThresholds thresholds;
    double median_slope = 0.0;
    double median_intercept = 0.0;
    double slope_spread = 0.0;      // robust sigma, IQR/1.349
    double intercept_spread = 0.0;  // robust sigma, IQR/1.349
    double fraction_plus = 0.0;     // members with min R > magnitude
    double fraction_minus = 0.0;    // members with max R < −magnitude
    double fraction_sign_change = 0.0;
    std::size_t members = 0;

    std::string name() const {
        static const char* names[] = {"RegularLinear", "SingularPlus", "SingularMinus", "SingularWithTransition",
                                      "Ambiguous"};
        return names[limit.index()];
    }
};

namespace detail {

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw EmptyInputError("quantile: empty input");
    std::sort(v.begin(), v.end());
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - static_cast<double>(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + frac * (v[i + 1] - v[i]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double robust_sigma(const std::vector<double>& v) { return (quantile(v, 0.75) - quantile(v, 0.25)) / 1.349; }

}  // namespace detail

// 17 equispaced points on [−W, W], shifted by a member-specific offset of at
// most 1e-3 so that no member evaluates exactly on a pole.
inline std::vector<double> classification_grid(double W, std::uint64_t seed, std::uint64_t member,
                                               std::size_t points = 17) {
    Engine eng = make_engine(seed, member, 0x6772696400ULL);
    double shift = std::uniform_real_distribution<double>(-1e-3, 1e-3)(eng);
    std::vector<double> u(points);
    for (std::size_t i = 0; i < points; ++i)
        u[i] = -W + 2.0 * W * static_cast<double>(i) / static_cast<double>(points - 1) + shift;
    return u;
}

inline TailClassification classify_tail(const std::vector<TailMember>& ensemble, const TailThresholds& th = {}) {
    if (ensemble.size() < 50) throw InsufficientEnsembleError("classify_tail: need at least 50 members");
    std::vector<double> slopes, intercepts, crossings;
    std::size_t plus = 0, minus = 0, change = 0;
    for (const auto& m : ensemble) {
        if (m.u.size() != m.R.size() || m.u.size() < 9) throw DomainError("classify_tail: need a grid of at least 9 points");
        const double n = static_cast<double>(m.u.size());
        double su = 0, sr = 0, suu = 0, sur = 0;
        for (std::size_t i = 0; i < m.u.size(); ++i) {
            su += m.u[i];
            sr += m.R[i];
            suu += m.u[i] * m.u[i];
            sur += m.u[i] * m.R[i];
        }
        double slope = (n * sur - su * sr) / (n * suu - su * su);
        slopes.push_back(slope);
        intercepts.push_back((sr - slope * su) / n);
        double lo = *std::min_element(m.R.begin(), m.R.end());
        double hi = *std::max_element(m.R.begin(), m.R.end());
        if (lo > th.magnitude) ++plus;
        if (hi < -th.magnitude) ++minus;
        for (std::size_t i = 1; i < m.R.size(); ++i) {
            if ((m.R[i - 1] < 0.0) != (m.R[i] < 0.0)) {
                ++change;
                double t = m.R[i - 1] / (m.R[i - 1] - m.R[i]);
                crossings.push_back(m.u[i - 1] + t * (m.u[i] - m.u[i - 1]));
                break;
            }
        }
    }
    TailClassification out;
    out.thresholds = th;
    out.members = ensemble.size();
    const double N = static_cast<double>(ensemble.size());
    out.median_slope = detail::median(slopes);
    out.median_intercept = detail::median(intercepts);
    out.slope_spread = detail::robust_sigma(slopes);
    out.intercept_spread = detail::robust_sigma(intercepts);
    out.fraction_plus = plus / N;
    out.fraction_minus = minus / N;
    out.fraction_sign_change = change / N;
    std::vector<double> abs_slopes(slopes.size());
    std::transform(slopes.begin(), slopes.end(), abs_slopes.begin(), [](double x) { return std::abs(x); });
    const double median_abs_slope = detail::median(abs_slopes);

    if (out.fraction_plus >= th.success_fraction) {
        out.limit = SingularPlus{};
    } else if (out.fraction_minus >= th.success_fraction) {
        out.limit = SingularMinus{};
    } else if (median_abs_slope > th.magnitude && out.fraction_sign_change >= th.success_fraction) {
        out.limit = SingularWithTransition{detail::median(crossings)};
    } else if (median_abs_slope <= th.slope && out.slope_spread <= th.slope && out.intercept_spread <= th.spread) {
        out.limit = RegularLinear{std::max(0.0, out.median_slope), out.median_intercept};
    } else {
        out.limit = Ambiguous{"thresholds straddled: no case reaches its decision rule"};
    }
    return out;
}

}  // namespace resdeloc
