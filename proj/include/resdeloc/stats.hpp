#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "hilbert.hpp"
#include "model.hpp"
#include "scaling.hpp"

namespace resdeloc {

// ── norms ───────────────────────────────────────────────────────────────

struct NormProfile {
    double ell1 = 0.0, ell2 = 0.0, ell_inf = 0.0;
    double ratio21 = 0.0, ratio11 = 0.0;
    double head_sq = 0.0, body_sq = 0.0, tail_sq = 0.0;
};

// Norms of ψ(ω) = 1/(ω − u) over all rescaled poles for the eigenvalue u
// labeled n. Body and tail split at the window cutoff, like the S/T split.
inline NormProfile norm_profile(const ScalingWindow& w, const PotentialSample& sample, long long n) {
    const LabeledPoint* up = w.find_u(n);
    if (!up) throw DomainError("norm_profile: no eigenvalue with this label in the window");
    const double u = up->value;
    const auto& p = sample.sorted_scaled;
    // Nearest pole is one of the two gap endpoints.
    std::size_t right = static_cast<std::size_t>(n + w.zero_rank);
    double best = std::numeric_limits<double>::infinity();
    std::size_t nearest = right;
    for (std::size_t r : {right - 1, right}) {
        if (r >= p.size()) continue;  // also skips the wrap of right − 1 when right = 0
        double d = std::abs(w.to_omega(p[r]) - u);
        if (d < best) {
            best = d;
            nearest = r;
        }
    }
    CompensatedSum l1, body, tail;
    for (std::size_t r = 0; r < p.size(); ++r) {
        double d = std::abs(w.to_omega(p[r]) - u);
        if (d == 0.0) throw PoleError("norm_profile: eigenvalue coincides with a pole");
        double inv = 1.0 / d;
        l1.add(inv);
        if (r == nearest) continue;
        if (r >= w.cutoff_lo && r < w.cutoff_hi)
            body.add(inv * inv);
        else
            tail.add(inv * inv);
    }
    NormProfile np;
    np.ell_inf = 1.0 / best;
    np.head_sq = np.ell_inf * np.ell_inf;
    np.body_sq = body.value();
    np.tail_sq = tail.value();
    np.ell2 = std::sqrt(np.head_sq + np.body_sq + np.tail_sq);
    np.ell1 = l1.value();
    np.ratio21 = np.ell2 / np.ell_inf;
    np.ratio11 = np.ell1 / np.ell_inf;
    return np;
}

// Norm ratios of an arbitrary vector of eigenfunction values.
inline NormProfile norm_profile(const std::vector<double>& values) {
    CompensatedSum l1, l2;
    double mx = 0.0;
    for (double v : values) {
        l1.add(std::abs(v));
        l2.add(v * v);
        mx = std::max(mx, std::abs(v));
    }
    if (mx == 0.0) throw DomainError("norm_profile: zero function");
    NormProfile np;
    np.ell1 = l1.value();
    np.ell2 = std::sqrt(l2.value());
    np.ell_inf = mx;
    np.ratio21 = np.ell2 / mx;
    np.ratio11 = np.ell1 / mx;
    np.head_sq = mx * mx;
    np.body_sq = l2.value() - np.head_sq;
    return np;
}

struct ParticipationRatio {
    double q = 2.0;
    double value = 0.0;  // P_q = Σ|ψ|^{2q} / (Σ|ψ|²)^q
    double r = 0.0;      // ‖ψ‖∞/‖ψ‖₂
    bool sandwich = true;
};

inline ParticipationRatio participation_ratio(const std::vector<double>& values, double q) {
    if (!(q > 0.5)) throw DomainError("participation_ratio: q must exceed 1/2");
    CompensatedSum num, l2;
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) throw DomainError("participation_ratio: zero function");
    // Scaled by the peak to keep powers in range.
    for (double v : values) {
        double a = std::abs(v) / mx;
        num.add(std::pow(a, 2.0 * q));
        l2.add(a * a);
    }
    ParticipationRatio pr;
    pr.q = q;
    pr.value = num.value() / std::pow(l2.value(), q);
    pr.r = 1.0 / std::sqrt(l2.value());
    if (q > 1.0) {
        const double slack = 1e-12;
        double lo = std::pow(pr.r, 2.0 * q), hi = std::pow(pr.r, 2.0 * (q - 1.0));
        pr.sandwich = lo <= pr.value * (1.0 + slack) && pr.value <= hi * (1.0 + slack);
    }
    return pr;
}

// ── sets and distributions ──────────────────────────────────────────────

struct ClosedSet {
    std::vector<double> points;
    std::vector<std::pair<double, double>> intervals;

    bool empty() const { return points.empty() && intervals.empty(); }
};

namespace detail {

inline double distance_to_set(double x, const ClosedSet& B) {
    double best = std::numeric_limits<double>::infinity();
    for (double p : B.points) best = std::min(best, std::abs(x - p));
    for (auto [a, b] : B.intervals) best = std::min(best, x < a ? a - x : (x > b ? x - b : 0.0));
    return best;
}

// sup over [a, b] of the distance to a sorted finite set: attained at an
// endpoint or at a midpoint between consecutive set points.
inline double farthest_in_interval(double a, double b, const std::vector<double>& sorted) {
    auto dist = [&](double y) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), y);
        double d = std::numeric_limits<double>::infinity();
        if (it != sorted.end()) d = std::min(d, *it - y);
        if (it != sorted.begin()) d = std::min(d, y - *(it - 1));
        return d;
    };
    double best = std::max(dist(a), dist(b));
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        double m = 0.5 * (sorted[i - 1] + sorted[i]);
        if (m > a && m < b) best = std::max(best, dist(m));
    }
    return best;
}

}  // namespace detail

inline double hausdorff_distance(const std::vector<double>& A, const ClosedSet& B) {
    if (A.empty() || B.empty()) throw EmptyInputError("hausdorff_distance: empty set");
    std::vector<double> sorted(A);
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (double x : A) d = std::max(d, detail::distance_to_set(x, B));
    ClosedSet as_set{sorted, {}};
    for (double y : B.points) d = std::max(d, detail::distance_to_set(y, as_set));
    for (auto [a, b] : B.intervals) d = std::max(d, detail::farthest_in_interval(a, b, sorted));
    return d;
}

inline double hausdorff_distance(const std::vector<double>& A, const std::vector<double>& B) {
    return hausdorff_distance(A, ClosedSet{B, {}});
}

// Two-sample Kolmogorov–Smirnov distance; inputs need not be sorted.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptyInputError("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

// One-sample distance against a continuous CDF.
inline double ks_distance(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw EmptyInputError("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double F = cdf(a[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

// Asymptotic two-sample critical value at level 0.05 with n the smaller size.
inline double ks_critical_value(std::size_t n_a, std::size_t n_b) {
    double n = static_cast<double>(std::min(n_a, n_b));
    return 1.36 * std::sqrt(2.0 / n);
}

inline double exponential_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

// Cauchy law centered at 0 with scale s.
inline double cauchy_cdf(double x, double s) { return 0.5 + std::atan(x / s) / kPi; }

// ── tunneling ───────────────────────────────────────────────────────────

struct TunnelingResult {
    double tau = 0.0;
    double boost = 0.0;      // |1 − (1/M)Σ_{n≠i,j}(κV_n − E)⁻¹|⁻¹
    double criterion = 0.0;  // MΔ(E)·|1 − ρ̂(E)|
    double fluctuation = 0.0;  // √(ln M)/(λ·M^{(E/λ)²}), reported separately
};

inline TunnelingResult tunneling_amplitude(const PotentialSample& sample, std::size_t i, std::size_t j, double E) {
    if (i == j) throw DomainError("tunneling_amplitude: sites must differ");
    const std::size_t M = sample.size();
    if (i >= M || j >= M) throw DomainError("tunneling_amplitude: site out of range");
    CompensatedSum s;
    for (std::size_t n = 0; n < M; ++n) {
        if (n == i || n == j) continue;
        double d = sample.kappa() * sample.raw_values[n] - E;
        if (d == 0.0) throw PoleError("tunneling_amplitude: energy coincides with a pole");
        s.add(1.0 / d);
    }
    const double m = static_cast<double>(M);
    TunnelingResult t;
    t.boost = 1.0 / std::abs(1.0 - s.value() / m);
    t.tau = t.boost / m;
    const auto& pm = sample.params;
    if (std::abs(E) < pm.lambda) {
        t.criterion = m * mean_gap(pm, E) * std::abs(1.0 - rho_hat(E, pm.kappa));
        double r = E / pm.lambda;
        t.fluctuation = std::sqrt(std::log(m)) / (pm.lambda * std::pow(m, r * r));
    } else {
        t.criterion = std::numeric_limits<double>::quiet_NaN();
        t.fluctuation = std::numeric_limits<double>::quiet_NaN();
    }
    return t;
}

// Hybridization criterion MΔ(E)|1 − ρ̂(E)| without a sample.
inline double hybridization_criterion(const ModelParams& params, double E) {
    return static_cast<double>(params.M) * mean_gap(params, E) * std::abs(1.0 - rho_hat(E, params.kappa));
}

// ── concentration ───────────────────────────────────────────────────────

struct ConcentrationPoint {
    double tau = 0.0;
    double empirical = 0.0;
    double max_c = 0.0;  // largest c with empirical ≤ 2exp(−c·τ·min(τ/E', L))
};

struct ConcentrationReport {
    double mean = 0.0;
    double stddev = 0.0;
    double mean_slope = 0.0;
    double cutoff = 0.0;
    double calibrated_c = 0.0;
    std::vector<ConcentrationPoint> curve;

    double bound(double tau, double c) const {
        return 2.0 * std::exp(-c * tau * std::min(tau / mean_slope, cutoff));
    }
};

inline ConcentrationReport concentration_check(const std::vector<double>& values, const std::vector<double>& tau_grid,
                                               double mean_slope, double cutoff) {
    if (values.size() < 1000) throw InsufficientEnsembleError("concentration_check: need at least 1000 members");
    if (!(mean_slope > 0.0)) throw DomainError("concentration_check: mean slope must be positive");
    ConcentrationReport rep;
    rep.mean_slope = mean_slope;
    rep.cutoff = cutoff;
    CompensatedSum s, s2;
    for (double v : values) s.add(v);
    const double n = static_cast<double>(values.size());
    rep.mean = s.value() / n;
    for (double v : values) s2.add((v - rep.mean) * (v - rep.mean));
    rep.stddev = std::sqrt(s2.value() / (n - 1.0));
    rep.calibrated_c = std::numeric_limits<double>::infinity();
    for (double tau : tau_grid) {
        ConcentrationPoint cp;
        cp.tau = tau;
        std::size_t hits = static_cast<std::size_t>(
            std::count_if(values.begin(), values.end(), [&](double v) { return std::abs(v - rep.mean) >= tau; }));
        cp.empirical = hits / n;
        double rate = tau * std::min(tau / mean_slope, cutoff);
        if (cp.empirical >= 2.0)
            cp.max_c = 0.0;
        else if (cp.empirical == 0.0 || rate == 0.0)
            cp.max_c = std::numeric_limits<double>::infinity();
        else
            cp.max_c = std::max(0.0, -std::log(cp.empirical / 2.0) / rate);
        rep.calibrated_c = std::min(rep.calibrated_c, cp.max_c);
        rep.curve.push_back(cp);
    }
    return rep;
}

// ── summaries ───────────────────────────────────────────────────────────

inline double median(std::vector<double> v) { return detail::median(std::move(v)); }

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw EmptyInputError("mean: empty input");
    CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value() / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw EmptyInputError("variance: need two values");
    double m = mean(v);
    CompensatedSum s;
    for (double x : v) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(v.size() - 1);
}

}  // namespace resdeloc
