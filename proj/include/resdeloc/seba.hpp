#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "secular.hpp"

namespace resdeloc {

inline constexpr double kDefaultSebaTruncation = 1e4;

struct PoissonConfiguration {
    double truncation = std::numeric_limits<double>::infinity();
    std::vector<double> points;  // strictly increasing, |v| ≤ truncation
    std::size_t first_positive = 0;

    // Label of point i: ω_0 is the largest point ≤ 0, ω_1 the smallest > 0.
    long long label(std::size_t i) const { return static_cast<long long>(i) - static_cast<long long>(first_positive) + 1; }

    static PoissonConfiguration from_points(std::vector<double> pts,
                                            double truncation = std::numeric_limits<double>::infinity()) {
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (!(pts[i] > pts[i - 1])) throw DegenerateSampleError("PoissonConfiguration: repeated point");
        PoissonConfiguration c;
        c.truncation = truncation;
        c.points = std::move(pts);
        c.first_positive = static_cast<std::size_t>(std::upper_bound(c.points.begin(), c.points.end(), 0.0) - c.points.begin());
        return c;
    }

    PoissonConfiguration shifted(double b) const {
        PoissonConfiguration c = *this;
        for (auto& v : c.points) v += b;
        c.first_positive = static_cast<std::size_t>(std::upper_bound(c.points.begin(), c.points.end(), 0.0) - c.points.begin());
        return c;
    }
};

// Intensity-one Poisson configuration on [−L, L]: N ~ Poisson(2L) uniform points.
inline PoissonConfiguration sample_poisson(double L, std::uint64_t seed, std::uint64_t index = 0) {
    if (!(L > 0.0)) throw DomainError("sample_poisson: L must be positive");
    for (std::uint64_t attempt = 0;; ++attempt) {
        Engine eng = make_engine(seed, index, attempt);
        std::poisson_distribution<long long> count(2.0 * L);
        std::uniform_real_distribution<double> uni(-L, L);
        std::vector<double> pts(static_cast<std::size_t>(count(eng)));
        for (auto& v : pts) v = uni(eng);
        std::sort(pts.begin(), pts.end());
        if (std::adjacent_find(pts.begin(), pts.end()) == pts.end())
            return PoissonConfiguration::from_points(std::move(pts), L);
        if (attempt > 64) throw DegenerateSampleError("sample_poisson: repeated ties");
    }
}

namespace detail {

// Visits points in order of increasing |v|, alternating sides outward from 0.
template <class F>
void outward_from_zero(const PoissonConfiguration& c, F&& f) {
    std::size_t neg = c.first_positive, pos = c.first_positive;
    const std::size_t n = c.points.size();
    while (neg > 0 || pos < n) {
        if (pos >= n || (neg > 0 && -c.points[neg - 1] <= c.points[pos]))
            f(c.points[--neg]);
        else
            f(c.points[pos++]);
    }
}

}  // namespace detail

// Σ 1/(v − x) in symmetric order outward from 0.
inline double stieltjes(const PoissonConfiguration& c, double x) {
    CompensatedSum s;
    detail::outward_from_zero(c, [&](double v) {
        if (v == x) throw PoleError("stieltjes: x coincides with a point");
        s.add(1.0 / (v - x));
    });
    return s.value();
}

inline double stieltjes_derivative(const PoissonConfiguration& c, double x) {
    CompensatedSum s;
    detail::outward_from_zero(c, [&](double v) {
        if (v == x) throw PoleError("stieltjes_derivative: x coincides with a point");
        double inv = 1.0 / (v - x);
        s.add(inv * inv);
    });
    return s.value();
}

// Evaluates S and S' for |x| ≤ W: points within the near radius directly,
// the rest through a Taylor expansion of Σ 1/(v − x) about 0.
class SebaEvaluator {
public:
    SebaEvaluator(const PoissonConfiguration& c, double W)
        : half_width_(W), near_radius_(std::max(4.0 * W, W + 20.0)) {
        const auto& p = c.points;
        near_lo_ = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), -near_radius_) - p.begin());
        near_hi_ = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), near_radius_) - p.begin());
        near_.assign(p.begin() + static_cast<std::ptrdiff_t>(near_lo_), p.begin() + static_cast<std::ptrdiff_t>(near_hi_));
        // |x/v| ≤ 1/4 on the far set, so 28 terms reach double precision.
        // Only the two leading coefficients are large enough to need compensation.
        CompensatedSum c0, c1;
        detail::outward_from_zero(c, [&](double v) {
            if (std::abs(v) <= near_radius_) return;
            double inv = 1.0 / v, pw = inv * inv;
            c0.add(inv);
            c1.add(pw);
            for (std::size_t s = 2; s < kTerms; ++s) {
                pw *= inv;
                far_[s] += pw;
            }
        });
        far_[0] = c0.value();
        far_[1] = c1.value();
    }

    double half_width() const { return half_width_; }

    double near_radius() const { return near_radius_; }

    SecularValue operator()(double x) const {
        double f = 0.0, df = 0.0;
        for (double v : near_) {
            double inv = 1.0 / (v - x);
            f += inv;
            df += inv * inv;
        }
        double val = 0.0, der = 0.0;
        for (std::size_t s = kTerms - 1; s >= 1; --s) {
            val = val * x + far_[s];
            der = der * x + static_cast<double>(s) * far_[s];
        }
        val = val * x + far_[0];
        return {f + val, df + der};
    }

private:
    static constexpr std::size_t kTerms = 28;
    double half_width_;
    double near_radius_;
    std::size_t near_lo_ = 0, near_hi_ = 0;
    std::vector<double> near_;
    double far_[kTerms] = {};
};

struct SebaRoot {
    long long label = 0;  // label of the right gap endpoint, as in ω_{n−1} < u_n < ω_n
    double u = 0.0;
    double left = 0.0, right = 0.0;  // gap endpoints
    double dist = 0.0;               // dist(u, ω)
    double ell_inf = 0.0;            // 1/dist
    double ell2_sq = 0.0;            // S'(u)
    std::vector<double> ell1_partial;
};

struct SebaOptions {
    double tol = 1e-12;
    std::vector<double> ell1_windows;  // nested W' for partial ℓ¹ norms
};

struct SebaSolution {
    double alpha = 0.0;
    double half_width = 0.0;
    std::vector<double> ell1_windows;
    std::vector<SebaRoot> roots;
};

// Roots of S(u) = −α, one per gap overlapping [−W, W]. The evaluator may be
// shared across levels; it must have been built for this configuration and
// a half-width of at least W.
inline SebaSolution solve_seba(const PoissonConfiguration& c, const SebaEvaluator& eval, double alpha, double W,
                               const SebaOptions& opts = {}) {
    if (!(W > 0.0)) throw DomainError("solve_seba: W must be positive");
    if (!(W <= c.truncation / 10.0)) throw DomainError("solve_seba: W must not exceed truncation/10");
    if (W > eval.half_width()) throw DomainError("solve_seba: evaluator built for a narrower window");
    SebaSolution out;
    out.alpha = alpha;
    out.half_width = W;
    out.ell1_windows = opts.ell1_windows;
    const auto& p = c.points;
    if (p.size() < 2) return out;
    std::size_t first = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), -W) - p.begin());
    std::size_t last = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), W) - p.begin());
    first = std::max<std::size_t>(first, 1);
    last = std::min(last, p.size() - 1);
    const double level = -alpha;
    for (std::size_t k = first; k <= last; ++k) {
        double lo = p[k - 1], hi = p[k];
        double width = hi - lo;
        double eps_lo = std::min(detail::pole_offset(lo), 0.25 * width);
        double eps_hi = std::min(detail::pole_offset(hi), 0.25 * width);
        double a = lo + eps_lo, b = hi - eps_hi;
        double u;
        if (eval(a).f >= level) {
            u = a;
        } else if (eval(b).f <= level) {
            u = b;
        } else {
            u = detail::polish_root(eval, a, b, detail::root_target(opts.tol, 1.0, a, b), 1e3, level);
        }
        SebaRoot r;
        r.label = c.label(k);
        r.u = u;
        r.left = lo;
        r.right = hi;
        r.dist = std::min(u - lo, hi - u);
        r.ell_inf = 1.0 / r.dist;
        r.ell2_sq = eval(u).df;
        for (double Wp : opts.ell1_windows) {
            CompensatedSum s;
            auto b0 = std::lower_bound(p.begin(), p.end(), -Wp);
            auto b1 = std::upper_bound(p.begin(), p.end(), Wp);
            for (auto it = b0; it != b1; ++it) s.add(1.0 / std::abs(*it - u));
            r.ell1_partial.push_back(s.value());
        }
        out.roots.push_back(std::move(r));
    }
    return out;
}

inline SebaSolution solve_seba(const PoissonConfiguration& c, double alpha, double W, const SebaOptions& opts = {}) {
    if (!(W > 0.0)) throw DomainError("solve_seba: W must be positive");
    return solve_seba(c, SebaEvaluator(c, W), alpha, W, opts);
}

struct GapExtremes {
    double delta_minus = 0.0;
    double delta_plus = 0.0;
};

// Smallest and largest consecutive gap among points inside [−W, W].
inline GapExtremes gap_extremes(const std::vector<double>& points, double W) {
    std::vector<double> in;
    for (double v : points)
        if (std::abs(v) <= W) in.push_back(v);
    std::sort(in.begin(), in.end());
    if (in.size() < 2) throw InsufficientEnsembleError("gap_extremes: need at least two points in the window");
    GapExtremes g{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 1; i < in.size(); ++i) {
        double d = in[i] - in[i - 1];
        g.delta_minus = std::min(g.delta_minus, d);
        g.delta_plus = std::max(g.delta_plus, d);
    }
    return g;
}

// ── localization bounds ─────────────────────────────────────────────────

struct BoundPoint {
    double t = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double slack = 0.0;  // two binomial standard deviations at the bound
    bool pass = true;
};

struct LocalizationBoundReport {
    double alpha = 0.0;
    double half_width = 0.0;
    std::size_t members = 0;
    std::vector<BoundPoint> max_distance;  // P(max dist(u, ω ∪ {±W}) ≥ t·2W/max(|α|,1)) vs 1/t
    std::vector<BoundPoint> min_distance;  // P(min dist(u, ω) ≤ 1/t) vs 2W/(t − |α|)
    bool pass() const {
        for (const auto& b : max_distance)
            if (!b.pass) return false;
        for (const auto& b : min_distance)
            if (!b.pass) return false;
        return true;
    }
};

inline BoundPoint binomial_bound_point(double t, std::size_t hits, std::size_t n, double bound) {
    BoundPoint bp;
    bp.t = t;
    bp.empirical = static_cast<double>(hits) / static_cast<double>(n);
    bp.bound = bound;
    double b = std::clamp(bound, 0.0, 1.0);
    bp.slack = 2.0 * std::sqrt(b * (1.0 - b) / static_cast<double>(n));
    bp.pass = bp.empirical <= bound + bp.slack;
    return bp;
}

inline LocalizationBoundReport localization_bound_check(const std::vector<SebaSolution>& ensemble, double alpha,
                                                        double W, const std::vector<double>& t_max_distance,
                                                        const std::vector<double>& t_min_distance) {
    if (ensemble.size() < 1000) throw InsufficientEnsembleError("localization_bound_check: need at least 1000 members");
    LocalizationBoundReport rep;
    rep.alpha = alpha;
    rep.half_width = W;
    rep.members = ensemble.size();
    std::vector<double> max_d, min_d;
    for (const auto& sol : ensemble) {
        double mx = 0.0, mn = std::numeric_limits<double>::infinity();
        for (const auto& r : sol.roots) {
            if (std::abs(r.u) > W) continue;
            mx = std::max(mx, std::min({r.dist, r.u + W, W - r.u}));
            mn = std::min(mn, r.dist);
        }
        max_d.push_back(mx);
        min_d.push_back(mn);
    }
    const std::size_t n = ensemble.size();
    for (double t : t_max_distance) {
        double level = t * 2.0 * W / std::max(std::abs(alpha), 1.0);
        std::size_t hits = static_cast<std::size_t>(std::count_if(max_d.begin(), max_d.end(), [&](double d) { return d >= level; }));
        rep.max_distance.push_back(binomial_bound_point(t, hits, n, 1.0 / t));
    }
    for (double t : t_min_distance) {
        if (!(t > std::abs(alpha))) throw DomainError("localization_bound_check: need t > |alpha|");
        std::size_t hits = static_cast<std::size_t>(std::count_if(min_d.begin(), min_d.end(), [&](double d) { return d <= 1.0 / t; }));
        rep.min_distance.push_back(binomial_bound_point(t, hits, n, 2.0 * W / (t - std::abs(alpha))));
    }
    return rep;
}

}  // namespace resdeloc
