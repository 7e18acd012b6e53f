#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "compensated.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace resdeloc {

struct SecularValue {
    double f = 0.0;   // F_M(E)
    double df = 0.0;  // F_M'(E)
};

enum class SecularMethod { Direct, Tree };

struct SolverOptions {
    double tol = 1e-12;
    SecularMethod method = SecularMethod::Direct;
    // Newton polishing starts once the bracket is this many times the
    // final tolerance; infinity means safeguarded Newton from the start.
    double newton_switch = 1e3;
};

struct SpectrumResult {
    std::vector<double> eigenvalues;
    std::vector<std::size_t> pole_index;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    std::size_t size() const { return eigenvalues.size(); }
    bool covers(double a, double b) const { return lower <= a && b <= upper; }
};

struct EigenfunctionValues {
    double energy = 0.0;
    double normalization_constant = 1.0;
    std::vector<double> values;  // indexed by original site
};

// ── evaluation ──────────────────────────────────────────────────────────

// Sums 1/(p − E) and 1/(p − E)² over the sorted poles in descending
// |p − E| order with compensation. Order is a two-pointer merge from both ends.
inline SecularValue ordered_pole_sums(const std::vector<double>& poles, double E) {
    CompensatedSum f, df;
    std::size_t split = static_cast<std::size_t>(std::upper_bound(poles.begin(), poles.end(), E) - poles.begin());
    std::size_t l = 0, r = poles.size();
    auto take = [&](double p) {
        double d = p - E;
        if (d == 0.0) throw PoleError("secular: energy coincides with a pole");
        double inv = 1.0 / d;
        f.add(inv);
        df.add(inv * inv);
    };
    while (l < split && r > split) {
        if (E - poles[l] >= poles[r - 1] - E)
            take(poles[l++]);
        else
            take(poles[--r]);
    }
    while (l < split) take(poles[l++]);
    while (r > split) take(poles[--r]);
    return {f.value(), df.value()};
}

inline SecularValue secular_pair(const PotentialSample& sample, double E) {
    SecularValue v = ordered_pole_sums(sample.sorted_scaled, E);
    double m = static_cast<double>(sample.size());
    return {v.f / m, v.df / m};
}

inline double secular_value(const PotentialSample& sample, double E) { return secular_pair(sample, E).f; }

inline double secular_derivative(const PotentialSample& sample, double E) { return secular_pair(sample, E).df; }

// ── root solving ────────────────────────────────────────────────────────

namespace detail {

inline double root_target(double tol, double scale, double a, double b) {
    double mag = std::max(std::abs(a), std::abs(b));
    double ulp = std::nextafter(mag, std::numeric_limits<double>::infinity()) - mag;
    return std::max(tol * scale, 4.0 * ulp);
}

// Root of F = level inside (a, b) with F(a) < level < F(b), F increasing.
template <class Eval>
double polish_root(Eval& eval, double a, double b, double target, double newton_switch = 1e3,
                   double level = 1.0) {
    const double coarse = newton_switch * target;
    for (int it = 0; b - a > coarse; ++it) {
        double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) return mid;
        double g = eval(mid).f - level;
        if (g == 0.0) return mid;
        (g < 0.0 ? a : b) = mid;
        if (it > 4000) throw ConvergenceError("secular: bisection did not converge");
    }
    double x = 0.5 * (a + b);
    double last_step = b - a;
    for (int it = 0; it < 100; ++it) {
        SecularValue v = eval(x);
        double g = v.f - level;
        if (g == 0.0) return x;
        (g < 0.0 ? a : b) = x;
        if (b - a <= 2.0 * target) return 0.5 * (a + b);
        double next = x - g / v.df;
        // A step below the tolerance is stretched to it so that the next
        // evaluation lands on the far side of the root and closes the bracket.
        if (std::abs(next - x) < target) next = x + std::copysign(target, next - x);
        // Bisection on overshoot or when Newton is not at least halving the step.
        if (!(next > a && next < b) || 2.0 * std::abs(next - x) > last_step) next = 0.5 * (a + b);
        last_step = std::abs(next - x);
        x = next;
    }
    // Newton stalled in evaluation noise; bisection always terminates.
    for (int it = 0; b - a > 2.0 * target; ++it) {
        double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        double g = eval(mid).f - level;
        if (g == 0.0) return mid;
        (g < 0.0 ? a : b) = mid;
        if (it > 4000) throw ConvergenceError("secular: fallback bisection did not converge");
    }
    return 0.5 * (a + b);
}

inline double pole_offset(double p) { return std::ldexp(std::max(1.0, std::abs(p)), -40); }

// Root in the open gap (lo, hi) between adjacent poles.
template <class Eval>
double solve_between(Eval& eval, double lo, double hi, double tol, double newton_switch) {
    if (!(hi > lo)) throw DegenerateSampleError("secular: coincident poles");
    double width = hi - lo;
    double eps_lo = std::min(pole_offset(lo), 0.25 * width);
    double eps_hi = std::min(pole_offset(hi), 0.25 * width);
    double a = lo + eps_lo;
    double b = hi - eps_hi;
    // The root can sit closer to a pole than the default offset.
    while (eval(a).f >= 1.0) {
        b = a;
        eps_lo *= 0x1p-20;
        double na = lo + eps_lo;
        if (na <= lo) return a;
        a = na;
    }
    while (eval(b).f <= 1.0) {
        a = b;
        eps_hi *= 0x1p-20;
        double nb = hi - eps_hi;
        if (nb >= hi) return b;
        b = nb;
    }
    return polish_root(eval, a, b, root_target(tol, width, a, b), newton_switch);
}

template <class Eval>
double solve_below(Eval& eval, double p0, double lambda, double tol, double newton_switch) {
    double b = p0 - pole_offset(p0);
    while (eval(b).f <= 1.0) {
        double nb = p0 - (p0 - b) * 0x1p-20;
        if (nb >= p0) return b;
        b = nb;
    }
    double offset = 2.0 * (1.0 + std::abs(lambda));
    double a = p0 - offset;
    for (int it = 0; eval(a).f >= 1.0; ++it) {
        b = a;
        offset *= 2.0;
        a = p0 - offset;
        if (it > 200) throw ConvergenceError("secular: ground-state bracket expansion failed");
    }
    return polish_root(eval, a, b, root_target(tol, std::max(1.0, std::abs(b)), a, b), newton_switch);
}

}  // namespace detail

// Eigenvalue in gap k: k = 0 is below the smallest pole, otherwise (p[k−1], p[k]).
template <class Eval>
double solve_gap_with(const PotentialSample& sample, std::size_t k, const SolverOptions& opts, Eval& eval) {
    const auto& p = sample.sorted_scaled;
    if (k == 0) return detail::solve_below(eval, p[0], sample.params.lambda, opts.tol, opts.newton_switch);
    return detail::solve_between(eval, p[k - 1], p[k], opts.tol, opts.newton_switch);
}

inline double solve_gap(const PotentialSample& sample, std::size_t k, const SolverOptions& opts = {}) {
    auto eval = [&](double E) { return secular_pair(sample, E); };
    return solve_gap_with(sample, k, opts, eval);
}

inline double ground_state_energy(const PotentialSample& sample, double tol = 1e-12) {
    if (!(tol > 0.0)) throw DomainError("ground_state_energy: tol must be positive");
    return solve_gap(sample, 0, SolverOptions{tol});
}

inline SpectrumResult solve_spectrum_full_tree(const PotentialSample& sample, const SolverOptions& opts);

inline SpectrumResult solve_spectrum_full(const PotentialSample& sample, const SolverOptions& opts = {}) {
    if (!(opts.tol > 0.0)) throw DomainError("solve_spectrum_full: tol must be positive");
    if (sample.degenerate()) throw DegenerateSampleError("solve_spectrum_full: degenerate sample");
    if (opts.method == SecularMethod::Tree) return solve_spectrum_full_tree(sample, opts);
    SpectrumResult out;
    const std::size_t M = sample.size();
    out.eigenvalues.resize(M);
    out.pole_index.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        out.eigenvalues[k] = solve_gap(sample, k, opts);
        out.pole_index[k] = k;
    }
    return out;
}

inline SpectrumResult solve_spectrum_window(const PotentialSample& sample, double a, double b,
                                            const SolverOptions& opts = {}) {
    if (!(a < b)) throw DomainError("solve_spectrum_window: need a < b");
    if (!(opts.tol > 0.0)) throw DomainError("solve_spectrum_window: tol must be positive");
    const auto& p = sample.sorted_scaled;
    const std::size_t M = p.size();
    SpectrumResult out;
    out.lower = a;
    out.upper = b;
    // Gaps k in [k_lo, k_hi] intersect [a, b]; gap k spans (p[k−1], p[k]).
    std::size_t k_lo = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), a) - p.begin());
    std::size_t k_hi = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), b) - p.begin());
    if (k_hi > M - 1) k_hi = M - 1;
    for (std::size_t k = k_lo; k <= k_hi && k < M; ++k) {
        if (k > 0 && !(p[k] > p[k - 1])) throw DegenerateSampleError("solve_spectrum_window: coincident poles");
        bool a_inside = (k == 0 || p[k - 1] < a) && a < p[k];
        bool b_inside = (k == 0 || p[k - 1] < b) && b < p[k];
        if (a_inside && secular_value(sample, a) > 1.0) continue;
        if (b_inside && secular_value(sample, b) < 1.0) continue;
        double E = solve_gap(sample, k, opts);
        if (E >= a && E <= b) {
            out.eigenvalues.push_back(E);
            out.pole_index.push_back(k);
        }
    }
    return out;
}

// ψ(x) = C/(κV(x) − E) over original site indices.
inline EigenfunctionValues eigenfunction(const PotentialSample& sample, double E, double C) {
    EigenfunctionValues out;
    out.energy = E;
    out.normalization_constant = C;
    out.values.resize(sample.size());
    for (std::size_t x = 0; x < sample.size(); ++x) {
        double d = sample.kappa() * sample.raw_values[x] - E;
        if (d == 0.0) throw PoleError("eigenfunction: energy coincides with a pole");
        out.values[x] = C / d;
    }
    return out;
}

// (Hψ)(x) = −(1/M)Σψ + κV(x)ψ(x), applied without forming the matrix.
inline std::vector<double> apply_hamiltonian(const PotentialSample& sample, const std::vector<double>& psi) {
    CompensatedSum total;
    for (double v : psi) total.add(v);
    double mean = total.value() / static_cast<double>(psi.size());
    std::vector<double> out(psi.size());
    for (std::size_t x = 0; x < psi.size(); ++x) out[x] = -mean + sample.kappa() * sample.raw_values[x] * psi[x];
    return out;
}

}  // namespace resdeloc

#include "secular_tree.hpp"
