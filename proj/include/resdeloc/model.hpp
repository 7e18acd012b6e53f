#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace resdeloc {

inline double compute_kappa(double lambda, long long M) {
    if (M < 2) throw DomainError("compute_kappa: M must be at least 2");
    if (!(lambda > 0.0)) throw DomainError("compute_kappa: lambda must be positive");
    return lambda / std::sqrt(2.0 * std::log(static_cast<double>(M)));
}

struct ModelParams {
    std::size_t M = 2;
    double lambda = 1.0;
    double kappa = compute_kappa(1.0, 2);
    std::uint64_t seed = kDefaultSeed;

    static ModelParams make(std::size_t M, double lambda, std::uint64_t seed = kDefaultSeed) {
        return ModelParams{M, lambda, compute_kappa(lambda, static_cast<long long>(M)), seed};
    }
};

// Rescaled Gaussian level the top potential value is compared with in the
// extreme-value law P(max V ≤ a_M + u/b_M) → exp(−e^{−u}).
inline double gumbel_rescale(double max_v, std::size_t M) {
    double b = std::sqrt(2.0 * std::log(static_cast<double>(M)));
    double a = b - std::log(4.0 * std::acos(-1.0) * std::log(static_cast<double>(M))) / (2.0 * b);
    return (max_v - a) * b;
}

inline double gumbel_cdf(double u) { return std::exp(-std::exp(-u)); }

class PotentialSample {
public:
    ModelParams params;
    std::vector<double> raw_values;
    std::vector<double> sorted_scaled;
    std::vector<std::size_t> sort_permutation;  // rank -> site
    std::uint64_t sample_index = 0;
    std::uint64_t attempt = 0;
    bool synthetic = false;

    std::size_t size() const { return sorted_scaled.size(); }
    double kappa() const { return params.kappa; }
    double min_pole() const { return sorted_scaled.front(); }
    double max_pole() const { return sorted_scaled.back(); }

    bool degenerate() const {
        for (std::size_t k = 1; k < sorted_scaled.size(); ++k)
            if (!(sorted_scaled[k] > sorted_scaled[k - 1])) return true;
        return false;
    }

    // Site index -> rank.
    std::vector<std::size_t> inverse_permutation() const {
        std::vector<std::size_t> inv(sort_permutation.size());
        for (std::size_t k = 0; k < sort_permutation.size(); ++k) inv[sort_permutation[k]] = k;
        return inv;
    }

    // Builds a sample from explicit potential values. Ties are allowed here;
    // callers that need a non-degenerate sample check degenerate().
    static PotentialSample from_values(const ModelParams& params, std::vector<double> values) {
        if (values.empty()) throw EmptyInputError("PotentialSample: no values");
        PotentialSample s;
        s.params = params;
        s.params.M = values.size();
        s.raw_values = std::move(values);
        s.fill_sorted();
        return s;
    }

    // Sample whose scaled potential κV is given directly (κ set to 1).
    // Allowed for any size including M = 1.
    static PotentialSample from_scaled(std::vector<double> scaled, double lambda = 1.0) {
        if (scaled.empty()) throw EmptyInputError("PotentialSample: no values");
        PotentialSample s;
        s.params = ModelParams{scaled.size(), lambda, 1.0, 0};
        s.raw_values = std::move(scaled);
        s.synthetic = true;
        s.fill_sorted();
        return s;
    }

private:
    void fill_sorted() {
        const std::size_t M = raw_values.size();
        sort_permutation.resize(M);
        std::iota(sort_permutation.begin(), sort_permutation.end(), std::size_t{0});
        std::sort(sort_permutation.begin(), sort_permutation.end(),
                  [&](std::size_t a, std::size_t b) {
                      return raw_values[a] < raw_values[b] || (raw_values[a] == raw_values[b] && a < b);
                  });
        sorted_scaled.resize(M);
        for (std::size_t k = 0; k < M; ++k) sorted_scaled[k] = params.kappa * raw_values[sort_permutation[k]];
    }
};

// Draws sample number `sample_index` of the ensemble defined by params.seed.
// A tie after sorting rejects the draw and retries on the next attempt stream.
inline PotentialSample sample_potential(const ModelParams& params, std::uint64_t sample_index = 0) {
    if (params.M < 2) throw DomainError("sample_potential: M must be at least 2");
    for (std::uint64_t attempt = 0;; ++attempt) {
        Engine eng = make_engine(params.seed, sample_index, attempt);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> v(params.M);
        for (auto& x : v) x = gauss(eng);
        PotentialSample s = PotentialSample::from_values(params, std::move(v));
        s.sample_index = sample_index;
        s.attempt = attempt;
        if (!s.degenerate()) return s;
        if (attempt > 64) throw DegenerateSampleError("sample_potential: repeated ties");
    }
}

}  // namespace resdeloc
