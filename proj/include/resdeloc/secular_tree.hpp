#pragma once

// Tree-accelerated evaluation of F_M for full-spectrum solves at large M.
// Poles are grouped by rank into a binary tree; far interactions use
// one-dimensional multipole and local expansions of 1/(p − E), near ones
// are summed directly. Expansions are normalized by node radius so that
// every coefficient stays O(1).

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "secular.hpp"

namespace resdeloc {

class TreeSecular {
public:
    explicit TreeSecular(const std::vector<double>& poles, int order = 32, std::size_t leaf_size = 16,
                         double separation = 0.5)
        : poles_(poles), order_(order), leaf_size_(leaf_size), separation_(separation) {
        if (poles_.size() < 2) throw SizeError("TreeSecular: need at least two poles");
        binom_.assign(static_cast<std::size_t>(2 * order_ + 1), std::vector<double>{});
        for (int n = 0; n <= 2 * order_; ++n) {
            binom_[n].assign(static_cast<std::size_t>(n + 1), 1.0);
            for (int k = 1; k < n; ++k) binom_[n][k] = binom_[n - 1][k - 1] + binom_[n - 1][k];
        }
        leaf_of_rank_.assign(poles_.size(), 0);
        build(0, poles_.size(), -1);
        const std::size_t stride = static_cast<std::size_t>(order_ + 1);
        mom_.assign(nodes_.size() * stride, 0.0);
        loc_.assign(nodes_.size() * stride, 0.0);
        near_.assign(nodes_.size(), {});
        upward(0);
        interact(0, 0);
        downward(0);
    }

    std::size_t size() const { return poles_.size(); }

    // F and F' at E for gap k (1 ≤ k ≤ M−1); E must lie in [p[k−1], p[k]].
    SecularValue evaluate(std::size_t gap, double E) const {
        const Node& leaf = nodes_[static_cast<std::size_t>(leaf_of_rank_[gap - 1])];
        double f = 0.0, df = 0.0;
        for (auto [lo, hi] : near_[static_cast<std::size_t>(&leaf - nodes_.data())]) {
            for (std::size_t j = lo; j < hi; ++j) {
                double inv = 1.0 / (poles_[j] - E);
                f += inv;
                df += inv * inv;
            }
        }
        const double* b = &loc_[static_cast<std::size_t>(&leaf - nodes_.data()) * (order_ + 1)];
        double x = (E - leaf.tc) / leaf.ts;
        double val = 0.0, der = 0.0;
        for (int s = order_; s >= 1; --s) {
            val = val * x + b[s];
            der = der * x + s * b[s];
        }
        val = val * x + b[0];
        f += val;
        df += der / leaf.ts;
        double m = static_cast<double>(poles_.size());
        return {f / m, df / m};
    }

private:
    struct Node {
        std::size_t lo, hi;
        double sc, sr;  // source center and radius
        double tc, tr;  // target center and radius
        double ts;      // target normalization scale
        int left = -1, right = -1;
        bool leaf() const { return left < 0; }
    };

    int build(std::size_t lo, std::size_t hi, int parent) {
        (void)parent;
        Node n{};
        n.lo = lo;
        n.hi = hi;
        n.sc = 0.5 * (poles_[lo] + poles_[hi - 1]);
        n.sr = 0.5 * (poles_[hi - 1] - poles_[lo]);
        double top = poles_[std::min(hi, poles_.size() - 1)];
        n.tc = 0.5 * (poles_[lo] + top);
        n.tr = 0.5 * (top - poles_[lo]);
        n.ts = n.tr > 0.0 ? n.tr : 1.0;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(n);
        if (hi - lo > leaf_size_) {
            std::size_t mid = lo + (hi - lo) / 2;
            int l = build(lo, mid, id);
            int r = build(mid, hi, id);
            nodes_[static_cast<std::size_t>(id)].left = l;
            nodes_[static_cast<std::size_t>(id)].right = r;
        } else {
            for (std::size_t k = lo; k < hi; ++k) leaf_of_rank_[k] = id;
        }
        return id;
    }

    double* moments(int id) { return &mom_[static_cast<std::size_t>(id) * (order_ + 1)]; }
    double* locals(int id) { return &loc_[static_cast<std::size_t>(id) * (order_ + 1)]; }

    void upward(int id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        double* m = moments(id);
        if (n.leaf()) {
            if (n.sr == 0.0) {
                m[0] = static_cast<double>(n.hi - n.lo);
                return;
            }
            for (std::size_t k = n.lo; k < n.hi; ++k) {
                double y = (poles_[k] - n.sc) / n.sr;
                double pw = 1.0;
                for (int r = 0; r <= order_; ++r) {
                    m[r] += pw;
                    pw *= y;
                }
            }
            return;
        }
        for (int c : {n.left, n.right}) {
            upward(c);
            shift_moments(c, id);
        }
    }

    // Child moments re-centered on the parent.
    void shift_moments(int child, int parent) {
        const Node& c = nodes_[static_cast<std::size_t>(child)];
        const Node& p = nodes_[static_cast<std::size_t>(parent)];
        const double* mc = moments(child);
        double* mp = moments(parent);
        if (p.sr == 0.0) {
            mp[0] += mc[0];
            return;
        }
        std::vector<double> dpow(order_ + 1), rpow(order_ + 1);
        double d = (c.sc - p.sc) / p.sr, q = c.sr / p.sr;
        dpow[0] = rpow[0] = 1.0;
        for (int i = 1; i <= order_; ++i) {
            dpow[i] = dpow[i - 1] * d;
            rpow[i] = rpow[i - 1] * q;
        }
        for (int r = 0; r <= order_; ++r) {
            double acc = 0.0;
            for (int j = 0; j <= r; ++j) acc += binom_[r][j] * rpow[j] * dpow[r - j] * mc[j];
            mp[r] += acc;
        }
    }

    bool separated(const Node& t, const Node& s) const {
        return (t.tr + s.sr) <= separation_ * std::abs(s.sc - t.tc);
    }

    void interact(int t, int s) {
        const Node& tn = nodes_[static_cast<std::size_t>(t)];
        const Node& sn = nodes_[static_cast<std::size_t>(s)];
        if (separated(tn, sn)) {
            multipole_to_local(s, t);
            return;
        }
        if (tn.leaf() && sn.leaf()) {
            auto& list = near_[static_cast<std::size_t>(t)];
            if (!list.empty() && list.back().second == sn.lo)
                list.back().second = sn.hi;
            else
                list.emplace_back(sn.lo, sn.hi);
            return;
        }
        if (sn.leaf() || (!tn.leaf() && tn.tr >= sn.sr)) {
            interact(tn.left, s);
            interact(tn.right, s);
        } else {
            interact(t, sn.left);
            interact(t, sn.right);
        }
    }

    void multipole_to_local(int s, int t) {
        const Node& sn = nodes_[static_cast<std::size_t>(s)];
        const Node& tn = nodes_[static_cast<std::size_t>(t)];
        const double* m = moments(s);
        double* b = locals(t);
        double D = sn.sc - tn.tc;
        double qt = tn.ts / D, qs = -sn.sr / D;
        std::vector<double> sp(order_ + 1), weighted(order_ + 1);
        double pw = 1.0;
        for (int r = 0; r <= order_; ++r) {
            weighted[r] = pw * m[r];
            pw *= qs;
        }
        pw = 1.0 / D;
        for (int s_ = 0; s_ <= order_; ++s_) {
            double acc = 0.0;
            for (int r = 0; r <= order_; ++r) acc += binom_[s_ + r][s_] * weighted[r];
            b[s_] += pw * acc;
            pw *= qt;
        }
    }

    // Parent local expansion re-centered on each child.
    void downward(int id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.leaf()) return;
        const double* bp = locals(id);
        for (int c : {n.left, n.right}) {
            const Node& cn = nodes_[static_cast<std::size_t>(c)];
            double* bc = locals(c);
            double d = (cn.tc - n.tc) / n.ts, q = cn.ts / n.ts;
            std::vector<double> dpow(order_ + 1);
            dpow[0] = 1.0;
            for (int i = 1; i <= order_; ++i) dpow[i] = dpow[i - 1] * d;
            double qj = 1.0;
            for (int j = 0; j <= order_; ++j) {
                double acc = 0.0;
                for (int s = j; s <= order_; ++s) acc += binom_[s][j] * dpow[s - j] * bp[s];
                bc[j] += qj * acc;
                qj *= q;
            }
            downward(c);
        }
    }

    const std::vector<double>& poles_;
    int order_;
    std::size_t leaf_size_;
    double separation_;
    std::vector<Node> nodes_;
    std::vector<int> leaf_of_rank_;
    std::vector<double> mom_, loc_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> near_;
    std::vector<std::vector<double>> binom_;
};

inline SpectrumResult solve_spectrum_full_tree(const PotentialSample& sample, const SolverOptions& opts) {
    const std::size_t M = sample.size();
    SpectrumResult out;
    out.eigenvalues.resize(M);
    out.pole_index.resize(M);
    out.eigenvalues[0] = solve_gap(sample, 0, opts);
    out.pole_index[0] = 0;
    if (M < 2) return out;
    TreeSecular tree(sample.sorted_scaled);
    for (std::size_t k = 1; k < M; ++k) {
        auto eval = [&](double E) { return tree.evaluate(k, E); };
        out.eigenvalues[k] = solve_gap_with(sample, k, opts, eval);
        out.pole_index[k] = k;
    }
    return out;
}

}  // namespace resdeloc
