#pragma once

#include "mvsck/common.hpp"
#include "mvsck/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

namespace mvsck {

/// counts(p, t): points in predicted cluster p and true class t. Labels are compacted to
/// 0..k-1 in increasing order of their original values.
struct ContingencyTable {
    std::vector<std::vector<Index>> counts; ///< k_pred x k_true
    std::vector<Index> pred_sizes;
    std::vector<Index> true_sizes;
    Index n = 0;

    int k_pred() const noexcept { return static_cast<int>(pred_sizes.size()); }
    int k_true() const noexcept { return static_cast<int>(true_sizes.size()); }
};

namespace detail {

inline std::vector<int> compact_labels(std::span<const int> labels, int& k) {
    std::map<int, int> ids;
    for (int l : labels) ids.emplace(l, 0);
    int next = 0;
    for (auto& [label, id] : ids) id = next++;
    k = next;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
    return out;
}

/// Minimum-cost perfect matching on a square matrix (Kuhn-Munkres with potentials).
/// Returns row -> column.
inline std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

inline double pair_f1(Index overlap, Index pred_size, Index true_size) {
    if (overlap == 0) return 0.0;
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(pred_size + true_size);
}

inline double comb2(Index x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

} // namespace detail

inline ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth) {
    require(pred.size() == truth.size(), "metrics: prediction has " + std::to_string(pred.size()) +
                                             " labels, truth has " + std::to_string(truth.size()));
    int kp = 0, kt = 0;
    const auto p = detail::compact_labels(pred, kp);
    const auto t = detail::compact_labels(truth, kt);
    ContingencyTable table;
    table.n = static_cast<Index>(pred.size());
    table.counts.assign(static_cast<std::size_t>(kp), std::vector<Index>(static_cast<std::size_t>(kt), 0));
    table.pred_sizes.assign(static_cast<std::size_t>(kp), 0);
    table.true_sizes.assign(static_cast<std::size_t>(kt), 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        ++table.counts[static_cast<std::size_t>(p[i])][static_cast<std::size_t>(t[i])];
        ++table.pred_sizes[static_cast<std::size_t>(p[i])];
        ++table.true_sizes[static_cast<std::size_t>(t[i])];
    }
    return table;
}

/// One-to-one cluster/class matching. Maximizes matched points; among those optima it
/// maximizes the summed per-pair F1.
struct ClusterMatching {
    std::vector<int> pred_to_true; ///< -1 for unmatched predicted clusters
    Index matched = 0;
    double f1_sum = 0.0;
};

inline ClusterMatching optimal_matching(const ContingencyTable& table) {
    const int kp = table.k_pred();
    const int kt = table.k_true();
    const int size = std::max(kp, kt);
    ClusterMatching out;
    out.pred_to_true.assign(static_cast<std::size_t>(kp), -1);
    if (size == 0) return out;
    // Lexicographic objective: counts are integers and the F1 term sums to < 1/2.
    const double eps = 1.0 / (2.0 * (size + 1));
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(size), std::vector<double>(static_cast<std::size_t>(size), 0.0));
    for (int a = 0; a < kp; ++a)
        for (int b = 0; b < kt; ++b) {
            const Index c = table.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            const double f1 = detail::pair_f1(c, table.pred_sizes[static_cast<std::size_t>(a)],
                                              table.true_sizes[static_cast<std::size_t>(b)]);
            cost[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = -(static_cast<double>(c) + eps * f1);
        }
    const auto assignment = detail::hungarian_min(cost);
    for (int a = 0; a < kp; ++a) {
        const int b = assignment[static_cast<std::size_t>(a)];
        if (b < 0 || b >= kt) continue;
        out.pred_to_true[static_cast<std::size_t>(a)] = b;
        const Index c = table.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        out.matched += c;
        out.f1_sum += detail::pair_f1(c, table.pred_sizes[static_cast<std::size_t>(a)],
                                      table.true_sizes[static_cast<std::size_t>(b)]);
    }
    return out;
}

inline double clustering_accuracy(std::span<const int> pred, std::span<const int> truth) {
    const auto table = contingency(pred, truth);
    if (table.n == 0) return 1.0;
    return static_cast<double>(optimal_matching(table).matched) / static_cast<double>(table.n);
}

/// Macro F1 after optimal matching, averaged over max(k_pred, k_true) labels: unmatched
/// classes and unmatched predicted clusters each count as F1 = 0.
inline double macro_f1(std::span<const int> pred, std::span<const int> truth) {
    const auto table = contingency(pred, truth);
    const int labels = std::max(table.k_pred(), table.k_true());
    if (labels == 0) return 1.0;
    return optimal_matching(table).f1_sum / static_cast<double>(labels);
}

enum class NmiNormalization { arithmetic, max };

inline double nmi(std::span<const int> pred, std::span<const int> truth,
                  NmiNormalization normalization = NmiNormalization::arithmetic) {
    const auto table = contingency(pred, truth);
    if (table.n == 0) return 1.0;
    const double n = static_cast<double>(table.n);
    auto entropy = [n](const std::vector<Index>& sizes) {
        double h = 0.0;
        for (Index s : sizes)
            if (s > 0) {
                const double q = static_cast<double>(s) / n;
                h -= q * std::log(q);
            }
        return h;
    };
    const double hp = entropy(table.pred_sizes);
    const double ht = entropy(table.true_sizes);
    double mi = 0.0;
    for (int a = 0; a < table.k_pred(); ++a)
        for (int b = 0; b < table.k_true(); ++b) {
            const Index c = table.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            if (c == 0) continue;
            const double joint = static_cast<double>(c) / n;
            mi += joint * std::log(static_cast<double>(c) * n /
                                   (static_cast<double>(table.pred_sizes[static_cast<std::size_t>(a)]) *
                                    static_cast<double>(table.true_sizes[static_cast<std::size_t>(b)])));
        }
    mi = std::max(mi, 0.0);
    const double denom = normalization == NmiNormalization::arithmetic ? 0.5 * (hp + ht) : std::max(hp, ht);
    if (denom <= 0.0) return 1.0; // both partitions are a single cluster
    return std::min(1.0, mi / denom);
}

struct AriResult {
    double value = 0.0;
    /// Truth has a single class, or the adjustment's denominator vanished.
    bool degenerate = false;
};

/// Adjusted Rand index under the permutation model. A single-class truth gives 0 with the
/// degenerate flag; otherwise a vanishing denominator only happens when both partitions are
/// all-singletons, which gives 1.
inline AriResult ari(std::span<const int> pred, std::span<const int> truth) {
    const auto table = contingency(pred, truth);
    AriResult out;
    if (table.k_true() <= 1) {
        out.degenerate = true;
        return out;
    }
    double index = 0.0;
    for (const auto& row : table.counts)
        for (Index c : row) index += detail::comb2(c);
    double sum_pred = 0.0, sum_true = 0.0;
    for (Index s : table.pred_sizes) sum_pred += detail::comb2(s);
    for (Index s : table.true_sizes) sum_true += detail::comb2(s);
    const double total = detail::comb2(table.n);
    const double expected = total > 0.0 ? sum_pred * sum_true / total : 0.0;
    const double max_index = 0.5 * (sum_pred + sum_true);
    const double denom = max_index - expected;
    if (denom == 0.0) {
        out.degenerate = true;
        out.value = 1.0;
        return out;
    }
    out.value = (index - expected) / denom;
    return out;
}

struct Evaluation {
    double ca = 0.0;
    double cf1 = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
};

inline Evaluation evaluate(std::span<const int> pred, std::span<const int> truth) {
    return {clustering_accuracy(pred, truth), macro_f1(pred, truth), nmi(pred, truth), ari(pred, truth).value};
}

} // namespace mvsck
