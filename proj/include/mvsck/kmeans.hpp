#pragma once

#include "mvsck/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace mvsck {

/// Hard assignment of n points to k clusters.
struct Partition {
    std::vector<int> labels;
    int k = 0;

    Index n() const noexcept { return static_cast<Index>(labels.size()); }

    friend bool operator==(const Partition&, const Partition&) = default;
};

struct KMeansOptions {
    int max_iter = 300;
    /// Stop when the summed squared centroid shift drops to tol * mean per-feature variance.
    double tol = 1e-6;
    const Deadline* deadline = nullptr;
};

struct KMeansResult {
    Partition partition;
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
    DenseMatrix centroids;
    /// Inertia after every assignment step, final assignment included.
    std::vector<double> inertia_history;
};

namespace detail {

inline double squared_distance(const double* a, const double* b, Index dim) {
    double s = 0.0;
    for (Index j = 0; j < dim; ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

/// Greedy k-means++: each new center is the best of 2 + floor(ln k) D^2-sampled candidates,
/// judged by the resulting potential.
inline DenseMatrix kmeans_plus_plus(const DenseMatrix& x, int k, std::mt19937_64& rng) {
    const Index n = x.rows();
    const Index dim = x.cols();
    DenseMatrix centers(k, dim);
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    std::uniform_int_distribution<Index> first(0, n - 1);
    Index pick = first(rng);
    chosen[static_cast<std::size_t>(pick)] = 1;
    centers.row(0) = x.row(pick);

    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = squared_distance(x.row(i).data(), centers.row(0).data(), dim);

    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
    std::vector<double> candidate_d2(static_cast<std::size_t>(n));
    std::vector<double> best_d2(static_cast<std::size_t>(n));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        pick = -1;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double best_potential = std::numeric_limits<double>::infinity();
            for (int t = 0; t < trials; ++t) {
                const double target = u(rng);
                double acc = 0.0;
                Index candidate = -1;
                for (Index i = 0; i < n; ++i) {
                    const double w = d2[static_cast<std::size_t>(i)];
                    if (w <= 0.0) continue;
                    acc += w;
                    candidate = i;
                    if (acc > target) break;
                }
                double potential = 0.0;
                for (Index i = 0; i < n; ++i) {
                    const double d = std::min(d2[static_cast<std::size_t>(i)],
                                              squared_distance(x.row(i).data(), x.row(candidate).data(), dim));
                    candidate_d2[static_cast<std::size_t>(i)] = d;
                    potential += d;
                }
                if (potential < best_potential) {
                    best_potential = potential;
                    pick = candidate;
                    best_d2.swap(candidate_d2);
                }
            }
        }
        if (pick < 0) {
            // Fewer distinct points than clusters: take an unused index uniformly.
            std::vector<Index> unused;
            for (Index i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
            std::uniform_int_distribution<std::size_t> any(0, unused.size() - 1);
            pick = unused[any(rng)];
            for (Index i = 0; i < n; ++i)
                d2[static_cast<std::size_t>(i)] = std::min(
                    d2[static_cast<std::size_t>(i)], squared_distance(x.row(i).data(), x.row(pick).data(), dim));
        } else {
            d2.swap(best_d2);
        }
        chosen[static_cast<std::size_t>(pick)] = 1;
        centers.row(c) = x.row(pick);
    }
    return centers;
}

/// Nearest-centroid assignment, ties to the lowest cluster index. Returns the inertia.
inline double assign(const DenseMatrix& x, const DenseMatrix& centers, std::vector<int>& labels, std::vector<double>& d2) {
    const Index n = x.rows();
    const Index dim = x.cols();
    const Index k = centers.rows();
    double inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Index c = 0; c < k; ++c) {
            const double d = squared_distance(x.row(i).data(), centers.row(c).data(), dim);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = arg;
        d2[static_cast<std::size_t>(i)] = best;
        inertia += best;
    }
    return inertia;
}

/// Moves the point farthest from its centroid into each empty cluster, drawing only from
/// clusters that keep at least one member. Returns true if anything moved.
inline bool repair_empty_clusters(std::vector<int>& labels, std::vector<double>& d2, std::vector<Index>& counts) {
    bool moved = false;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0) continue;
        Index far = -1;
        double far_d = -1.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (counts[static_cast<std::size_t>(labels[i])] <= 1) continue;
            if (d2[i] > far_d) {
                far_d = d2[i];
                far = static_cast<Index>(i);
            }
        }
        if (far < 0) continue;
        --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
        d2[static_cast<std::size_t>(far)] = 0.0;
        counts[c] = 1;
        moved = true;
    }
    return moved;
}

inline std::vector<Index> cluster_counts(const std::vector<int>& labels, int k) {
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

inline DenseMatrix cluster_means(const DenseMatrix& x, const std::vector<int>& labels, const std::vector<Index>& counts) {
    DenseMatrix means = DenseMatrix::Zero(static_cast<Index>(counts.size()), x.cols());
    for (Index i = 0; i < x.rows(); ++i) means.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] > 0) means.row(static_cast<Index>(c)) /= static_cast<double>(counts[c]);
    return means;
}

} // namespace detail

/// Lloyd's algorithm from a k-means++ seeding. Deterministic for a given seed; every
/// cluster of the returned partition is nonempty.
inline KMeansResult kmeans(const DenseMatrix& x, int k, std::uint64_t seed, const KMeansOptions& options = {}) {
    const Index n = x.rows();
    require(k >= 1, "kmeans: k must be positive");
    require(static_cast<Index>(k) <= n,
            "kmeans: k (" + std::to_string(k) + ") exceeds number of points (" + std::to_string(n) + ")");
    require(x.allFinite(), "kmeans: non-finite input");

    std::mt19937_64 rng(seed);
    KMeansResult out;
    out.centroids = detail::kmeans_plus_plus(x, k, rng);

    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double mean_variance =
        x.cols() > 0 ? (x.rowwise() - mean).array().square().sum() / static_cast<double>(n * x.cols()) : 0.0;
    const double tol_abs = options.tol * mean_variance;

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
    for (int iter = 0; iter < options.max_iter; ++iter) {
        check_deadline(options.deadline, "k-means");
        const double inertia = detail::assign(x, out.centroids, labels, d2);
        out.inertia_history.push_back(inertia);
        auto counts = detail::cluster_counts(labels, k);
        detail::repair_empty_clusters(labels, d2, counts);
        DenseMatrix updated = detail::cluster_means(x, labels, counts);
        const double shift = (updated - out.centroids).squaredNorm();
        out.centroids = std::move(updated);
        out.iterations = iter + 1;
        if (shift <= tol_abs) {
            out.converged = true;
            break;
        }
    }

    double inertia = detail::assign(x, out.centroids, labels, d2);
    auto counts = detail::cluster_counts(labels, k);
    if (detail::repair_empty_clusters(labels, d2, counts)) {
        out.centroids = detail::cluster_means(x, labels, counts);
        inertia = 0.0;
        for (Index i = 0; i < n; ++i)
            inertia += detail::squared_distance(x.row(i).data(), out.centroids.row(labels[static_cast<std::size_t>(i)]).data(),
                                                x.cols());
    }
    out.inertia_history.push_back(inertia);
    out.inertia = inertia;
    out.partition = Partition{std::move(labels), k};
    return out;
}

} // namespace mvsck
