#pragma once

#include "grab/core.hpp"
#include "grab/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

namespace grab {

// ============================================================
// K-means
// ============================================================

struct ClusteringResult {
    std::vector<int> assignments;
    Matrix centers;  ///< k x m
    double inertia = 0.0;
    int restarts_used = 0;
    std::vector<double> inertia_history;  ///< per Lloyd iteration of the winning restart
};

struct KMeansOptions {
    int restarts = 20;
    int max_iter = 300;
};

namespace detail {

inline std::pair<int, double> nearest_center(const Matrix& X, Index i, const Matrix& C) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < C.rows(); ++c) {
        const double d = (X.row(i) - C.row(c)).squaredNorm();
        if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
        }
    }
    return {best, bd};
}

inline Matrix kmeanspp_init(const Matrix& X, int k, Rng& rng) {
    const Index n = X.rows();
    Matrix C(k, X.cols());
    auto first = static_cast<Index>(uniform01(rng) * static_cast<double>(n));
    C.row(0) = X.row(std::min(first, n - 1));
    Vector d2(n);
    for (Index i = 0; i < n; ++i) d2(i) = (X.row(i) - C.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Index pick = n - 1;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = std::min(static_cast<Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
        }
        C.row(c) = X.row(pick);
        for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (X.row(i) - C.row(c)).squaredNorm());
    }
    return C;
}

inline ClusteringResult lloyd(const Matrix& X, Matrix C, int max_iter) {
    const Index n = X.rows();
    const int k = static_cast<int>(C.rows());
    ClusteringResult r;
    r.assignments.assign(static_cast<std::size_t>(n), 0);

    auto assign = [&]() {
        bool changed = false;
        double inertia = 0.0;
        for (Index i = 0; i < n; ++i) {
            const auto [c, d] = nearest_center(X, i, C);
            if (c != r.assignments[static_cast<std::size_t>(i)]) changed = true;
            r.assignments[static_cast<std::size_t>(i)] = c;
            inertia += d;
        }
        r.inertia_history.push_back(inertia);
        return changed;
    };

    assign();
    for (int it = 0; it < max_iter; ++it) {
        Matrix sum = Matrix::Zero(k, X.cols());
        std::vector<Index> cnt(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            const int c = r.assignments[static_cast<std::size_t>(i)];
            sum.row(c) += X.row(i);
            ++cnt[static_cast<std::size_t>(c)];
        }
        // an emptied cluster keeps its previous center
        for (int c = 0; c < k; ++c)
            if (cnt[static_cast<std::size_t>(c)] > 0) C.row(c) = sum.row(c) / static_cast<double>(cnt[static_cast<std::size_t>(c)]);
        if (!assign()) break;
    }
    r.centers = std::move(C);
    r.inertia = r.inertia_history.back();
    return r;
}

}  // namespace detail

/// Lloyd iterations from k-means++ seeds; the best of `restarts` runs by inertia.
inline ClusteringResult kmeans(const Matrix& points, int k, std::uint64_t seed, KMeansOptions opts = {}) {
    if (k < 1) throw ParameterError("k must be positive");
    if (k > points.rows()) throw ParameterError("k exceeds the number of points");
    if (opts.restarts < 1 || opts.max_iter < 1) throw ParameterError("restarts and iterations must be positive");
    if (!points.allFinite()) throw DomainError("k-means input contains non-finite entries");

    ClusteringResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.restarts; ++r) {
        Rng rng(derive_seed(seed, 0x6b6d, static_cast<std::uint64_t>(r)));
        auto res = detail::lloyd(points, detail::kmeanspp_init(points, k, rng), opts.max_iter);
        if (res.inertia < best.inertia) best = std::move(res);
    }
    best.restarts_used = opts.restarts;
    return best;
}

// ============================================================
// Label agreement
// ============================================================

namespace detail {

inline std::vector<int> compact_labels(const std::vector<int>& labels, int* count) {
    std::map<int, int> ids;
    for (int v : labels) ids.emplace(v, 0);
    int next = 0;
    for (auto& [key, id] : ids) id = next++;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
    *count = next;
    return out;
}

/// Minimum-cost perfect assignment on a square cost matrix (shortest augmenting paths).
inline std::vector<int> hungarian_min(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
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
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
    std::vector<int> row_to_col(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
    return row_to_col;
}

inline void check_same_length(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ShapeError("label vectors differ in length");
    if (a.empty()) throw ShapeError("empty label vectors");
}

}  // namespace detail

/// Fraction of samples matched under the best one-to-one relabeling of `pred`.
inline double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    detail::check_same_length(pred, truth);
    int kp = 0, kt = 0;
    const auto p = detail::compact_labels(pred, &kp);
    const auto t = detail::compact_labels(truth, &kt);
    const int k = std::max(kp, kt);
    Matrix confusion = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < p.size(); ++i) confusion(p[i], t[i]) += 1.0;
    const auto match = detail::hungarian_min(-confusion);
    double hit = 0.0;
    for (int r = 0; r < k; ++r) hit += confusion(r, match[static_cast<std::size_t>(r)]);
    return hit / static_cast<double>(pred.size());
}

/// Fraction of unordered pairs on which the partitions agree (together/apart).
inline double rand_index(const std::vector<int>& pred, const std::vector<int>& truth) {
    detail::check_same_length(pred, truth);
    if (pred.size() < 2) throw ShapeError("rand index needs at least two samples");
    int kp = 0, kt = 0;
    const auto p = detail::compact_labels(pred, &kp);
    const auto t = detail::compact_labels(truth, &kt);
    Matrix table = Matrix::Zero(kp, kt);
    for (std::size_t i = 0; i < p.size(); ++i) table(p[i], t[i]) += 1.0;
    const auto pairs = [](double x) { return 0.5 * x * (x - 1.0); };
    const double n = static_cast<double>(pred.size());
    double both = 0.0, rows = 0.0, cols = 0.0;
    for (Index a = 0; a < kp; ++a)
        for (Index b = 0; b < kt; ++b) both += pairs(table(a, b));
    for (Index a = 0; a < kp; ++a) rows += pairs(table.row(a).sum());
    for (Index b = 0; b < kt; ++b) cols += pairs(table.col(b).sum());
    const double total = pairs(n);
    // together in both + apart in both
    return (both + (total - rows - cols + both)) / total;
}

// ============================================================
// Trustworthiness
// ============================================================

namespace detail {

/// For every i, the other samples sorted by (squared distance, index).
inline std::vector<std::vector<Index>> neighbour_order(const Matrix& X) {
    const Index n = X.rows();
    const Matrix d = pairwise_sq_dists(X);
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        auto& o = out[static_cast<std::size_t>(i)];
        o.reserve(static_cast<std::size_t>(n - 1));
        for (Index j = 0; j < n; ++j)
            if (j != i) o.push_back(j);
        std::sort(o.begin(), o.end(), [&](Index a, Index b) {
            return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b);
        });
    }
    return out;
}

}  // namespace detail

inline double trustworthiness(const Matrix& embedding, const Matrix& reference, int k) {
    const Index n = embedding.rows();
    if (reference.rows() != n) throw ShapeError("embedding and reference differ in sample count");
    if (embedding.cols() < 1 || reference.cols() < 1) throw ShapeError("empty coordinates");
    if (k < 1) throw ParameterError("k must be positive");
    if (3.0 * k >= 2.0 * static_cast<double>(n) - 1.0)
        throw ParameterError("trustworthiness needs k < (2n - 1) / 3");

    const auto emb = detail::neighbour_order(embedding);
    const auto ref = detail::neighbour_order(reference);
    std::vector<Index> rank(static_cast<std::size_t>(n));
    double penalty = 0.0;
    for (Index i = 0; i < n; ++i) {
        const auto& r = ref[static_cast<std::size_t>(i)];
        for (std::size_t pos = 0; pos < r.size(); ++pos) rank[static_cast<std::size_t>(r[pos])] = static_cast<Index>(pos) + 1;
        const auto& u = emb[static_cast<std::size_t>(i)];
        for (int q = 0; q < k; ++q) {
            const Index rj = rank[static_cast<std::size_t>(u[static_cast<std::size_t>(q)])];
            if (rj > k) penalty += static_cast<double>(rj - k);
        }
    }
    const double nn = static_cast<double>(n), kk = k;
    return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * penalty;
}

}  // namespace grab
