#pragma once

#include "grab/core.hpp"

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace grab {

// ============================================================
// Multiview data
// ============================================================

/// One sensor's point cloud: rows are samples, columns are coordinates.
struct ViewData {
    Matrix points;
    int view_id = 0;

    Index n() const { return points.rows(); }
    Index dim() const { return points.cols(); }

    void validate() const {
        if (points.rows() < 2) throw ShapeError("view needs at least two samples");
        if (points.cols() < 1) throw ShapeError("view needs at least one coordinate");
        if (!points.allFinite()) throw DomainError("view contains non-finite entries");
    }
};

/// K index-aligned views of the same n latent samples.
struct MultiviewDataset {
    std::vector<ViewData> views;

    Index n() const { return views.empty() ? 0 : views.front().n(); }
    Index num_views() const { return static_cast<Index>(views.size()); }

    void validate() const {
        if (views.size() < 2) throw ShapeError("multiview dataset needs at least two views");
        const Index n0 = views.front().n();
        for (const auto& v : views) {
            v.validate();
            if (v.n() != n0) {
                std::ostringstream os;
                os << "view " << v.view_id << " has " << v.n() << " samples, expected " << n0;
                throw ShapeError(os.str());
            }
        }
    }

    static MultiviewDataset from_matrices(std::vector<Matrix> mats) {
        MultiviewDataset out;
        int id = 1;
        for (auto& m : mats) out.views.push_back(ViewData{std::move(m), id++});
        return out;
    }
};

// ============================================================
// Kernels
// ============================================================

enum class KernelKind { gaussian, polynomial_decay };

/// Radial profile K(t) applied to t = ||x - y||^2 / eps.
/// Both supported kinds are positive and non-increasing on [0, inf).
struct Kernel {
    KernelKind kind = KernelKind::gaussian;
    double beta = 1.0;  // exponent for polynomial_decay

    static Kernel gaussian() { return {}; }
    static Kernel polynomial_decay(double beta) {
        if (!(beta > 0.0)) throw ParameterError("polynomial_decay needs beta > 0");
        return {KernelKind::polynomial_decay, beta};
    }

    double operator()(double t) const {
        if (!(t >= 0.0)) throw DomainError("kernel argument must be nonnegative");
        return eval_unchecked(t);
    }

    double eval_unchecked(double t) const {
        switch (kind) {
            case KernelKind::gaussian: return std::exp(-t);
            case KernelKind::polynomial_decay: return std::pow(1.0 + t, -beta);
        }
        return 0.0;
    }
};

inline double eval_kernel(const Kernel& k, double t) { return k(t); }

/// Kernel kind(s) plus one bandwidth per view. A single kind is shared by all views.
struct KernelSpec {
    std::vector<Kernel> kinds{Kernel::gaussian()};
    std::vector<double> bandwidths;

    const Kernel& kind_for(std::size_t view) const {
        return kinds.size() == 1 ? kinds.front() : kinds.at(view);
    }

    void validate(std::size_t num_views) const {
        if (bandwidths.size() != num_views) throw ShapeError("one bandwidth per view required");
        if (kinds.empty() || (kinds.size() != 1 && kinds.size() != num_views))
            throw ShapeError("kernel kinds must be shared or given per view");
        for (double e : bandwidths)
            if (!(e > 0.0) || !std::isfinite(e)) throw ParameterError("bandwidth must be positive");
    }
};

/// Squared Euclidean distances between the rows of `points`. Exactly symmetric, zero diagonal.
inline Matrix pairwise_sq_dists(const Matrix& points) {
    const Index n = points.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            const double v = (points.row(i) - points.row(j)).squaredNorm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

inline Matrix pairwise_sq_dists(const ViewData& view) {
    view.validate();
    return pairwise_sq_dists(view.points);
}

/// K^l(i,j) = K(||y_i - y_j||^2 / eps).
inline Matrix kernel_from_sq_dists(const Matrix& sq_dists, const Kernel& kernel, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("bandwidth must be positive");
    return sq_dists.unaryExpr([&](double d) { return kernel.eval_unchecked(d / eps); });
}

inline Matrix view_kernel_matrix(const ViewData& view, const Kernel& kernel, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("bandwidth must be positive");
    return kernel_from_sq_dists(pairwise_sq_dists(view), kernel, eps);
}

// ============================================================
// Block affinity and transition operator
// ============================================================

/// nK x nK matrix with zero n x n diagonal blocks and blocks K^{l1} K^{l2} elsewhere.
struct BlockAffinity {
    Matrix matrix;
    Vector degree;
    Index block_size = 0;
    Index num_views = 0;

    auto block(Index l1, Index l2) const {
        return matrix.block(l1 * block_size, l2 * block_size, block_size, block_size);
    }
};

struct AffinityOptions {
    /// Diagnostic only: keep K^l K^l on the diagonal (lazy within-view walks).
    bool include_diagonal_blocks = false;
};

namespace detail {

inline bool exactly_symmetric(const Matrix& m) {
    return m.rows() == m.cols() && (m.array() == m.transpose().array()).all();
}

inline Vector checked_degree(const Matrix& m) {
    Vector deg = m.rowwise().sum();
    for (Index i = 0; i < deg.size(); ++i) {
        if (!(deg(i) > 0.0) || !std::isfinite(deg(i))) {
            std::ostringstream os;
            os << "row " << i << " of the affinity has degree " << deg(i);
            throw DegeneracyError(os.str());
        }
    }
    return deg;
}

}  // namespace detail

inline BlockAffinity block_affinity(std::span<const Matrix> kernels, AffinityOptions opts = {}) {
    if (kernels.size() < 2) throw ShapeError("block affinity needs at least two views");
    const Index n = kernels.front().rows();
    for (const auto& k : kernels)
        if (k.rows() != n || k.cols() != n) throw ShapeError("all view kernels must be n x n");

    const Index nv = static_cast<Index>(kernels.size());
    BlockAffinity aff;
    aff.block_size = n;
    aff.num_views = nv;
    aff.matrix = Matrix::Zero(n * nv, n * nv);

    std::vector<bool> sym(kernels.size());
    for (std::size_t l = 0; l < kernels.size(); ++l) sym[l] = detail::exactly_symmetric(kernels[l]);

    for (Index a = 0; a < nv; ++a) {
        for (Index b = a; b < nv; ++b) {
            if (a == b && !opts.include_diagonal_blocks) continue;
            auto ab = aff.matrix.block(a * n, b * n, n, n);
            ab.noalias() = kernels[a] * kernels[b];
            if (a == b) continue;
            auto ba = aff.matrix.block(b * n, a * n, n, n);
            // (K^a K^b)^T == K^b K^a when both factors are symmetric
            if (sym[a] && sym[b])
                ba = ab.transpose();
            else
                ba.noalias() = kernels[b] * kernels[a];
        }
    }
    if (!aff.matrix.allFinite()) throw DegeneracyError("affinity contains non-finite entries");
    aff.degree = detail::checked_degree(aff.matrix);
    return aff;
}

inline BlockAffinity block_affinity(const std::vector<Matrix>& kernels, AffinityOptions opts = {}) {
    return block_affinity(std::span<const Matrix>(kernels.data(), kernels.size()), opts);
}

/// Row-stochastic A = D^{-1} K.
inline Matrix transition_matrix(const BlockAffinity& aff) {
    if (aff.degree.size() != aff.matrix.rows()) throw ShapeError("degree length mismatch");
    for (Index i = 0; i < aff.degree.size(); ++i)
        if (!(aff.degree(i) > 0.0)) throw DegeneracyError("zero degree in transition matrix");
    return aff.degree.cwiseInverse().asDiagonal() * aff.matrix;
}

/// View kernels for every view of `data` under `spec`.
inline std::vector<Matrix> view_kernels(const MultiviewDataset& data, const KernelSpec& spec) {
    data.validate();
    spec.validate(data.views.size());
    std::vector<Matrix> out;
    out.reserve(data.views.size());
    for (std::size_t l = 0; l < data.views.size(); ++l)
        out.push_back(view_kernel_matrix(data.views[l], spec.kind_for(l), spec.bandwidths[l]));
    return out;
}

/// Kernels from precomputed squared distances (reused across a bandwidth grid).
inline std::vector<Matrix> view_kernels(std::span<const Matrix> sq_dists, const KernelSpec& spec) {
    spec.validate(sq_dists.size());
    std::vector<Matrix> out;
    out.reserve(sq_dists.size());
    for (std::size_t l = 0; l < sq_dists.size(); ++l)
        out.push_back(kernel_from_sq_dists(sq_dists[l], spec.kind_for(l), spec.bandwidths[l]));
    return out;
}

inline BlockAffinity build_affinity(const MultiviewDataset& data, const KernelSpec& spec,
                                    AffinityOptions opts = {}) {
    return block_affinity(view_kernels(data, spec), opts);
}

}  // namespace grab
