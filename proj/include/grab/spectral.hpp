#pragma once

#include "grab/core.hpp"
#include "grab/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace grab {

/// How right eigenvectors u_i = D^{-1/2} v_i are scaled after the symmetric solve.
enum class EigenvectorScaling {
    unit,             ///< ||u_i||_2 = 1 (default everywhere in the pipeline)
    degree_weighted,  ///< u_i^T D u_i = 1, the basis in which diffusion distances are isometric
};

/// Eigenpairs of the transition matrix, eigenvalues descending.
struct TransitionSpectrum {
    Vector eigenvalues;
    Matrix right_eigenvectors;  // column i pairs with eigenvalues(i)
    Vector degree;
    Index n = 0;
    Index num_views = 0;

    Index size() const { return eigenvalues.size(); }
};

namespace detail {

// Largest-magnitude entry made positive; near-ties resolved toward the lowest index.
inline void fix_sign(Eigen::Ref<Vector> u) {
    const double amax = u.cwiseAbs().maxCoeff();
    if (amax == 0.0) return;
    for (Index i = 0; i < u.size(); ++i) {
        if (std::abs(u(i)) >= amax * (1.0 - 1e-10)) {
            if (u(i) < 0.0) u = -u;
            return;
        }
    }
}

inline Matrix symmetric_conjugate(const BlockAffinity& aff) {
    const Vector dinv_sqrt = aff.degree.cwiseSqrt().cwiseInverse();
    Matrix s = dinv_sqrt.asDiagonal() * aff.matrix * dinv_sqrt.asDiagonal();
    // K is symmetric up to rounding in the products; the solver reads one triangle
    Matrix st = s.transpose();
    s = 0.5 * (s + st);
    return s;
}

inline void check_degree(const Vector& degree) {
    for (Index i = 0; i < degree.size(); ++i)
        if (!(degree(i) > 0.0) || !std::isfinite(degree(i)))
            throw DegeneracyError("degree must be strictly positive");
}

// Two views without diagonal blocks: S = [[0, B], [B^T, 0]] with B = D_1^{-1/2} K^{12} D_2^{-1/2},
// whose eigenpairs are (+-sigma_i, [u_i; +-v_i] / sqrt 2) from the SVD of B.
inline bool two_view_bipartite(const BlockAffinity& aff) {
    return aff.num_views == 2 && aff.block(0, 0).isZero(0.0) && aff.block(1, 1).isZero(0.0);
}

inline Matrix bipartite_block(const BlockAffinity& aff) {
    const Index n = aff.block_size;
    const Vector dinv_sqrt = aff.degree.cwiseSqrt().cwiseInverse();
    return dinv_sqrt.head(n).asDiagonal() * aff.block(0, 1) * dinv_sqrt.tail(n).asDiagonal();
}

inline TransitionSpectrum decompose_symmetric(const Matrix& s, const Vector& degree, Index n,
                                              Index num_views, EigenvectorScaling scaling) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "symmetric eigensolver did not converge (size " << s.rows() << ", info "
           << static_cast<int>(es.info()) << ", max iterations "
           << Eigen::SelfAdjointEigenSolver<Matrix>::m_maxIterations << " x n)";
        throw NumericError(os.str());
    }
    const Index N = s.rows();
    TransitionSpectrum out;
    out.n = n;
    out.num_views = num_views;
    out.degree = degree;
    out.eigenvalues.resize(N);
    out.right_eigenvectors.resize(N, N);
    const Vector dinv_sqrt = degree.cwiseSqrt().cwiseInverse();
    // Eigen returns ascending order
    for (Index k = 0; k < N; ++k) {
        const Index src = N - 1 - k;
        out.eigenvalues(k) = es.eigenvalues()(src);
        auto u = out.right_eigenvectors.col(k);
        u = dinv_sqrt.cwiseProduct(es.eigenvectors().col(src));
        if (scaling == EigenvectorScaling::unit)
            u /= u.norm();
        else
            u /= std::sqrt(u.cwiseProduct(degree).dot(u));
        fix_sign(u);
    }
    return out;
}

}  // namespace detail

namespace detail {

inline TransitionSpectrum decompose_bipartite(const BlockAffinity& aff, EigenvectorScaling scaling) {
    const Index n = aff.block_size, N = 2 * n;
    Eigen::BDCSVD<Matrix> svd(bipartite_block(aff), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericError("SVD of the cross-view block did not converge");
    const Vector& sv = svd.singularValues();
    TransitionSpectrum out;
    out.n = n;
    out.num_views = 2;
    out.degree = aff.degree;
    out.eigenvalues.resize(N);
    out.right_eigenvectors.resize(N, N);
    const Vector dinv_sqrt = aff.degree.cwiseSqrt().cwiseInverse();
    const double r = 1.0 / std::sqrt(2.0);
    for (Index k = 0; k < N; ++k) {
        // +sigma descending, then -sigma ascending in magnitude
        const bool upper = k < n;
        const Index i = upper ? k : N - 1 - k;
        out.eigenvalues(k) = upper ? sv(i) : -sv(i);
        Vector v(N);
        v.head(n) = r * svd.matrixU().col(i);
        v.tail(n) = (upper ? r : -r) * svd.matrixV().col(i);
        auto u = out.right_eigenvectors.col(k);
        u = dinv_sqrt.cwiseProduct(v);
        if (scaling == EigenvectorScaling::unit)
            u /= u.norm();
        else
            u /= std::sqrt(u.cwiseProduct(aff.degree).dot(u));
        fix_sign(u);
    }
    return out;
}

}  // namespace detail

/// Eigendecomposition of A = D^{-1} K through the symmetric conjugate D^{-1/2} K D^{-1/2}.
inline TransitionSpectrum decompose(const BlockAffinity& aff,
                                    EigenvectorScaling scaling = EigenvectorScaling::unit) {
    detail::check_degree(aff.degree);
    if (detail::two_view_bipartite(aff)) return detail::decompose_bipartite(aff, scaling);
    return detail::decompose_symmetric(detail::symmetric_conjugate(aff), aff.degree,
                                       aff.block_size, aff.num_views, scaling);
}

/// Same, starting from a transition matrix and its degree vector.
inline TransitionSpectrum decompose(const Matrix& transition, const Vector& degree, Index n,
                                    Index num_views,
                                    EigenvectorScaling scaling = EigenvectorScaling::unit) {
    if (transition.rows() != transition.cols() || transition.rows() != degree.size())
        throw ShapeError("transition matrix and degree vector disagree in size");
    detail::check_degree(degree);
    const Vector dsqrt = degree.cwiseSqrt();
    Matrix s = dsqrt.asDiagonal() * transition * dsqrt.cwiseInverse().asDiagonal();
    Matrix st = s.transpose();
    s = 0.5 * (s + st);
    return detail::decompose_symmetric(s, degree, n, num_views, scaling);
}

/// Eigenvalues of A only, descending. Used by the bandwidth grid search.
inline Vector transition_eigenvalues(const BlockAffinity& aff) {
    detail::check_degree(aff.degree);
    if (detail::two_view_bipartite(aff)) {
        Eigen::BDCSVD<Matrix> svd(detail::bipartite_block(aff));
        if (svd.info() != Eigen::Success) throw NumericError("SVD of the cross-view block did not converge");
        const Vector& sv = svd.singularValues();
        Vector out(2 * sv.size());
        out.head(sv.size()) = sv;
        out.tail(sv.size()) = -sv.reverse();
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(detail::symmetric_conjugate(aff),
                                             Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
    return es.eigenvalues().reverse();
}

// ============================================================
// Diffusion embeddings
// ============================================================

/// Q_{m,t} = diag(eta_2^t .. eta_{m+1}^t) [u_2 .. u_{m+1}]^T, an m x nK matrix.
struct EmbeddingSet {
    Matrix Q;
    int m = 0;
    double t = 1.0;
    Index n = 0;
    Index num_views = 0;
};

inline EmbeddingSet build_Q(const TransitionSpectrum& spec, int m, double t = 1.0) {
    const Index N = spec.size();
    if (m < 1 || m >= N) throw ParameterError("embedding dimension must satisfy 1 <= m < nK");
    if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("diffusion time must be >= 0");
    const bool integral_t = (t == std::floor(t));

    EmbeddingSet e;
    e.m = m;
    e.t = t;
    e.n = spec.n;
    e.num_views = spec.num_views;
    e.Q.resize(m, N);
    for (int r = 0; r < m; ++r) {
        const double eta = spec.eigenvalues(r + 1);
        if (!integral_t && eta <= 0.0)
            throw ParameterError("fractional diffusion time needs positive eigenvalues");
        e.Q.row(r) = std::pow(eta, t) * spec.right_eigenvectors.col(r + 1).transpose();
    }
    return e;
}

struct EmbeddingMode {
    enum class Kind { view, joint, averaged };
    Kind kind = Kind::averaged;
    Index view = 0;  // only for Kind::view, zero-based

    static EmbeddingMode of_view(Index l) { return {Kind::view, l}; }
    static EmbeddingMode joint() { return {Kind::joint, 0}; }
    static EmbeddingMode averaged() { return {Kind::averaged, 0}; }
};

namespace detail {

inline void check_indices(const EmbeddingSet& e, Index view, Index sample) {
    if (view < 0 || view >= e.num_views) throw ParameterError("view index out of range");
    if (sample < 0 || sample >= e.n) throw ParameterError("sample index out of range");
}

}  // namespace detail

/// Column sample + view * n of Q (zero-based view and sample).
inline Vector embed_view(const EmbeddingSet& e, Index view, Index sample) {
    detail::check_indices(e, view, sample);
    return e.Q.col(sample + view * e.n);
}

/// Per-view embeddings of one sample stacked in view order, length m K.
inline Vector embed_joint(const EmbeddingSet& e, Index sample) {
    detail::check_indices(e, 0, sample);
    Vector out(e.m * e.num_views);
    for (Index l = 0; l < e.num_views; ++l) out.segment(l * e.m, e.m) = e.Q.col(sample + l * e.n);
    return out;
}

/// Mean over views of the per-view embeddings.
inline Vector embed_averaged(const EmbeddingSet& e, Index sample) {
    detail::check_indices(e, 0, sample);
    Vector acc = Vector::Zero(e.m);
    for (Index l = 0; l < e.num_views; ++l) acc += e.Q.col(sample + l * e.n);
    return acc / static_cast<double>(e.num_views);
}

inline Vector embed(const EmbeddingSet& e, Index sample, EmbeddingMode mode) {
    switch (mode.kind) {
        case EmbeddingMode::Kind::view: return embed_view(e, mode.view, sample);
        case EmbeddingMode::Kind::joint: return embed_joint(e, sample);
        case EmbeddingMode::Kind::averaged: return embed_averaged(e, sample);
    }
    return {};
}

/// All n samples embedded under `mode`, one row per sample.
inline Matrix embed_all(const EmbeddingSet& e, EmbeddingMode mode) {
    const Index dim = mode.kind == EmbeddingMode::Kind::joint ? e.m * e.num_views : e.m;
    Matrix out(e.n, dim);
    for (Index j = 0; j < e.n; ++j) out.row(j) = embed(e, j, mode).transpose();
    return out;
}

inline double diffusion_distance(const EmbeddingSet& e, Index i, Index j, EmbeddingMode mode) {
    return (embed(e, i, mode) - embed(e, j, mode)).norm();
}

}  // namespace grab
