#pragma once

#include "grab/core.hpp"
#include "grab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace grab {

inline Index next_pow2(Index p) {
    Index q = 1;
    while (q < p) q <<= 1;
    return q;
}

/// Orthonormal Haar matrix of size p' = next_pow2(p); rows are the analysis filters,
/// coarsest (the constant row) first.
inline Matrix haar_matrix(Index p) {
    if (p < 1) throw ParameterError("haar_matrix needs p >= 1");
    const Index q = next_pow2(p);
    Matrix H = Matrix::Ones(1, 1);
    const double r = 1.0 / std::sqrt(2.0);
    for (Index m = 1; m < q; m <<= 1) {
        Matrix next = Matrix::Zero(2 * m, 2 * m);
        // averaging half: H_m (x) [1 1]
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) {
                next(i, 2 * j) = r * H(i, j);
                next(i, 2 * j + 1) = r * H(i, j);
            }
        // detail half: I_m (x) [1 -1]
        for (Index i = 0; i < m; ++i) {
            next(m + i, 2 * i) = r;
            next(m + i, 2 * i + 1) = -r;
        }
        H = std::move(next);
    }
    return H;
}

enum class SketchTransform { haar };

struct SketchSpec {
    Index target_dim = 12;
    SketchTransform transform = SketchTransform::haar;
};

struct SketchResult {
    ViewData view;
    std::vector<Index> kept;  ///< retained coefficient positions, ascending
    Vector energy;            ///< per-coefficient energy over all samples
};

/// Haar-transform every row (zero padded to a power of two), keep the
/// target_dim coefficient positions with the largest total energy.
inline SketchResult sketch_view_detailed(const ViewData& view, const SketchSpec& spec) {
    view.validate();
    const Index p = view.dim();
    const Index q = next_pow2(p);
    if (spec.target_dim < 1 || spec.target_dim > q)
        throw ParameterError("sketch dimension must lie in [1, next power of two >= p]");

    const Matrix H = haar_matrix(p);
    Matrix padded = Matrix::Zero(view.n(), q);
    padded.leftCols(p) = view.points;
    const Matrix coeffs = padded * H.transpose();

    SketchResult out;
    out.energy = coeffs.colwise().squaredNorm().transpose();
    std::vector<Index> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return out.energy(a) > out.energy(b); });
    out.kept.assign(order.begin(), order.begin() + spec.target_dim);
    std::sort(out.kept.begin(), out.kept.end());

    out.view.view_id = view.view_id;
    out.view.points.resize(view.n(), spec.target_dim);
    for (Index c = 0; c < spec.target_dim; ++c)
        out.view.points.col(c) = coeffs.col(out.kept[static_cast<std::size_t>(c)]);
    return out;
}

inline ViewData sketch_view(const ViewData& view, const SketchSpec& spec) {
    return sketch_view_detailed(view, spec).view;
}

/// Per-view sketching; `dims` is shared (size 1) or one entry per view.
inline MultiviewDataset sketch_dataset(const MultiviewDataset& data, const std::vector<Index>& dims) {
    if (dims.size() != 1 && dims.size() != data.views.size())
        throw ParameterError("sketch dimensions must be shared or given per view");
    MultiviewDataset out;
    for (std::size_t l = 0; l < data.views.size(); ++l) {
        SketchSpec s;
        s.target_dim = dims.size() == 1 ? dims.front() : dims[l];
        out.views.push_back(sketch_view(data.views[l], s));
    }
    return out;
}

}  // namespace grab
