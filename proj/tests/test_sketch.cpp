#include "grab/sketch.hpp"
#include "grab/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace grab;

namespace {

Matrix random_cloud(Index n, Index p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < p; ++c) x(i, c) = standard_normal(rng);
    return x;
}

}  // namespace

TEST(Haar, BaseCase) {
    const Matrix h = haar_matrix(2);
    const double r = 1.0 / std::sqrt(2.0);
    Matrix expect(2, 2);
    expect << r, r, r, -r;
    EXPECT_LE((h - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Haar, Orthonormal) {
    for (Index p : {1, 3, 4, 8, 13, 100}) {
        const Matrix h = haar_matrix(p);
        EXPECT_EQ(h.rows(), next_pow2(p));
        EXPECT_LE((h * h.transpose() - Matrix::Identity(h.rows(), h.rows())).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_EQ(next_pow2(100), 128);
    EXPECT_EQ(next_pow2(64), 64);
}

TEST(Haar, ConstantVectorIsDC) {
    const Vector c = haar_matrix(8) * Vector::Constant(8, 2.0);
    EXPECT_NEAR(std::abs(c(0)), 2.0 * std::sqrt(8.0), 1e-12);
    EXPECT_LE(c.tail(7).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sketch, FullDimensionPreservesDistances) {
    const ViewData v{random_cloud(10, 6, 1), 1};
    SketchSpec s;
    s.target_dim = 8;
    const ViewData out = sketch_view(v, s);
    EXPECT_LE((pairwise_sq_dists(out) - pairwise_sq_dists(v)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Sketch, KeepsMaxEnergyCoordinate) {
    Rng rng(4);
    Matrix x(50, 8);
    for (Index i = 0; i < 50; ++i)
        for (Index c = 0; c < 8; ++c) x(i, c) = 0.1 * standard_normal(rng);
    const ViewData v{x, 1};
    SketchSpec s;
    s.target_dim = 1;
    const auto r = sketch_view_detailed(v, s);
    Index best = 0;
    r.energy.maxCoeff(&best);
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0], best);
    const Matrix coeffs = x * haar_matrix(8).transpose();
    EXPECT_LE((r.view.points.col(0) - coeffs.col(best)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Sketch, ContractionAndMonotoneEnergy) {
    const ViewData v{random_cloud(12, 20, 7), 2};
    const Matrix d0 = pairwise_sq_dists(v);
    double prev = 0.0;
    for (Index s = 1; s <= 32; ++s) {
        SketchSpec spec;
        spec.target_dim = s;
        const auto out = sketch_view(v, spec);
        EXPECT_EQ(out.view_id, 2);
        EXPECT_LE(((pairwise_sq_dists(out) - d0).array() - 1e-10).maxCoeff(), 0.0);
        const double e = out.points.squaredNorm();
        EXPECT_GE(e, prev - 1e-10);
        prev = e;
    }
}

TEST(Sketch, KeptPositionsAscendingAndTiesLow) {
    // all-zero columns beyond the data: ties among zero-energy coefficients go to the lower index
    Matrix x = Matrix::Zero(4, 4);
    x.col(0) << 1, -1, 1, -1;
    SketchSpec s;
    s.target_dim = 3;
    const auto r = sketch_view_detailed(ViewData{x, 1}, s);
    for (std::size_t i = 1; i < r.kept.size(); ++i) EXPECT_LT(r.kept[i - 1], r.kept[i]);
}

TEST(Sketch, Errors) {
    const ViewData v{random_cloud(5, 6, 2), 1};
    SketchSpec s;
    s.target_dim = 9;
    EXPECT_THROW(sketch_view(v, s), ParameterError);
    s.target_dim = 0;
    EXPECT_THROW(sketch_view(v, s), ParameterError);
    auto ds = MultiviewDataset::from_matrices({random_cloud(5, 6, 2), random_cloud(5, 6, 3)});
    EXPECT_THROW(sketch_dataset(ds, {2, 2, 2}), ParameterError);
    EXPECT_EQ(sketch_dataset(ds, {3}).views[1].dim(), 3);
}

TEST(Sketch, SetupOneCleanDistances) {
    // clean Setup (1) signals occupy 10 of 100 coordinates; twelve Haar coefficients keep
    // most of the pairwise geometry (relative RMS error of squared distances under 0.35)
    ClusterGenSpec spec;
    spec.n_per_cluster = 40;
    spec.noise_vars = {0.0, 0.0, 0.0};
    spec.seed = 5;
    const auto g = gen_clusters(spec);
    for (const auto& v : g.data.views) {
        SketchSpec s;
        const Matrix a = pairwise_sq_dists(v), b = pairwise_sq_dists(sketch_view(v, s));
        const double rel = std::sqrt((a - b).squaredNorm() / a.squaredNorm());
        EXPECT_LT(rel, 0.35);
        EXPECT_LE(((b - a).array() - 1e-9).maxCoeff(), 0.0);
    }
}
