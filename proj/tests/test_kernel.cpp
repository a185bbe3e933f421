#include "grab/kernel.hpp"
#include "grab/synthetic.hpp"
#include "oracles.hpp"

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

TEST(Kernel, EvalValues) {
    EXPECT_DOUBLE_EQ(eval_kernel(Kernel::gaussian(), 0.0), 1.0);
    EXPECT_NEAR(eval_kernel(Kernel::gaussian(), 1.0), 0.36787944117144233, 1e-15);
    EXPECT_DOUBLE_EQ(eval_kernel(Kernel::polynomial_decay(2.0), 1.0), 0.25);
}

TEST(Kernel, NegativeArgumentRejected) {
    EXPECT_THROW(eval_kernel(Kernel::gaussian(), -1e-3), DomainError);
    EXPECT_THROW(Kernel::polynomial_decay(0.0), ParameterError);
}

TEST(Kernel, NonIncreasing) {
    for (const auto& k : {Kernel::gaussian(), Kernel::polynomial_decay(0.5), Kernel::polynomial_decay(3.0)}) {
        double prev = k(0.0);
        for (double t = 0.1; t < 20.0; t += 0.1) {
            EXPECT_LE(k(t), prev);
            prev = k(t);
        }
        EXPECT_GT(k(1.0), 0.0);
    }
}

TEST(PairwiseSqDists, ThreeFourFive) {
    Matrix x(2, 2);
    x << 0, 0, 3, 4;
    const Matrix d = pairwise_sq_dists(x);
    EXPECT_EQ(d(0, 1), 25.0);
    EXPECT_EQ(d(1, 0), 25.0);
    EXPECT_EQ(d(0, 0), 0.0);
}

TEST(PairwiseSqDists, IdenticalPointsGiveZeros) {
    Matrix x = Matrix::Constant(4, 3, 1.7);
    EXPECT_TRUE(pairwise_sq_dists(x).isZero(0.0));
}

TEST(PairwiseSqDists, MatchesLoopOracle) {
    const Matrix x = random_cloud(4, 3, 11);
    EXPECT_LE(oracle::max_abs_diff(oracle::sq_dists(oracle::from_eigen(x)), pairwise_sq_dists(x)), 1e-12);
}

TEST(ViewKernel, DiagonalIsKernelAtZero) {
    ViewData v{random_cloud(6, 2, 3), 1};
    const Matrix k = view_kernel_matrix(v, Kernel::gaussian(), 0.7);
    for (Index i = 0; i < 6; ++i) EXPECT_EQ(k(i, i), 1.0);
    EXPECT_TRUE(k.isApprox(k.transpose(), 0.0));
    EXPECT_GT(k.minCoeff(), 0.0);
}

TEST(ViewKernel, DistanceEqualToBandwidth) {
    Matrix x(2, 1);
    x << 0.0, 1.5;
    const Matrix k = view_kernel_matrix(ViewData{x, 1}, Kernel::gaussian(), 2.25);
    EXPECT_NEAR(k(0, 1), std::exp(-1.0), 1e-15);
}

TEST(ViewKernel, MatchesLoopOracle) {
    const Matrix x = random_cloud(5, 4, 5);
    EXPECT_LE(oracle::max_abs_diff(oracle::kernel(oracle::from_eigen(x), 2.0), view_kernel_matrix(ViewData{x, 1}, Kernel::gaussian(), 2.0)), 1e-12);
    EXPECT_LE(oracle::max_abs_diff(oracle::kernel(oracle::from_eigen(x), 2.0, 1.5),
                                   view_kernel_matrix(ViewData{x, 1}, Kernel::polynomial_decay(1.5), 2.0)),
              1e-12);
}

TEST(ViewKernel, NonPositiveBandwidthRejected) {
    ViewData v{random_cloud(3, 2, 1), 1};
    EXPECT_THROW(view_kernel_matrix(v, Kernel::gaussian(), 0.0), ParameterError);
    EXPECT_THROW(view_kernel_matrix(v, Kernel::gaussian(), -1.0), ParameterError);
}

TEST(ViewKernel, ScaleCovariance) {
    const Matrix x = random_cloud(7, 3, 9);
    const double s = 3.5;
    const Matrix a = view_kernel_matrix(ViewData{x, 1}, Kernel::gaussian(), 1.3);
    const Matrix b = view_kernel_matrix(ViewData{s * x, 1}, Kernel::gaussian(), 1.3 * s * s);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BlockAffinity, IdentityKernels) {
    const std::vector<Matrix> ks{Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
    const auto aff = block_affinity(ks);
    EXPECT_TRUE(aff.block(0, 1).isIdentity(0.0));
    EXPECT_TRUE(aff.block(1, 0).isIdentity(0.0));
    EXPECT_TRUE(aff.degree.isOnes(0.0));
}

TEST(BlockAffinity, ThreeViewsHandProducts) {
    Matrix k1(2, 2), k2(2, 2), k3(2, 2);
    k1 << 1, 2, 3, 4;
    k2 << 2, 0, 1, 1;
    k3 << 1, 1, 0, 2;
    const auto aff = block_affinity(std::vector<Matrix>{k1, k2, k3});
    Matrix k12(2, 2), k13(2, 2), k21(2, 2), k23(2, 2), k31(2, 2), k32(2, 2);
    k12 << 4, 2, 10, 4;   // k1 k2
    k13 << 1, 5, 3, 11;   // k1 k3
    k21 << 2, 4, 4, 6;    // k2 k1
    k23 << 2, 2, 1, 3;    // k2 k3
    k31 << 4, 6, 6, 8;    // k3 k1
    k32 << 3, 1, 2, 2;    // k3 k2
    EXPECT_EQ(aff.block(0, 1), k12);
    EXPECT_EQ(aff.block(0, 2), k13);
    EXPECT_EQ(aff.block(1, 0), k21);
    EXPECT_EQ(aff.block(1, 2), k23);
    EXPECT_EQ(aff.block(2, 0), k31);
    EXPECT_EQ(aff.block(2, 1), k32);
    for (Index l = 0; l < 3; ++l) EXPECT_TRUE(aff.block(l, l).isZero(0.0));
    EXPECT_EQ(aff.degree(0), 4 + 2 + 1 + 5);

    // transition against explicit division
    const Matrix A = transition_matrix(aff);
    const auto ref = oracle::row_normalize(oracle::from_eigen(aff.matrix));
    EXPECT_LE(oracle::max_abs_diff(ref, A), 1e-15);
}

TEST(BlockAffinity, MismatchedBlocksRejected) {
    EXPECT_THROW(block_affinity(std::vector<Matrix>{Matrix::Identity(2, 2), Matrix::Identity(3, 3)}), ShapeError);
    EXPECT_THROW(block_affinity(std::vector<Matrix>{Matrix::Identity(2, 2)}), ShapeError);
}

TEST(BlockAffinity, ZeroDegreeRejected) {
    Matrix z = Matrix::Zero(2, 2);
    z(0, 0) = 1.0;
    EXPECT_THROW(block_affinity(std::vector<Matrix>{z, Matrix::Identity(2, 2)}), DegeneracyError);
}

TEST(BlockAffinity, DiagonalBlocksOnlyOnRequest) {
    const std::vector<Matrix> ks{2.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    AffinityOptions opts;
    opts.include_diagonal_blocks = true;
    const auto aff = block_affinity(ks, opts);
    EXPECT_TRUE(aff.block(0, 0).isApprox(4.0 * Matrix::Identity(2, 2)));
}

TEST(Transition, SingleOffEntry) {
    Matrix a(1, 1), b(1, 1);
    a << 2.0;
    b << 5.0;
    const Matrix A = transition_matrix(block_affinity(std::vector<Matrix>{a, b}));
    Matrix expect(2, 2);
    expect << 0, 1, 1, 0;
    EXPECT_EQ(A, expect);
}

TEST(Transition, RowStochasticAndPositiveOffBlocks) {
    std::vector<Matrix> ks;
    for (int l = 0; l < 3; ++l) ks.push_back(view_kernel_matrix(ViewData{random_cloud(9, 2, 40 + l), l + 1}, Kernel::gaussian(), 1.0));
    const auto aff = block_affinity(ks);
    const Matrix A = transition_matrix(aff);
    EXPECT_LE((A.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    for (Index a = 0; a < 3; ++a)
        for (Index b = 0; b < 3; ++b) {
            const Matrix blk = A.block(a * 9, b * 9, 9, 9);
            if (a == b)
                EXPECT_TRUE(blk.isZero(0.0));
            else
                EXPECT_GT(blk.minCoeff(), 0.0);
        }
}

TEST(Transition, MatchesLoopOracle) {
    std::vector<Matrix> xs;
    std::vector<oracle::Mat> ks;
    std::vector<Matrix> kk;
    for (int l = 0; l < 3; ++l) {
        xs.push_back(random_cloud(5, 2, 70 + l));
        ks.push_back(oracle::kernel(oracle::from_eigen(xs.back()), 0.8));
        kk.push_back(view_kernel_matrix(ViewData{xs.back(), l + 1}, Kernel::gaussian(), 0.8));
    }
    const auto big = oracle::block_affinity(ks);
    const auto aff = block_affinity(kk);
    EXPECT_LE(oracle::max_abs_diff(big, aff.matrix), 1e-12);
    EXPECT_LE(oracle::max_abs_diff(oracle::row_normalize(big), transition_matrix(aff)), 1e-12);
}

TEST(Dataset, Validation) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(4, 2, 1), random_cloud(5, 2, 2)});
    EXPECT_THROW(ds.validate(), ShapeError);
    auto one = MultiviewDataset::from_matrices({random_cloud(4, 2, 1)});
    EXPECT_THROW(one.validate(), ShapeError);
    Matrix bad = random_cloud(4, 2, 3);
    bad(1, 1) = std::nan("");
    auto nan_ds = MultiviewDataset::from_matrices({bad, random_cloud(4, 2, 4)});
    EXPECT_THROW(nan_ds.validate(), DomainError);
    EXPECT_EQ(MultiviewDataset::from_matrices({random_cloud(4, 2, 1), random_cloud(4, 3, 2)}).views[1].view_id, 2);
}

TEST(KernelSpec, PerViewKinds) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(6, 2, 1), random_cloud(6, 2, 2)});
    KernelSpec spec;
    spec.kinds = {Kernel::gaussian(), Kernel::polynomial_decay(2.0)};
    spec.bandwidths = {1.0, 2.0};
    const auto ks = view_kernels(ds, spec);
    EXPECT_LE(oracle::max_abs_diff(oracle::kernel(oracle::from_eigen(ds.views[1].points), 2.0, 2.0), ks[1]), 1e-12);
    spec.bandwidths = {1.0};
    EXPECT_THROW(view_kernels(ds, spec), ShapeError);
}
