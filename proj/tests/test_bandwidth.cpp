#include "grab/bandwidth.hpp"
#include "grab/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace grab;

namespace {

Matrix random_cloud(Index n, Index p, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Matrix x(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index c = 0; c < p; ++c) x(i, c) = scale * standard_normal(rng);
    return x;
}

/// Smallest value with ECDF >= w, from sorted off-diagonal pairs.
double sorted_quantile(const Matrix& x, double w) {
    const auto d = oracle::sq_dists(oracle::from_eigen(x));
    std::vector<double> v;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) v.push_back(d[i][j]);
    std::sort(v.begin(), v.end());
    std::size_t k = 1;
    while (static_cast<double>(k) / static_cast<double>(v.size()) < w) ++k;
    return v[k - 1];
}

}  // namespace

TEST(Ecdf, SortAndIndex) {
    EXPECT_EQ(ecdf_quantile({4, 1, 3, 2}, 0.5), 2.0);
    EXPECT_EQ(ecdf_quantile({4, 1, 3, 2}, 0.51), 3.0);
    EXPECT_EQ(ecdf_quantile({4, 1, 3, 2}, 0.25), 1.0);
    EXPECT_EQ(ecdf_quantile({4, 1, 3, 2}, 0.99), 4.0);
    EXPECT_THROW(ecdf_quantile({1, 2}, 0.0), ParameterError);
    EXPECT_THROW(ecdf_quantile({1, 2}, 1.0), ParameterError);
}

TEST(Ecdf, EqualDistances) {
    // regular simplex: every pair at squared distance 2
    const Matrix x = Matrix::Identity(4, 4);
    for (double w : {0.1, 0.5, 0.9}) EXPECT_EQ(ecdf_quantile_scale(ViewData{x, 1}, w), 2.0);
}

TEST(Ecdf, MatchesSortOracle) {
    const Matrix x = random_cloud(9, 3, 4);
    for (double w : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double ref = sorted_quantile(x, w);
        EXPECT_NEAR(ecdf_quantile_scale(ViewData{x, 1}, w), ref, 1e-12 * ref);
    }
}

TEST(Ecdf, AllZeroDistancesRejected) {
    EXPECT_THROW(ecdf_quantile_scale(ViewData{Matrix::Ones(3, 2), 1}, 0.5), DegeneracyError);
}

TEST(SpectralDistance, Examples) {
    Vector a(2), b(2);
    a << 1, 0.5;
    b << 1, 0.3;
    EXPECT_NEAR(spectral_distance(a, b, 2), 0.04, 1e-15);
    EXPECT_EQ(spectral_distance(a, a, 2), 0.0);
    EXPECT_EQ(spectral_distance(a, b, 2), spectral_distance(b, a, 2));
    EXPECT_EQ(spectral_distance(a, b, 1), 0.0);
    EXPECT_THROW(spectral_distance(a, b, 3), ShapeError);
}

TEST(CGrid, LogSpaced) {
    const auto g = CGrid{}.values();
    ASSERT_EQ(g.size(), 20u);
    EXPECT_NEAR(g.front(), 1e-3, 1e-15);
    EXPECT_NEAR(g.back(), 0.5, 1e-15);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) EXPECT_NEAR(g[i] * g[i], g[i - 1] * g[i + 1], 1e-12 * g[i] * g[i]);
    EXPECT_THROW((CGrid{0.5, 0.1, 4}.values()), ParameterError);
    EXPECT_THROW((CGrid{0.0, 0.1, 4}.values()), ParameterError);
}

TEST(GlobalScale, SingleCandidate) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(6, 2, 1), random_cloud(6, 2, 2)});
    Vector h = Vector::Ones(2);
    GlobalScaleOptions o;
    o.delta = 1e-9;
    const auto r = select_global_scale(ds, h, {0.3}, o);
    EXPECT_EQ(r.c_star, 0.3);
    EXPECT_EQ(r.c_star_index, 0);
}

TEST(GlobalScale, IdenticalSpectraTieGoesToLargest) {
    // points 10 apart: at these bandwidths every kernel is exactly the identity
    Matrix x(4, 1);
    x << 0, 10, 20, 30;
    auto ds = MultiviewDataset::from_matrices({x, x, x});
    GlobalScaleOptions o;
    o.delta = 0.1;
    o.min_effective_neighbours = 0.0;
    const auto r = select_global_scale(ds, Vector::Ones(3), {1e-3, 2e-3, 3e-3}, o);
    for (int s : r.S_sizes) EXPECT_EQ(s, 2);
    EXPECT_EQ(r.c_star, 3e-3);
    EXPECT_TRUE(r.spectral_dist.isZero(0.0));
}

TEST(GlobalScale, MatchesStraightLineOracle) {
    std::vector<Matrix> xs{random_cloud(6, 2, 21), random_cloud(6, 3, 22, 2.0), random_cloud(6, 2, 23, 0.5)};
    auto ds = MultiviewDataset::from_matrices(xs);
    Vector h(3);
    for (Index l = 0; l < 3; ++l) h(l) = ecdf_quantile_scale(ds.views[static_cast<std::size_t>(l)], 0.5);
    const std::vector<double> grid{0.05, 0.1, 0.3, 0.6, 1.2};
    GlobalScaleOptions o;
    o.min_effective_neighbours = 0.0;
    const auto r = select_global_scale(ds, h, grid, o);

    std::vector<oracle::Mat> views;
    for (const auto& x : xs) views.push_back(oracle::from_eigen(x));
    const auto ref = oracle::global_scale(views, {h(0), h(1), h(2)}, grid, 0.0);
    EXPECT_LE(oracle::max_abs_diff(ref.d, r.spectral_dist), 1e-10);
    EXPECT_NEAR(r.delta, ref.delta, 1e-10);
    EXPECT_EQ(r.S_sizes, ref.sizes);
    EXPECT_EQ(static_cast<std::size_t>(r.c_star_index), ref.alpha);
    EXPECT_EQ(r.c_star, grid[ref.alpha]);
    for (Index l = 0; l < 3; ++l) EXPECT_EQ(r.epsilon(l), r.c_star * h(l));
}

TEST(GlobalScale, ReportInvariants) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(10, 2, 31), random_cloud(10, 2, 32)});
    const auto r = select_global_scale(ds, Vector::Ones(2) * 4.0, CGrid{0.01, 2.0, 8}.values());
    for (Index i = 0; i < r.spectral_dist.rows(); ++i) {
        if (!r.admissible[static_cast<std::size_t>(i)]) continue;
        EXPECT_EQ(r.spectral_dist(i, i), 0.0);
        for (Index j = 0; j < r.spectral_dist.cols(); ++j)
            if (r.admissible[static_cast<std::size_t>(j)]) EXPECT_EQ(r.spectral_dist(i, j), r.spectral_dist(j, i));
    }
    EXPECT_NE(std::find(r.c_grid.begin(), r.c_grid.end(), r.c_star), r.c_grid.end());
    EXPECT_TRUE(r.admissible[static_cast<std::size_t>(r.c_star_index)]);
}

TEST(GlobalScale, AdmissibilityGuard) {
    Matrix x(5, 1);
    x << 0, 1, 2, 3, 4;
    auto ds = MultiviewDataset::from_matrices({x, x});
    const std::vector<double> grid{0.01, 0.05, 1.0, 2.0, 4.0};
    const auto r = select_global_scale(ds, Vector::Ones(2), grid);
    // effective neighbours: mean over rows of sum_{j != i} K(i, j)
    const auto d = oracle::sq_dists(oracle::from_eigen(x));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double mass = 0.0;
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                if (i != j) mass += std::exp(-d[i][j] / grid[g]);
        mass /= 5.0;
        EXPECT_NEAR(r.effective_neighbours(static_cast<Index>(g), 0), mass, 1e-12);
        EXPECT_EQ(r.admissible[g], mass >= 1.0);
        if (!r.admissible[g]) {
            EXPECT_EQ(r.S_sizes[g], -1);
            EXPECT_TRUE(std::isnan(r.spectral_dist(static_cast<Index>(g), 2)));
        }
    }
    EXPECT_FALSE(r.admissibility_fallback);
    EXPECT_GE(r.c_star, 1.0);

    GlobalScaleOptions strict;
    strict.min_effective_neighbours = 100.0;
    const auto f = select_global_scale(ds, Vector::Ones(2), grid, strict);
    EXPECT_TRUE(f.admissibility_fallback);
    for (int s : f.S_sizes) EXPECT_GE(s, 0);
}

TEST(GlobalScale, Errors) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(5, 2, 1), random_cloud(5, 2, 2)});
    EXPECT_THROW(select_global_scale(ds, Vector::Ones(2), {0.2, 0.1}), ParameterError);
    EXPECT_THROW(select_global_scale(ds, Vector::Ones(2), {}), ParameterError);
    GlobalScaleOptions o;
    o.delta = -1.0;
    EXPECT_THROW(select_global_scale(ds, Vector::Ones(2), {0.1}, o), ParameterError);
}

TEST(SelectBandwidths, FixedMedianComposition) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(8, 2, 3), random_cloud(8, 4, 4, 3.0)});
    BandwidthConfig cfg;
    cfg.omega = OmegaSetting::fixed({0.5});
    cfg.explicit_grid = std::vector<double>{0.1};
    const auto sel = select_bandwidths(ds, cfg);
    for (std::size_t l = 0; l < 2; ++l) {
        const double ref = sorted_quantile(ds.views[l].points, 0.5);
        EXPECT_NEAR(sel.report.h(static_cast<Index>(l)), ref, 1e-12 * ref);
        EXPECT_EQ(sel.report.epsilon(static_cast<Index>(l)), 0.1 * sel.report.h(static_cast<Index>(l)));
    }
}

TEST(SelectBandwidths, Deterministic) {
    auto ds = MultiviewDataset::from_matrices({random_cloud(15, 2, 5), random_cloud(15, 2, 6)});
    BandwidthConfig cfg;
    cfg.grid = CGrid{0.01, 1.0, 6};
    const auto a = select_bandwidths(ds, cfg).report, b = select_bandwidths(ds, cfg).report;
    EXPECT_EQ(a.c_star, b.c_star);
    EXPECT_EQ(a.epsilon, b.epsilon);
    EXPECT_TRUE((a.spectral_dist.array() == b.spectral_dist.array() ||
                 (a.spectral_dist.array().isNaN() && b.spectral_dist.array().isNaN())).all());
}

TEST(SelectBandwidths, OrderedLikeSignalEnergy) {
    ClusterGenSpec spec;
    spec.n_per_cluster = 30;
    spec.noise_vars = {0.0, 0.0, 0.0};
    spec.seed = 3;
    const auto g = gen_clusters(spec);
    BandwidthConfig cfg;
    cfg.grid = CGrid{0.05, 0.5, 4};
    const auto r = select_bandwidths(g.data, cfg).report;
    std::vector<double> energy;
    for (const auto& c : g.clean_views) energy.push_back(signal_energy(c));
    for (Index a = 0; a < 3; ++a)
        for (Index b = 0; b < 3; ++b)
            if (energy[static_cast<std::size_t>(a)] < energy[static_cast<std::size_t>(b)]) EXPECT_LT(r.epsilon(a), r.epsilon(b));
}

TEST(AutoEmbeddingDim, FirstGap) {
    Vector e(16);
    e << 1, 0.9, 0.3, 0.29, 0.28, 0.27, 0.26, 0.25, 0.24, 0.23, 0.22, 0.21, 0.2, 0.19, 0.18, 0.17;
    const auto r = auto_embedding_dim(e);
    ASSERT_EQ(r.eigen_ratios.size(), 3u);
    EXPECT_NEAR(r.eigen_ratios[0], 3.0, 1e-12);
    EXPECT_NEAR(r.e_threshold, 1.0, 1e-12);
    EXPECT_EQ(r.m_selected, 1);
    EXPECT_FALSE(r.fallback);
}

TEST(AutoEmbeddingDim, LaterGap) {
    Vector e(16);
    e << 1, 0.9, 0.88, 0.86, 0.3, 0.29, 0.28, 0.27, 0.26, 0.25, 0.24, 0.23, 0.22, 0.21, 0.2, 0.19;
    EXPECT_EQ(auto_embedding_dim(e).m_selected, 3);
}

TEST(AutoEmbeddingDim, FlatSpectrum) {
    Vector e(16);
    for (Index i = 0; i < 16; ++i) e(i) = std::pow(0.8, static_cast<double>(i));
    EXPECT_EQ(auto_embedding_dim(e).m_selected, 1);
}

TEST(AutoEmbeddingDim, TooFewPositive) {
    Vector e(9);
    e << 1, 0.5, -0.1, -0.2, -0.3, -0.4, -0.5, -0.6, -1;
    const auto r = auto_embedding_dim(e);
    EXPECT_TRUE(r.fallback);
    EXPECT_EQ(r.m_selected, 1);
}

TEST(SignalCount, Rule) {
    Vector e(9);
    e << 5, 4.8, 1, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4;  // ratios k=1..3: 1.04, 4.8, 1.11
    double s = 0;
    EXPECT_EQ(signal_count(e, std::nullopt, &s), 2);
    EXPECT_NEAR(s, 1.9, 1e-12);
    EXPECT_EQ(signal_count(e, 0.01), 3);
}

TEST(AutoPercentile, SoleCandidateAndTies) {
    const ViewData v{random_cloud(12, 2, 8), 1};
    EXPECT_EQ(auto_percentile(v, {0.3}).omega, 0.3);
    // an enormous threshold leaves every count at zero: the largest candidate wins
    EXPECT_EQ(auto_percentile(v, {0.2, 0.7, 0.4}, Kernel::gaussian(), 1e9).omega, 0.7);
    EXPECT_THROW(auto_percentile(v, {}), ParameterError);
}

TEST(AutoPercentile, MatchesStraightLineOracle) {
    // two tight clusters
    Rng rng(77);
    Matrix x(16, 2);
    for (Index i = 0; i < 16; ++i) {
        x(i, 0) = (i < 8 ? 0.0 : 6.0) + 0.3 * standard_normal(rng);
        x(i, 1) = 0.3 * standard_normal(rng);
    }
    const std::vector<double> cand{0.25, 0.5, 0.75};
    const auto got = auto_percentile(ViewData{x, 1}, cand);

    int best = -1;
    double pick = 0.0;
    for (double w : cand) {
        const auto k = oracle::kernel(oracle::from_eigen(x), sorted_quantile(x, w));
        const auto ev = oracle::eigenvalues_direct(k);
        std::vector<double> ratios;
        for (std::size_t i = 1; i <= 4; ++i) {
            if (ev[i - 1] <= 0 || ev[i] <= 0) break;
            ratios.push_back(ev[i - 1] / ev[i]);
        }
        const double s = 0.5 * (*std::max_element(ratios.begin(), ratios.end()) - 1.0);
        int cnt = 0;
        for (std::size_t i = 0; i < ratios.size(); ++i)
            if (ratios[i] >= 1.0 + s) cnt = static_cast<int>(i) + 1;
        if (cnt >= best) {
            best = cnt;
            pick = w;
        }
    }
    EXPECT_EQ(got.omega, pick);
    EXPECT_EQ(*std::max_element(got.k_counts.begin(), got.k_counts.end()), best);
}
