#pragma once

#include "grab/core.hpp"
#include "grab/kernel.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace grab {

// ============================================================
// Seeding and portable variates
// ============================================================

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stable child seed: the same (master, stream, sub) always maps to the same value,
/// and streams never share state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sub = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03ULL)) + sub);
}

using Rng = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double a, double b) { return a + (b - a) * uniform01(rng); }

/// Box-Muller without caching: two uniforms per normal, identical on every platform.
inline double standard_normal(Rng& rng) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace stream {
inline constexpr std::uint64_t latent = 0;
inline constexpr std::uint64_t noise_base = 1;  // view l uses noise_base + l
}  // namespace stream

// ============================================================
// Output container
// ============================================================

struct LabeledMultiview {
    MultiviewDataset data;
    std::vector<int> labels;
    Matrix clean_reference;           ///< latent w_i (clusters) or s_i (manifolds), one row per sample
    std::vector<Matrix> clean_views;  ///< noiseless per-view signals x_i^l
};

namespace detail {

inline void add_noise(Matrix& y, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw ParameterError("noise variance must be nonnegative");
    if (variance == 0.0) return;
    Rng rng(seed);
    const double sd = std::sqrt(variance);
    for (Index i = 0; i < y.rows(); ++i)
        for (Index c = 0; c < y.cols(); ++c) y(i, c) += sd * standard_normal(rng);
}

}  // namespace detail

// ============================================================
// Clustering setups
// ============================================================

enum class ClusterSetup { uniform_boxes, trunc_gaussian };

struct ClusterGenSpec {
    ClusterSetup setup = ClusterSetup::uniform_boxes;
    Index n_per_cluster = 200;
    Index block_dim = 10;
    std::array<Index, 3> p{100, 100, 100};
    std::array<double, 3> noise_vars{0.3, 0.1, 0.3};
    std::uint64_t seed = 0;
};

namespace cluster_params {

// [cluster][block] bounds of the uniform boxes
inline constexpr double box_lo[3][3] = {{2.5, 1.0, 1.0}, {2.5, 2.0, 1.0}, {1.5, 3.0, -1.0}};
inline constexpr double box_hi[3][3] = {{3.5, 5.0, 3.0}, {3.5, 6.0, 3.0}, {2.5, 7.0, 3.0}};

// [cluster][block] means of the truncated Gaussians, common variance, truncation at 3 sd
inline constexpr double gauss_mean[3][3] = {{3.0, 3.0, 2.0}, {3.0, 5.0, 2.0}, {2.0, 5.5, 2.0}};
inline constexpr double gauss_var = 0.8;
inline constexpr double gauss_trunc_sd = 3.0;

}  // namespace cluster_params

/// Per-view nonlinear transforms applied entrywise to latent block l.
inline double view_transform(int view, double x) {
    switch (view) {
        case 0: return x * x + x;
        case 1:
            if (!(x > -2.0)) throw GenerationError("log transform needs x > -2");
            return 10.0 * std::log(x + 2.0);
        case 2: return 0.8 * x;
    }
    throw ParameterError("clustering setups have exactly three views");
}

inline double draw_truncated_normal(Rng& rng, double mean, double sd, double k) {
    for (;;) {
        const double z = standard_normal(rng);
        if (std::abs(z) <= k) return mean + sd * z;
    }
}

/// Latent cluster draws w_i (3n x 3d), clusters contiguous.
inline Matrix draw_cluster_latent(const ClusterGenSpec& spec, Rng& rng) {
    const Index n = 3 * spec.n_per_cluster, d = spec.block_dim;
    Matrix w(n, 3 * d);
    const double sd = std::sqrt(cluster_params::gauss_var);
    for (Index i = 0; i < n; ++i) {
        const auto j = static_cast<std::size_t>(i / spec.n_per_cluster);
        for (Index k = 0; k < 3 * d; ++k) {
            const auto b = static_cast<std::size_t>(k / d);
            if (spec.setup == ClusterSetup::uniform_boxes)
                w(i, k) = uniform(rng, cluster_params::box_lo[j][b], cluster_params::box_hi[j][b]);
            else
                w(i, k) = draw_truncated_normal(rng, cluster_params::gauss_mean[j][b], sd,
                                                cluster_params::gauss_trunc_sd);
        }
    }
    return w;
}

inline LabeledMultiview gen_clusters(const ClusterGenSpec& spec) {
    if (spec.n_per_cluster < 1 || spec.block_dim < 1) throw ParameterError("cluster sizes must be positive");
    for (Index p : spec.p)
        if (p < spec.block_dim) throw ParameterError("ambient dimension smaller than block dimension");
    for (double v : spec.noise_vars)
        if (!(v >= 0.0)) throw ParameterError("noise variance must be nonnegative");

    const Index n = 3 * spec.n_per_cluster, d = spec.block_dim;
    Rng latent_rng(derive_seed(spec.seed, stream::latent));

    LabeledMultiview out;
    out.clean_reference = draw_cluster_latent(spec, latent_rng);
    out.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.labels[static_cast<std::size_t>(i)] = static_cast<int>(i / spec.n_per_cluster);

    for (int l = 0; l < 3; ++l) {
        Matrix x = Matrix::Zero(n, spec.p[static_cast<std::size_t>(l)]);
        for (Index i = 0; i < n; ++i)
            for (Index k = 0; k < d; ++k) x(i, k) = view_transform(l, out.clean_reference(i, l * d + k));
        Matrix y = x;
        detail::add_noise(y, spec.noise_vars[static_cast<std::size_t>(l)],
                          derive_seed(spec.seed, stream::noise_base + static_cast<std::uint64_t>(l)));
        out.clean_views.push_back(std::move(x));
        out.data.views.push_back(ViewData{std::move(y), l + 1});
    }
    return out;
}

// ============================================================
// Manifold setups
// ============================================================

enum class ManifoldSetup { swiss_roll_a, mixed_b };

struct ManifoldGenSpec {
    ManifoldSetup setup = ManifoldSetup::swiss_roll_a;
    Index n = 600;
    Index p = 100;
    std::array<double, 2> noise_vars{0.05, 0.2};
    std::uint64_t seed = 0;
};

namespace manifold_params {

inline constexpr double roll_t_lo = 1.5 * std::numbers::pi;
inline constexpr double roll_t_hi = 4.5 * std::numbers::pi;
inline constexpr double roll_height = 21.0;
inline constexpr double scurve_t_half = 1.5 * std::numbers::pi;
inline constexpr double scurve_height = 2.0;

inline constexpr std::array<double, 3> sphere_center{0.0, 0.0, 0.0};
inline constexpr std::array<double, 3> scurve_center{0.0, 1.5, 0.0};
inline constexpr std::array<double, 3> roll_center{1.0, 2.5, 0.0};

}  // namespace manifold_params

inline Eigen::Vector3d swiss_roll_point(double t, double h) {
    return {t * std::cos(t), h, t * std::sin(t)};
}

inline Eigen::Vector3d s_curve_point(double t, double h) {
    const double sgn = t < 0.0 ? -1.0 : 1.0;
    return {std::sin(t), h, sgn * (std::cos(t) - 1.0)};
}

/// Swiss roll sampled uniformly in surface area: the arc-length density in t is
/// proportional to sqrt(1 + t^2), handled by rejection.
inline Eigen::Vector3d draw_swiss_roll(Rng& rng) {
    using namespace manifold_params;
    const double cap = std::sqrt(1.0 + roll_t_hi * roll_t_hi);
    for (;;) {
        const double t = uniform(rng, roll_t_lo, roll_t_hi);
        const double accept = uniform01(rng);
        if (accept * cap <= std::sqrt(1.0 + t * t)) return swiss_roll_point(t, uniform(rng, 0.0, roll_height));
    }
}

/// The S-curve has unit speed in t, so uniform parameters are uniform in area.
inline Eigen::Vector3d draw_s_curve(Rng& rng) {
    using namespace manifold_params;
    const double t = uniform(rng, -scurve_t_half, scurve_t_half);
    return s_curve_point(t, uniform(rng, 0.0, scurve_height));
}

inline Eigen::Vector3d draw_unit_sphere(Rng& rng) {
    for (;;) {
        Eigen::Vector3d z(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        const double r = z.norm();
        if (r > 1e-12) return z / r;
    }
}

/// Maps a parametric surface into the unit ball: subtract the bounding-box midpoint,
/// divide by the largest radius found on a fixed parameter lattice.
struct UnitBallFit {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 1.0;

    Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return (x - center) / radius; }
};

template <class Surface>
UnitBallFit fit_unit_ball(Surface surf, double t_lo, double t_hi, double h_lo, double h_hi) {
    constexpr int nt = 4001, nh = 11;
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(nt * nh);
    for (int a = 0; a < nt; ++a)
        for (int b = 0; b < nh; ++b) {
            const auto x = surf(t_lo + (t_hi - t_lo) * a / (nt - 1), h_lo + (h_hi - h_lo) * b / (nh - 1));
            lo = lo.cwiseMin(x);
            hi = hi.cwiseMax(x);
            pts.push_back(x);
        }
    UnitBallFit fit;
    fit.center = 0.5 * (lo + hi);
    double r = 0.0;
    for (const auto& x : pts) r = std::max(r, (x - fit.center).norm());
    fit.radius = r;
    return fit;
}

inline const UnitBallFit& swiss_roll_ball() {
    using namespace manifold_params;
    static const UnitBallFit fit = fit_unit_ball(swiss_roll_point, roll_t_lo, roll_t_hi, 0.0, roll_height);
    return fit;
}

inline const UnitBallFit& s_curve_ball() {
    using namespace manifold_params;
    static const UnitBallFit fit = fit_unit_ball(s_curve_point, -scurve_t_half, scurve_t_half, 0.0, scurve_height);
    return fit;
}

inline LabeledMultiview gen_manifolds(const ManifoldGenSpec& spec) {
    using namespace manifold_params;
    if (spec.n < 2) throw ParameterError("need at least two samples");
    if (spec.p < 3) throw ParameterError("ambient dimension must be at least 3");
    if (spec.setup == ManifoldSetup::mixed_b && spec.n % 3 != 0)
        throw ParameterError("mixed setup needs n divisible by 3");
    for (double v : spec.noise_vars)
        if (!(v >= 0.0)) throw ParameterError("noise variance must be nonnegative");

    Rng rng(derive_seed(spec.seed, stream::latent));
    LabeledMultiview out;
    out.clean_reference.resize(spec.n, 3);
    out.labels.assign(static_cast<std::size_t>(spec.n), 0);

    const auto offset = [](const std::array<double, 3>& c) { return Eigen::Vector3d(c[0], c[1], c[2]); };
    const Index third = spec.n / 3;
    for (Index i = 0; i < spec.n; ++i) {
        Eigen::Vector3d s;
        if (spec.setup == ManifoldSetup::swiss_roll_a) {
            s = draw_swiss_roll(rng);
        } else if (i < third) {
            s = draw_unit_sphere(rng) + offset(sphere_center);
        } else if (i < 2 * third) {
            s = s_curve_ball().apply(draw_s_curve(rng)) + offset(scurve_center);
            out.labels[static_cast<std::size_t>(i)] = 1;
        } else {
            s = swiss_roll_ball().apply(draw_swiss_roll(rng)) + offset(roll_center);
            out.labels[static_cast<std::size_t>(i)] = 2;
        }
        out.clean_reference.row(i) = s.transpose();
    }

    Matrix x = Matrix::Zero(spec.n, spec.p);
    x.leftCols(3) = out.clean_reference;
    for (int l = 0; l < 2; ++l) {
        Matrix y = x;
        detail::add_noise(y, spec.noise_vars[static_cast<std::size_t>(l)],
                          derive_seed(spec.seed, stream::noise_base + static_cast<std::uint64_t>(l)));
        out.clean_views.push_back(x);
        out.data.views.push_back(ViewData{std::move(y), l + 1});
    }
    return out;
}

// ============================================================
// Spiked model: Gaussian signal in r leading coordinates plus isotropic noise
// ============================================================

struct SpikedGenSpec {
    Index n = 300;
    std::vector<Index> p{100, 100};
    std::vector<std::vector<double>> spikes{{5.0, 3.0, 2.0}, {5.0, 3.0, 2.0}};  ///< lambda_{l,i}
    std::vector<double> noise_vars{0.0, 0.0};
    std::uint64_t seed = 0;
};

/// All views share one latent standard-normal draw z_i; view l carries
/// sqrt(lambda_{l,k}) z_{ik} in coordinate k.
inline LabeledMultiview gen_spiked(const SpikedGenSpec& spec) {
    const std::size_t K = spec.p.size();
    if (K < 1 || spec.spikes.size() != K || spec.noise_vars.size() != K)
        throw ParameterError("spiked model needs p, spikes and noise per view");
    std::size_t r = 0;
    for (const auto& s : spec.spikes) r = std::max(r, s.size());
    for (std::size_t l = 0; l < K; ++l)
        if (spec.p[l] < static_cast<Index>(spec.spikes[l].size())) throw ParameterError("more spikes than dimensions");

    Rng rng(derive_seed(spec.seed, stream::latent));
    LabeledMultiview out;
    out.clean_reference.resize(spec.n, static_cast<Index>(r));
    for (Index i = 0; i < spec.n; ++i)
        for (Index k = 0; k < static_cast<Index>(r); ++k) out.clean_reference(i, k) = standard_normal(rng);
    out.labels.assign(static_cast<std::size_t>(spec.n), 0);

    for (std::size_t l = 0; l < K; ++l) {
        Matrix x = Matrix::Zero(spec.n, spec.p[l]);
        for (std::size_t k = 0; k < spec.spikes[l].size(); ++k)
            x.col(static_cast<Index>(k)) = std::sqrt(spec.spikes[l][k]) * out.clean_reference.col(static_cast<Index>(k));
        Matrix y = x;
        detail::add_noise(y, spec.noise_vars[l], derive_seed(spec.seed, stream::noise_base + l));
        out.clean_views.push_back(std::move(x));
        out.data.views.push_back(ViewData{std::move(y), static_cast<int>(l) + 1});
    }
    return out;
}

// ============================================================
// Normalisation and diagnostics
// ============================================================

struct ZScoreReport {
    std::vector<std::vector<Index>> constant_columns;  ///< per view, left unchanged
};

/// Coordinate-wise z-score per view (sample standard deviation, n - 1).
inline MultiviewDataset zscore_normalize(const MultiviewDataset& data, ZScoreReport* report = nullptr) {
    MultiviewDataset out = data;
    if (report) report->constant_columns.assign(data.views.size(), {});
    for (std::size_t l = 0; l < out.views.size(); ++l) {
        Matrix& X = out.views[l].points;
        const Index n = X.rows();
        if (n < 2) throw ShapeError("z-score needs at least two samples");
        for (Index c = 0; c < X.cols(); ++c) {
            auto col = X.col(c);
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1));
            if (!(sd > 0.0)) {
                if (report) report->constant_columns[l].push_back(c);
                continue;
            }
            col = (col.array() - mean) / sd;
        }
    }
    return out;
}

/// Trace of the sample covariance (n - 1) of the rows of `clean`.
inline double signal_energy(const Matrix& clean) {
    if (clean.rows() < 2) throw ShapeError("need at least two samples");
    const Vector mean = clean.colwise().mean();
    return (clean.rowwise() - mean.transpose()).squaredNorm() / static_cast<double>(clean.rows() - 1);
}

/// Total signal energy over total noise energy p sigma^2; +inf when sigma^2 = 0.
inline double snr_from_energy(double signal_energy_sum, double noise_var, Index p) {
    if (noise_var < 0.0) throw ParameterError("noise variance must be nonnegative");
    if (p < 1) throw ParameterError("dimension must be positive");
    if (noise_var == 0.0) return std::numeric_limits<double>::infinity();
    return signal_energy_sum / (static_cast<double>(p) * noise_var);
}

inline double snr(const Matrix& clean, double noise_var, Index p) {
    return snr_from_energy(signal_energy(clean), noise_var, p);
}

}  // namespace grab
