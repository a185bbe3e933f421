#pragma once

#include "grab/core.hpp"
#include "grab/kernel.hpp"
#include "grab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

namespace grab {

// ============================================================
// View scale h_l: an ECDF quantile of squared pairwise distances
// ============================================================

/// Smallest x with ECDF(x) >= omega over `values` (order irrelevant, copied).
inline double ecdf_quantile(std::vector<double> values, double omega) {
    if (!(omega > 0.0 && omega < 1.0)) throw ParameterError("percentile must lie in (0, 1)");
    if (values.empty()) throw ShapeError("quantile of an empty sample");
    const auto M = static_cast<double>(values.size());
    // 1-based rank; the small offset keeps products such as 0.7 * 10 from rounding up a rank
    auto k = static_cast<std::size_t>(std::ceil(omega * M - 1e-9));
    k = std::clamp<std::size_t>(k, 1, values.size());
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     values.end());
    return values[k - 1];
}

inline std::vector<double> off_diagonal_upper(const Matrix& sq_dists) {
    const Index n = sq_dists.rows();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 1; i < n; ++i) out.push_back(sq_dists(i, j));
    return out;
}

/// Each unordered pair is counted once; counting both orders gives the same quantile.
inline double ecdf_quantile_scale_from_dists(const Matrix& sq_dists, double omega) {
    if (sq_dists.rows() < 2) throw ShapeError("need at least two samples for a view scale");
    const double h = ecdf_quantile(off_diagonal_upper(sq_dists), omega);
    if (!(h > 0.0)) throw DegeneracyError("view scale is zero: pairwise distances vanish");
    return h;
}

inline double ecdf_quantile_scale(const ViewData& view, double omega) {
    return ecdf_quantile_scale_from_dists(pairwise_sq_dists(view), omega);
}

// ============================================================
// Spectral distance and the global scaling factor
// ============================================================

inline double spectral_distance(const Vector& eigs_i, const Vector& eigs_j, Index top_n) {
    if (top_n < 1 || eigs_i.size() < top_n || eigs_j.size() < top_n)
        throw ShapeError("spectra shorter than top_n");
    return (eigs_i.head(top_n) - eigs_j.head(top_n)).squaredNorm();
}

/// Logarithmically spaced candidates for the global factor c.
struct CGrid {
    double lo = 1e-3;
    double hi = 0.5;
    int count = 20;

    std::vector<double> values() const {
        if (count < 1) throw ParameterError("c grid needs at least one point");
        if (!(lo > 0.0) || !(hi >= lo)) throw ParameterError("c grid bounds must satisfy 0 < lo <= hi");
        if (count == 1) return {lo};
        if (hi == lo) throw ParameterError("c grid with several points needs lo < hi");
        std::vector<double> out(static_cast<std::size_t>(count));
        const double a = std::log(lo), b = std::log(hi);
        for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
        out.front() = lo;
        out.back() = hi;
        return out;
    }
};

/// Everything Algorithm-1 style bandwidth selection decided, for auditing.
struct BandwidthReport {
    Vector h;
    std::vector<double> omega;
    std::vector<double> c_grid;
    Matrix spectral_dist;
    std::vector<int> S_sizes;
    double delta = 0.0;
    bool delta_auto = false;
    Index top_n = 0;
    Index c_star_index = 0;
    double c_star = 0.0;
    Vector epsilon;
    Matrix effective_neighbours;     ///< N x K: mean off-diagonal kernel row mass per grid point and view
    std::vector<bool> admissible;    ///< grid points that took part in the plateau search
    bool admissibility_fallback = false;  ///< no grid point qualified; all were used
};

/// A grid point whose transition matrix could not be built or decomposed.
class GridPointError : public Error {
public:
    GridPointError(double c, const std::string& what)
        : Error(make_message(c, what)), c_(c) {}
    double c() const { return c_; }

private:
    static std::string make_message(double c, const std::string& what) {
        std::ostringstream os;
        os << "grid point c = " << c << ": " << what;
        return os.str();
    }
    double c_;
};

struct GlobalScaleOptions {
    std::optional<double> delta;  ///< empty: 0.05 x median off-diagonal spectral distance
    Index top_n = 0;              ///< 0: use n, the per-view sample count
    std::vector<Kernel> kinds{Kernel::gaussian()};
    /// A grid point joins the plateau search only if, in every view, samples have on average at
    /// least this much kernel mass on other samples (K(0) = 1 units). Below it the kernel is
    /// numerically the identity and every spectrum collapses to the same trivial one.
    /// 0 disables the guard.
    double min_effective_neighbours = 1.0;
};

inline constexpr double kAutoDeltaFraction = 0.05;

namespace detail {

inline void check_grid(const std::vector<double>& c_grid) {
    if (c_grid.empty()) throw ParameterError("empty c grid");
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        if (!(c_grid[i] > 0.0)) throw ParameterError("c grid values must be positive");
        if (i > 0 && !(c_grid[i] > c_grid[i - 1])) throw ParameterError("c grid must be strictly ascending");
    }
}

inline double median_of(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double hi = v[mid];
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Steps 1-3: spectra over the c grid, spectral distances, neighbourhood counts,
/// and the largest index among maximisers of |S(i)|.
inline BandwidthReport select_global_scale_from_dists(std::span<const Matrix> sq_dists,
                                                      const Vector& h,
                                                      const std::vector<double>& c_grid,
                                                      const GlobalScaleOptions& opts = {}) {
    detail::check_grid(c_grid);
    if (sq_dists.size() < 2) throw ShapeError("need at least two views");
    if (static_cast<std::size_t>(h.size()) != sq_dists.size()) throw ShapeError("one view scale per view");
    for (Index l = 0; l < h.size(); ++l)
        if (!(h(l) > 0.0)) throw ParameterError("view scales must be positive");
    if (opts.delta && !(*opts.delta > 0.0)) throw ParameterError("delta must be positive");

    const Index n = sq_dists.front().rows();
    const Index nK = n * static_cast<Index>(sq_dists.size());
    const Index top_n = opts.top_n > 0 ? opts.top_n : n;
    if (top_n > nK) throw ParameterError("top_n exceeds the transition matrix size");

    const std::size_t N = c_grid.size();
    const std::size_t K = sq_dists.size();
    BandwidthReport rep;
    rep.h = h;
    rep.c_grid = c_grid;
    rep.top_n = top_n;
    rep.effective_neighbours = Matrix::Zero(static_cast<Index>(N), static_cast<Index>(K));
    rep.admissible.assign(N, true);

    auto grid_kernels = [&](std::size_t i) {
        try {
            KernelSpec spec;
            spec.kinds = opts.kinds;
            spec.bandwidths.resize(K);
            for (std::size_t l = 0; l < K; ++l) spec.bandwidths[l] = c_grid[i] * h(static_cast<Index>(l));
            return view_kernels(sq_dists, spec);
        } catch (const Error& e) {
            throw GridPointError(c_grid[i], e.what());
        }
    };
    auto grid_spectrum = [&](std::size_t i, const std::vector<Matrix>& ks) -> Vector {
        try {
            return transition_eigenvalues(block_affinity(ks)).head(top_n);
        } catch (const Error& e) {
            throw GridPointError(c_grid[i], e.what());
        }
    };

    std::vector<Vector> spectra(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto ks = grid_kernels(i);
        for (std::size_t l = 0; l < K; ++l) {
            const double k0 = (opts.kinds.size() == 1 ? opts.kinds.front() : opts.kinds.at(l)).eval_unchecked(0.0);
            const double mass = (ks[l].sum() - ks[l].diagonal().sum()) / (k0 * static_cast<double>(n));
            rep.effective_neighbours(static_cast<Index>(i), static_cast<Index>(l)) = mass;
            if (mass < opts.min_effective_neighbours) rep.admissible[i] = false;
        }
        if (rep.admissible[i]) spectra[i] = grid_spectrum(i, ks);
    }
    if (std::none_of(rep.admissible.begin(), rep.admissible.end(), [](bool b) { return b; })) {
        rep.admissible.assign(N, true);
        rep.admissibility_fallback = true;
        for (std::size_t i = 0; i < N; ++i) spectra[i] = grid_spectrum(i, grid_kernels(i));
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.spectral_dist = Matrix::Constant(static_cast<Index>(N), static_cast<Index>(N), nan);
    std::vector<double> upper;
    for (std::size_t i = 0; i < N; ++i) {
        if (!rep.admissible[i]) continue;
        rep.spectral_dist(static_cast<Index>(i), static_cast<Index>(i)) = 0.0;
        for (std::size_t j = i + 1; j < N; ++j) {
            if (!rep.admissible[j]) continue;
            const double d = spectral_distance(spectra[i], spectra[j], top_n);
            rep.spectral_dist(static_cast<Index>(i), static_cast<Index>(j)) = d;
            rep.spectral_dist(static_cast<Index>(j), static_cast<Index>(i)) = d;
            upper.push_back(d);
        }
    }

    if (opts.delta) {
        rep.delta = *opts.delta;
    } else {
        rep.delta_auto = true;
        rep.delta = upper.empty() ? 0.0 : kAutoDeltaFraction * detail::median_of(upper);
        // identical spectra must still count as neighbours
        if (!(rep.delta > 0.0)) rep.delta = std::numeric_limits<double>::min();
    }

    // inadmissible points get |S| = -1 so they can never be the maximiser
    rep.S_sizes.assign(N, -1);
    for (std::size_t i = 0; i < N; ++i) {
        if (!rep.admissible[i]) continue;
        rep.S_sizes[i] = 0;
        for (std::size_t j = 0; j < N; ++j)
            if (j != i && rep.admissible[j] && rep.spectral_dist(static_cast<Index>(i), static_cast<Index>(j)) < rep.delta)
                ++rep.S_sizes[i];
    }

    const int best = *std::max_element(rep.S_sizes.begin(), rep.S_sizes.end());
    std::size_t alpha = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (rep.S_sizes[i] == best) alpha = i;
    rep.c_star_index = static_cast<Index>(alpha);
    rep.c_star = c_grid[alpha];
    rep.epsilon = rep.c_star * h;
    return rep;
}

inline BandwidthReport select_global_scale(const MultiviewDataset& data, const Vector& h,
                                           const std::vector<double>& c_grid,
                                           const GlobalScaleOptions& opts = {}) {
    data.validate();
    std::vector<Matrix> d;
    for (const auto& v : data.views) d.push_back(pairwise_sq_dists(v.points));
    return select_global_scale_from_dists(d, h, c_grid, opts);
}

// ============================================================
// Automated tuning: embedding dimension and percentiles
// ============================================================

struct TuningReport {
    int m_selected = 1;
    std::vector<double> eigen_ratios;  ///< eta_i / eta_{i+1}, i = 2 .. floor(sqrt(nK))
    double e_threshold = 0.0;          ///< half-gap e; a ratio qualifies when >= 1 + e
    bool fallback = false;             ///< too few positive eigenvalues, m defaulted to 1
    std::vector<double> omega_selected;
    std::vector<std::vector<int>> k_counts;  ///< per view, per percentile candidate
};

/// First-gap elbow on the eigen-ratios of the transition spectrum (descending eigenvalues).
inline TuningReport auto_embedding_dim(const Vector& eigenvalues) {
    TuningReport rep;
    const Index N = eigenvalues.size();
    const auto upper = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(N))));
    // 1-based index i -> eigenvalues(i - 1)
    for (Index i = 2; i <= upper && i + 1 <= N; ++i) {
        const double a = eigenvalues(i - 1), b = eigenvalues(i);
        if (!(a > 0.0) || !(b > 0.0)) break;
        rep.eigen_ratios.push_back(a / b);
    }
    if (rep.eigen_ratios.empty()) {
        rep.fallback = true;
        rep.m_selected = 1;
        return rep;
    }
    const auto max_it = std::max_element(rep.eigen_ratios.begin(), rep.eigen_ratios.end());
    rep.e_threshold = 0.5 * (*max_it - 1.0);
    const double thr = 1.0 + rep.e_threshold;
    std::size_t pick = static_cast<std::size_t>(max_it - rep.eigen_ratios.begin());
    for (std::size_t k = 0; k < rep.eigen_ratios.size(); ++k) {
        if (rep.eigen_ratios[k] >= thr) {
            pick = k;
            break;
        }
    }
    // ratio index k corresponds to 1-based i = k + 2, and m = i - 1
    rep.m_selected = static_cast<int>(pick) + 1;
    if (rep.m_selected >= N) rep.m_selected = static_cast<int>(N) - 1;
    return rep;
}

inline TuningReport auto_embedding_dim(const TransitionSpectrum& spec) {
    return auto_embedding_dim(spec.eigenvalues);
}

struct PercentileChoice {
    double omega = 0.5;
    std::vector<int> k_counts;
    std::vector<double> s_used;
};

/// Signal count k(omega): the largest k <= floor(sqrt(n)) with lambda_k / lambda_{k+1} >= 1 + s.
inline int signal_count(const Vector& desc_eigs, std::optional<double> s_threshold, double* s_out = nullptr) {
    const Index n = desc_eigs.size();
    const auto upper = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<double> ratios;
    for (Index k = 1; k <= upper && k + 1 <= n; ++k) {
        const double a = desc_eigs(k - 1), b = desc_eigs(k);
        if (!(a > 0.0) || !(b > 0.0)) break;
        ratios.push_back(a / b);
    }
    if (ratios.empty()) {
        if (s_out) *s_out = 0.0;
        return 0;
    }
    const double s = s_threshold ? *s_threshold
                                 : 0.5 * (*std::max_element(ratios.begin(), ratios.end()) - 1.0);
    if (s_out) *s_out = s;
    int count = 0;
    for (std::size_t k = 0; k < ratios.size(); ++k)
        if (ratios[k] >= 1.0 + s) count = static_cast<int>(k) + 1;
    return count;
}

inline PercentileChoice auto_percentile_from_dists(const Matrix& sq_dists,
                                                   const std::vector<double>& candidates,
                                                   const Kernel& kernel = Kernel::gaussian(),
                                                   std::optional<double> s_threshold = std::nullopt) {
    if (candidates.empty()) throw ParameterError("need at least one percentile candidate");
    PercentileChoice out;
    int best = -1;
    for (double w : candidates) {
        const double h = ecdf_quantile_scale_from_dists(sq_dists, w);
        const Matrix K = kernel_from_sq_dists(sq_dists, kernel, h);
        Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericError("kernel eigensolver did not converge");
        double s = 0.0;
        const int k = signal_count(es.eigenvalues().reverse(), s_threshold, &s);
        out.k_counts.push_back(k);
        out.s_used.push_back(s);
        if (k > best || (k == best && w > out.omega)) {
            best = k;
            out.omega = w;
        }
    }
    return out;
}

inline PercentileChoice auto_percentile(const ViewData& view, const std::vector<double>& candidates,
                                        const Kernel& kernel = Kernel::gaussian(),
                                        std::optional<double> s_threshold = std::nullopt) {
    return auto_percentile_from_dists(pairwise_sq_dists(view), candidates, kernel, s_threshold);
}

// ============================================================
// Full two-stage selection
// ============================================================

struct OmegaSetting {
    bool automatic = false;
    std::vector<double> values{0.5};  ///< one shared value or one per view
    std::vector<double> candidates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    static OmegaSetting fixed(std::vector<double> v) { return {false, std::move(v), {}}; }
    static OmegaSetting autoselect(std::vector<double> c) { return {true, {}, std::move(c)}; }
};

struct BandwidthConfig {
    OmegaSetting omega;
    CGrid grid;
    std::optional<std::vector<double>> explicit_grid;  ///< overrides `grid` when set
    std::optional<double> delta;
    Index top_n = 0;
    std::vector<Kernel> kinds{Kernel::gaussian()};
    std::optional<double> s_threshold;
    double min_effective_neighbours = 1.0;
};

struct BandwidthSelection {
    BandwidthReport report;
    TuningReport tuning;  // only the percentile fields are filled here
};

inline BandwidthSelection select_bandwidths(const MultiviewDataset& data, const BandwidthConfig& cfg = {}) {
    data.validate();
    const std::size_t K = data.views.size();
    std::vector<Matrix> d;
    d.reserve(K);
    for (const auto& v : data.views) d.push_back(pairwise_sq_dists(v.points));

    BandwidthSelection out;
    std::vector<double> omega(K);
    if (cfg.omega.automatic) {
        for (std::size_t l = 0; l < K; ++l) {
            const Kernel& kern = cfg.kinds.size() == 1 ? cfg.kinds.front() : cfg.kinds.at(l);
            auto pc = auto_percentile_from_dists(d[l], cfg.omega.candidates, kern, cfg.s_threshold);
            omega[l] = pc.omega;
            out.tuning.k_counts.push_back(std::move(pc.k_counts));
        }
    } else {
        const auto& v = cfg.omega.values;
        if (v.size() != 1 && v.size() != K) throw ParameterError("omega must be shared or given per view");
        for (std::size_t l = 0; l < K; ++l) omega[l] = v.size() == 1 ? v.front() : v[l];
    }
    out.tuning.omega_selected = omega;

    Vector h(static_cast<Index>(K));
    for (std::size_t l = 0; l < K; ++l) h(static_cast<Index>(l)) = ecdf_quantile_scale_from_dists(d[l], omega[l]);

    GlobalScaleOptions gopts;
    gopts.delta = cfg.delta;
    gopts.top_n = cfg.top_n;
    gopts.kinds = cfg.kinds;
    gopts.min_effective_neighbours = cfg.min_effective_neighbours;
    const auto grid = cfg.explicit_grid ? *cfg.explicit_grid : cfg.grid.values();
    out.report = select_global_scale_from_dists(d, h, grid, gopts);
    out.report.omega = omega;
    return out;
}

}  // namespace grab
