#pragma once

#include "grab/core.hpp"
#include "grab/kernel.hpp"
#include "grab/synthetic.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace grab {

// ============================================================
// Circle instance: views c_l (cos theta, sin theta)
// ============================================================

struct CircleInstance {
    Index n = 4000;
    double epsilon = 0.05;
    std::vector<double> dilations{1.0, 1.0};
    bool equispaced = true;  ///< theta_s = 2 pi s / n; otherwise iid uniform draws
    std::uint64_t seed = 0;
    Kernel kernel = Kernel::gaussian();

    Index num_views() const { return static_cast<Index>(dilations.size()); }

    void validate() const {
        if (n < 2) throw ParameterError("circle instance needs n >= 2");
        if (!(epsilon > 0.0)) throw ParameterError("bandwidth must be positive");
        if (dilations.size() < 2) throw ParameterError("need at least two views");
        for (double c : dilations)
            if (!(c > 0.0)) throw ParameterError("dilation factors must be positive");
    }

    Vector thetas() const {
        Vector th(n);
        if (equispaced) {
            for (Index s = 0; s < n; ++s) th(s) = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(n);
        } else {
            Rng rng(derive_seed(seed, stream::latent));
            for (Index s = 0; s < n; ++s) th(s) = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        }
        return th;
    }

    Matrix view_points(Index l, const Vector& th) const {
        Matrix x(n, 2);
        const double c = dilations.at(static_cast<std::size_t>(l));
        x.col(0) = c * th.array().cos();
        x.col(1) = c * th.array().sin();
        return x;
    }
};

/// Stack f(theta_s) once per view: the discretised function (f_1, ..., f_K).
inline Vector discretize(const CircleInstance& inst, const std::function<double(double)>& f) {
    const Vector th = inst.thetas();
    Vector out(inst.n * inst.num_views());
    for (Index l = 0; l < inst.num_views(); ++l)
        for (Index s = 0; s < inst.n; ++s) out(l * inst.n + s) = f(th(s));
    return out;
}

namespace detail {

/// K v without storing K (kernel entries rebuilt row by row).
inline Vector kernel_matvec(const Matrix& x, const Kernel& kernel, double eps, const Vector& v) {
    const Index n = x.rows();
    Vector out(n);
    for (Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < n; ++j) acc += kernel.eval_unchecked((x.row(i) - x.row(j)).squaredNorm() / eps) * v(j);
        out(i) = acc;
    }
    return out;
}

/// [K f]_l = sum_{o != l} K^l (K^o f_o), matrix free.
inline Vector block_affinity_apply(const std::vector<Matrix>& xs, const Kernel& kernel, double eps, const Vector& f) {
    const Index n = xs.front().rows();
    const auto K = static_cast<Index>(xs.size());
    std::vector<Vector> inner(xs.size());
    for (Index o = 0; o < K; ++o)
        inner[static_cast<std::size_t>(o)] = kernel_matvec(xs[static_cast<std::size_t>(o)], kernel, eps, f.segment(o * n, n));
    Vector out(n * K);
    for (Index l = 0; l < K; ++l) {
        Vector acc = Vector::Zero(n);
        for (Index o = 0; o < K; ++o)
            if (o != l) acc += inner[static_cast<std::size_t>(o)];
        out.segment(l * n, n) = kernel_matvec(xs[static_cast<std::size_t>(l)], kernel, eps, acc);
    }
    return out;
}

}  // namespace detail

/// Noise-free transition operator applied to f; never forms the nK x nK matrix.
inline Vector clean_operator_apply(const CircleInstance& inst, const Vector& f) {
    inst.validate();
    if (f.size() != inst.n * inst.num_views()) throw ShapeError("f must have length nK");
    const Vector th = inst.thetas();
    std::vector<Matrix> xs;
    for (Index l = 0; l < inst.num_views(); ++l) xs.push_back(inst.view_points(l, th));
    const Vector num = detail::block_affinity_apply(xs, inst.kernel, inst.epsilon, f);
    const Vector deg = detail::block_affinity_apply(xs, inst.kernel, inst.epsilon, Vector::Ones(f.size()));
    for (Index i = 0; i < deg.size(); ++i)
        if (!(deg(i) > 0.0)) throw DegeneracyError("zero degree in the clean operator");
    return num.cwiseQuotient(deg);
}

// ============================================================
// First-order bias: deviation linear in epsilon, profile proportional to the Laplacian
// ============================================================

struct BiasSlopeReport {
    std::vector<double> epsilons;
    std::vector<Vector> deviation;  ///< per epsilon, [A f] - f over all nK entries
    std::vector<double> rms;        ///< per epsilon
    Vector slope;                   ///< least-squares a(s) in deviation = a(s) eps
    double r_squared = 0.0;         ///< of the through-origin fit against mean-centred total variation
    double laplacian_correlation = 0.0;  ///< corr(a, Laplacian of f)
};

inline double pearson(const Vector& a, const Vector& b) {
    if (a.size() != b.size() || a.size() < 2) throw ShapeError("correlation needs equal-length vectors");
    const Vector ac = a.array() - a.mean(), bc = b.array() - b.mean();
    const double den = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
    return den > 0.0 ? ac.dot(bc) / den : 0.0;
}

/// `f` and `laplacian_f` are functions of theta on the unit circle (scaled by 1/c^2 on dilated views
/// is the caller's business; identical views are the intended use).
inline BiasSlopeReport bias_slope_test(const CircleInstance& base, const std::vector<double>& epsilons,
                                       const std::function<double(double)>& f,
                                       const std::function<double(double)>& laplacian_f) {
    if (epsilons.size() < 2) throw ParameterError("need at least two bandwidths");
    BiasSlopeReport rep;
    rep.epsilons = epsilons;
    const Vector fv = discretize(base, f);
    for (double eps : epsilons) {
        CircleInstance inst = base;
        inst.epsilon = eps;
        Vector dev = clean_operator_apply(inst, fv) - fv;
        rep.rms.push_back(std::sqrt(dev.squaredNorm() / static_cast<double>(dev.size())));
        rep.deviation.push_back(std::move(dev));
    }

    const Index N = fv.size();
    double ee = 0.0;
    for (double e : epsilons) ee += e * e;
    rep.slope = Vector::Zero(N);
    for (std::size_t g = 0; g < epsilons.size(); ++g) rep.slope += epsilons[g] * rep.deviation[g];
    rep.slope /= ee;

    double mean = 0.0;
    for (const auto& d : rep.deviation) mean += d.sum();
    mean /= static_cast<double>(N) * static_cast<double>(epsilons.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t g = 0; g < epsilons.size(); ++g) {
        ss_res += (rep.deviation[g] - epsilons[g] * rep.slope).squaredNorm();
        ss_tot += (rep.deviation[g].array() - mean).square().sum();
    }
    rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    rep.laplacian_correlation = pearson(rep.slope, discretize(base, laplacian_f));
    return rep;
}

// ============================================================
// Robustness of the transition operator to additive noise
// ============================================================

struct RobustnessPoint {
    double noise_var = 0.0;
    double snr = 0.0;   ///< per view 0 (views share p and spikes in the default scenario)
    double norm = 0.0;  ///< largest singular value of A_clean - A_noisy
};

struct RobustnessReport {
    std::vector<double> epsilon;  ///< per view, c * sum(lambda)
    std::vector<RobustnessPoint> points;
};

struct RobustnessOptions {
    double c = 1.0;  ///< global factor: eps_l = c * sum_i lambda_{l,i}
    Kernel kernel = Kernel::gaussian();
};

inline double spectral_norm(const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

namespace detail {

inline Matrix transition_from_views(const std::vector<ViewData>& views, const std::vector<double>& eps,
                                    const Kernel& kernel) {
    std::vector<Matrix> ks;
    for (std::size_t l = 0; l < views.size(); ++l) ks.push_back(view_kernel_matrix(views[l], kernel, eps[l]));
    return transition_matrix(block_affinity(ks));
}

}  // namespace detail

/// Same latent draw and same standard-normal noise at every level (common random numbers),
/// so the ladder differs only in the noise scale.
inline RobustnessReport robustness_sweep(const SpikedGenSpec& scenario, const std::vector<double>& noise_vars,
                                         const RobustnessOptions& opts = {}) {
    if (noise_vars.empty()) throw ParameterError("empty noise ladder");
    if (!(opts.c > 0.0)) throw ParameterError("global factor must be positive");
    RobustnessReport rep;
    for (const auto& s : scenario.spikes) {
        double sum = 0.0;
        for (double v : s) sum += v;
        if (!(sum > 0.0)) throw DegeneracyError("spiked model needs positive signal energy");
        rep.epsilon.push_back(opts.c * sum);
    }

    SpikedGenSpec clean_spec = scenario;
    std::fill(clean_spec.noise_vars.begin(), clean_spec.noise_vars.end(), 0.0);
    const auto clean = gen_spiked(clean_spec);
    const Matrix A_clean = detail::transition_from_views(clean.data.views, rep.epsilon, opts.kernel);
    const double energy = signal_energy(clean.clean_views.front());

    for (double s2 : noise_vars) {
        SpikedGenSpec spec = scenario;
        std::fill(spec.noise_vars.begin(), spec.noise_vars.end(), s2);
        const auto noisy = gen_spiked(spec);
        RobustnessPoint pt;
        pt.noise_var = s2;
        pt.snr = snr_from_energy(energy, s2, spec.p.front());
        pt.norm = spectral_norm(A_clean - detail::transition_from_views(noisy.data.views, rep.epsilon, opts.kernel));
        rep.points.push_back(pt);
    }
    return rep;
}

}  // namespace grab
