#pragma once

#include "grab/bandwidth.hpp"
#include "grab/core.hpp"
#include "grab/io.hpp"
#include "grab/kernel.hpp"
#include "grab/metrics.hpp"
#include "grab/sketch.hpp"
#include "grab/spectral.hpp"
#include "grab/synthetic.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace grab {

// ============================================================
// Single-dataset pipeline
// ============================================================

struct PipelineOptions {
    BandwidthConfig bandwidth;
    bool zscore = false;
    std::vector<Index> sketch;  ///< empty: no sketching; one shared or one per view
    std::optional<int> m;       ///< empty: eigen-ratio elbow
    double t = 1.0;
    EmbeddingMode mode = EmbeddingMode::averaged();
};

struct PipelineResult {
    BandwidthSelection bandwidth;
    TransitionSpectrum spectrum;
    TuningReport tuning;
    EmbeddingSet q;
    Matrix embedding;  ///< n rows under the requested mode
    ZScoreReport zscore;
    int m_used = 0;
};

/// normalise -> sketch -> select bandwidths -> transition spectrum -> m -> embedding
inline PipelineResult run_pipeline(const MultiviewDataset& input, const PipelineOptions& opts) {
    input.validate();
    PipelineResult r;
    MultiviewDataset data = opts.zscore ? zscore_normalize(input, &r.zscore) : input;
    if (!opts.sketch.empty()) data = sketch_dataset(data, opts.sketch);

    r.bandwidth = select_bandwidths(data, opts.bandwidth);
    KernelSpec ks;
    ks.kinds = opts.bandwidth.kinds;
    ks.bandwidths.assign(r.bandwidth.report.epsilon.data(),
                         r.bandwidth.report.epsilon.data() + r.bandwidth.report.epsilon.size());
    r.spectrum = decompose(build_affinity(data, ks));

    r.tuning = auto_embedding_dim(r.spectrum);
    r.tuning.omega_selected = r.bandwidth.tuning.omega_selected;
    r.tuning.k_counts = r.bandwidth.tuning.k_counts;
    r.m_used = opts.m ? *opts.m : r.tuning.m_selected;
    r.q = build_Q(r.spectrum, r.m_used, opts.t);
    r.embedding = embed_all(r.q, opts.mode);
    return r;
}

// ============================================================
// Experiment configuration
// ============================================================

enum class Scenario { cluster_setup1, cluster_setup2, manifold_a, manifold_b, robustness_sweep, bias_test };

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::cluster_setup1: return "cluster_setup1";
        case Scenario::cluster_setup2: return "cluster_setup2";
        case Scenario::manifold_a: return "manifold_a";
        case Scenario::manifold_b: return "manifold_b";
        case Scenario::robustness_sweep: return "robustness_sweep";
        case Scenario::bias_test: return "bias_test";
    }
    return "?";
}

inline Scenario parse_scenario(const std::string& s) {
    for (auto v : {Scenario::cluster_setup1, Scenario::cluster_setup2, Scenario::manifold_a, Scenario::manifold_b,
                   Scenario::robustness_sweep, Scenario::bias_test})
        if (s == scenario_name(v)) return v;
    throw ConfigError("unknown scenario: " + s);
}

inline bool is_cluster(Scenario s) { return s == Scenario::cluster_setup1 || s == Scenario::cluster_setup2; }
inline bool is_manifold(Scenario s) { return s == Scenario::manifold_a || s == Scenario::manifold_b; }

inline std::vector<double> default_noise(Scenario s) {
    switch (s) {
        case Scenario::cluster_setup1: return {0.3, 0.1, 0.3};
        case Scenario::cluster_setup2: return {0.5, 0.0, 0.3};
        case Scenario::manifold_a: return {0.05, 0.2};
        case Scenario::manifold_b: return {0.05, 0.1};
        default: return {};
    }
}

inline std::string mode_name(const EmbeddingMode& m) {
    switch (m.kind) {
        case EmbeddingMode::Kind::view: return "view:" + std::to_string(m.view + 1);
        case EmbeddingMode::Kind::joint: return "joint";
        case EmbeddingMode::Kind::averaged: return "averaged";
    }
    return "?";
}

/// "averaged", "joint" or "view:<l>" with a one-based view number.
inline EmbeddingMode parse_mode(const std::string& s) {
    if (s == "averaged") return EmbeddingMode::averaged();
    if (s == "joint") return EmbeddingMode::joint();
    if (s.rfind("view:", 0) == 0) {
        const int l = std::atoi(s.c_str() + 5);
        if (l < 1) throw ConfigError("view numbers start at 1: " + s);
        return EmbeddingMode::of_view(l - 1);
    }
    throw ConfigError("unknown embedding mode: " + s);
}

struct ExperimentConfig {
    Scenario scenario = Scenario::cluster_setup1;
    std::vector<double> noise;  ///< empty: scenario default
    Index n = 600;              ///< total samples (3 x per-cluster size for clustering)
    Index block_dim = 10;
    Index p = 100;
    int replications = 100;
    std::uint64_t master_seed = 0;
    EmbeddingMode mode = EmbeddingMode::averaged();
    std::optional<int> m;  ///< empty: scenario default (1 clustering, 3 manifold)
    bool auto_m = false;
    double t = 1.0;
    std::vector<Index> sketch;
    BandwidthConfig bandwidth;
    bool zscore = false;
    int kmeans_restarts = 20;
    int trust_k = 5;
    double failure_budget = 0.01;
    int workers = 1;
    std::string output;

    std::vector<double> resolved_noise() const { return noise.empty() ? default_noise(scenario) : noise; }

    std::optional<int> resolved_m() const {
        if (auto_m) return std::nullopt;
        if (m) return m;
        return is_manifold(scenario) ? 3 : 1;
    }

    void validate() const {
        if (replications < 1) throw ConfigError("replications must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (!(failure_budget >= 0.0 && failure_budget <= 1.0)) throw ConfigError("failure budget must lie in [0, 1]");
        if (m && *m < 1) throw ConfigError("m must be >= 1");
        if (!(t >= 0.0)) throw ConfigError("t must be >= 0");
        const auto nz = resolved_noise();
        for (double v : nz)
            if (!(v >= 0.0)) throw ConfigError("noise variances must be nonnegative");
        if (is_cluster(scenario)) {
            if (nz.size() != 3) throw ConfigError("clustering scenarios take three noise variances");
            if (n < 3 || n % 3 != 0) throw ConfigError("clustering n must be a positive multiple of 3");
            if (p < block_dim) throw ConfigError("p must be at least the block dimension");
        }
        if (is_manifold(scenario)) {
            if (nz.size() != 2) throw ConfigError("manifold scenarios take two noise variances");
            if (scenario == Scenario::manifold_b && n % 3 != 0) throw ConfigError("manifold_b needs n divisible by 3");
            if (p < 3) throw ConfigError("manifold scenarios need p >= 3");
        }
    }
};

namespace detail {

inline std::vector<double> json_number_list(const io::json& v, const char* key) {
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(std::string(key) + ": expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    if (v.is_string()) {
        for (const auto& cell : io::split(v.get<std::string>())) {
            double d = 0.0;
            if (!io::parse_double(cell, d)) throw ConfigError(std::string(key) + ": cannot parse '" + cell + "'");
            out.push_back(d);
        }
        return out;
    }
    throw ConfigError(std::string(key) + ": expected a number or a list");
}

inline double json_number(const io::json& v, const char* key) {
    const auto l = json_number_list(v, key);
    if (l.size() != 1) throw ConfigError(std::string(key) + ": expected a single number");
    return l.front();
}

inline Index json_index(const io::json& v, const char* key) {
    const double d = json_number(v, key);
    if (d != std::floor(d)) throw ConfigError(std::string(key) + ": expected an integer");
    return static_cast<Index>(d);
}

inline bool json_bool(const io::json& v, const char* key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number()) return v.get<double>() != 0.0;
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
    }
    throw ConfigError(std::string(key) + ": expected a boolean");
}

inline std::string json_string(const io::json& v, const char* key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return io::format_double(v.get<double>());
    throw ConfigError(std::string(key) + ": expected a string");
}

}  // namespace detail

/// Overlay the keys present in `j` onto `cfg`; unknown keys are rejected.
inline void apply_config(const io::json& j, ExperimentConfig& cfg) {
    if (!j.is_object()) throw ConfigError("config must be an object");
    for (const auto& [key, v] : j.items()) {
        const char* k = key.c_str();
        if (key == "scenario") cfg.scenario = parse_scenario(detail::json_string(v, k));
        else if (key == "noise") cfg.noise = detail::json_number_list(v, k);
        else if (key == "n") cfg.n = detail::json_index(v, k);
        else if (key == "block_dim") cfg.block_dim = detail::json_index(v, k);
        else if (key == "p") cfg.p = detail::json_index(v, k);
        else if (key == "replications") cfg.replications = static_cast<int>(detail::json_index(v, k));
        else if (key == "seed") cfg.master_seed = static_cast<std::uint64_t>(detail::json_index(v, k));
        else if (key == "mode") cfg.mode = parse_mode(detail::json_string(v, k));
        else if (key == "m") {
            if (v.is_string() && v.get<std::string>() == "auto") {
                cfg.auto_m = true;
                cfg.m.reset();
            } else {
                cfg.auto_m = false;
                cfg.m = static_cast<int>(detail::json_index(v, k));
            }
        } else if (key == "t") cfg.t = detail::json_number(v, k);
        else if (key == "sketch") {
            cfg.sketch.clear();
            if (!(v.is_string() && (v.get<std::string>().empty() || v.get<std::string>() == "none")))
                for (double d : detail::json_number_list(v, k)) cfg.sketch.push_back(static_cast<Index>(d));
        } else if (key == "omega") {
            if (v.is_string() && v.get<std::string>() == "auto")
                cfg.bandwidth.omega = OmegaSetting::autoselect(OmegaSetting{}.candidates);
            else
                cfg.bandwidth.omega = OmegaSetting::fixed(detail::json_number_list(v, k));
        } else if (key == "omega_candidates") {
            cfg.bandwidth.omega.candidates = detail::json_number_list(v, k);
        } else if (key == "c_lo") cfg.bandwidth.grid.lo = detail::json_number(v, k);
        else if (key == "c_hi") cfg.bandwidth.grid.hi = detail::json_number(v, k);
        else if (key == "c_count") cfg.bandwidth.grid.count = static_cast<int>(detail::json_index(v, k));
        else if (key == "c_grid") cfg.bandwidth.explicit_grid = detail::json_number_list(v, k);
        else if (key == "delta") {
            if (v.is_string() && v.get<std::string>() == "auto") cfg.bandwidth.delta.reset();
            else cfg.bandwidth.delta = detail::json_number(v, k);
        } else if (key == "top_n") cfg.bandwidth.top_n = detail::json_index(v, k);
        else if (key == "min_neighbours") cfg.bandwidth.min_effective_neighbours = detail::json_number(v, k);
        else if (key == "kernel") {
            const auto s = detail::json_string(v, k);
            if (s == "gaussian") cfg.bandwidth.kinds = {Kernel::gaussian()};
            else if (s.rfind("polynomial:", 0) == 0) cfg.bandwidth.kinds = {Kernel::polynomial_decay(std::atof(s.c_str() + 11))};
            else throw ConfigError("unknown kernel: " + s);
        } else if (key == "zscore") cfg.zscore = detail::json_bool(v, k);
        else if (key == "kmeans_restarts") cfg.kmeans_restarts = static_cast<int>(detail::json_index(v, k));
        else if (key == "trust_k") cfg.trust_k = static_cast<int>(detail::json_index(v, k));
        else if (key == "failure_budget") cfg.failure_budget = detail::json_number(v, k);
        else if (key == "workers") cfg.workers = static_cast<int>(detail::json_index(v, k));
        else if (key == "output") cfg.output = detail::json_string(v, k);
        else throw ConfigError("unknown config key: " + key);
    }
}

inline io::json to_json(const ExperimentConfig& c) {
    io::json j;
    j["scenario"] = scenario_name(c.scenario);
    j["noise"] = c.resolved_noise();
    j["n"] = c.n;
    j["block_dim"] = c.block_dim;
    j["p"] = c.p;
    j["replications"] = c.replications;
    j["seed"] = c.master_seed;
    j["mode"] = mode_name(c.mode);
    if (auto m = c.resolved_m()) j["m"] = *m;
    else j["m"] = "auto";
    j["t"] = c.t;
    j["sketch"] = c.sketch;
    if (c.bandwidth.omega.automatic) {
        j["omega"] = "auto";
        j["omega_candidates"] = c.bandwidth.omega.candidates;
    } else {
        j["omega"] = c.bandwidth.omega.values;
    }
    j["c_grid"] = c.bandwidth.explicit_grid ? *c.bandwidth.explicit_grid : c.bandwidth.grid.values();
    if (c.bandwidth.delta) j["delta"] = *c.bandwidth.delta;
    else j["delta"] = "auto";
    j["top_n"] = c.bandwidth.top_n;
    j["min_neighbours"] = c.bandwidth.min_effective_neighbours;
    const auto& k0 = c.bandwidth.kinds.front();
    j["kernel"] = k0.kind == KernelKind::gaussian ? std::string("gaussian")
                                                  : "polynomial:" + io::format_double(k0.beta);
    j["zscore"] = c.zscore;
    j["kmeans_restarts"] = c.kmeans_restarts;
    j["trust_k"] = c.trust_k;
    j["failure_budget"] = c.failure_budget;
    if (is_manifold(c.scenario)) {
        j["swiss_roll"] = {{"t_range", {manifold_params::roll_t_lo, manifold_params::roll_t_hi}},
                           {"height", manifold_params::roll_height}};
        j["s_curve"] = {{"t_range", {-manifold_params::scurve_t_half, manifold_params::scurve_t_half}},
                        {"height", manifold_params::scurve_height}};
    }
    return j;
}

// ============================================================
// Replicated benchmarks
// ============================================================

struct MetricRow {
    int replication = 0;
    std::uint64_t seed = 0;
    std::string method = "grab_mdm";
    bool ok = true;
    std::string error;
    int m_used = 0;
    double c_star = 0.0;
    std::vector<double> values;  ///< aligned with ExperimentResult::metric_names
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string label;
    std::vector<std::string> metric_names;
    std::vector<MetricRow> rows;
    std::vector<MetricSummary> summary;  ///< per metric over successful rows
    int failures = 0;
    double wall_time = 0.0;  ///< seconds; reported, never written to output files

    double failure_rate() const { return rows.empty() ? 0.0 : static_cast<double>(failures) / static_cast<double>(rows.size()); }
};

inline std::uint64_t replication_seed(std::uint64_t master, int r) {
    return derive_seed(master, 0x7265706cULL, static_cast<std::uint64_t>(r));
}

/// Mean and sample standard deviation (n - 1; zero for a single value).
inline MetricSummary summarize(const std::vector<double>& v) {
    MetricSummary s;
    if (v.empty()) {
        s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

inline void aggregate(ExperimentResult& res) {
    res.failures = 0;
    res.summary.assign(res.metric_names.size(), {});
    std::vector<std::vector<double>> cols(res.metric_names.size());
    for (const auto& r : res.rows) {
        if (!r.ok) {
            ++res.failures;
            continue;
        }
        for (std::size_t k = 0; k < cols.size(); ++k) cols[k].push_back(r.values.at(k));
    }
    for (std::size_t k = 0; k < cols.size(); ++k) res.summary[k] = summarize(cols[k]);
}

/// Runs body(r) for r = 0 .. R-1 on `workers` threads; results land at index r.
template <class Row>
std::vector<Row> run_ordered(int R, int workers, const std::function<Row(int)>& body) {
    std::vector<Row> rows(static_cast<std::size_t>(R));
    std::atomic<int> next{0};
    auto work = [&]() {
        for (int r = next++; r < R; r = next++) rows[static_cast<std::size_t>(r)] = body(r);
    };
    const int w = std::max(1, std::min(workers, R));
    if (w == 1) {
        work();
        return rows;
    }
    std::vector<std::thread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return rows;
}

inline std::string noise_label(const std::vector<double>& noise) {
    std::string s = "(";
    for (std::size_t i = 0; i < noise.size(); ++i) s += (i ? ", " : "") + io::format_double(noise[i]);
    return s + ")";
}

inline PipelineOptions pipeline_options(const ExperimentConfig& cfg) {
    PipelineOptions po;
    po.bandwidth = cfg.bandwidth;
    po.zscore = cfg.zscore;
    po.sketch = cfg.sketch;
    po.m = cfg.resolved_m();
    po.t = cfg.t;
    po.mode = cfg.mode;
    return po;
}

inline LabeledMultiview generate(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto nz = cfg.resolved_noise();
    if (is_cluster(cfg.scenario)) {
        ClusterGenSpec g;
        g.setup = cfg.scenario == Scenario::cluster_setup1 ? ClusterSetup::uniform_boxes : ClusterSetup::trunc_gaussian;
        g.n_per_cluster = cfg.n / 3;
        g.block_dim = cfg.block_dim;
        g.p = {cfg.p, cfg.p, cfg.p};
        g.noise_vars = {nz[0], nz[1], nz[2]};
        g.seed = seed;
        return gen_clusters(g);
    }
    if (is_manifold(cfg.scenario)) {
        ManifoldGenSpec g;
        g.setup = cfg.scenario == Scenario::manifold_a ? ManifoldSetup::swiss_roll_a : ManifoldSetup::mixed_b;
        g.n = cfg.n;
        g.p = cfg.p;
        g.noise_vars = {nz[0], nz[1]};
        g.seed = seed;
        return gen_manifolds(g);
    }
    throw ConfigError(std::string("scenario has no dataset generator: ") + scenario_name(cfg.scenario));
}

inline ExperimentResult run_bench(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool cluster = is_cluster(cfg.scenario);
    if (!cluster && !is_manifold(cfg.scenario)) throw ConfigError("benchmarks need a clustering or manifold scenario");
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentResult res;
    res.config = cfg;
    res.label = std::string(scenario_name(cfg.scenario)) + " " + noise_label(cfg.resolved_noise());
    res.metric_names = cluster ? std::vector<std::string>{"ACC", "RI"} : std::vector<std::string>{"T"};
    const PipelineOptions po = pipeline_options(cfg);

    res.rows = run_ordered<MetricRow>(cfg.replications, cfg.workers, [&](int r) {
        MetricRow row;
        row.replication = r;
        row.seed = replication_seed(cfg.master_seed, r);
        try {
            const auto data = generate(cfg, row.seed);
            const auto pr = run_pipeline(data.data, po);
            row.m_used = pr.m_used;
            row.c_star = pr.bandwidth.report.c_star;
            if (cluster) {
                KMeansOptions ko;
                ko.restarts = cfg.kmeans_restarts;
                const auto km = kmeans(pr.embedding, 3, row.seed, ko);
                row.values = {clustering_accuracy(km.assignments, data.labels), rand_index(km.assignments, data.labels)};
            } else {
                row.values = {trustworthiness(pr.embedding, data.clean_reference, cfg.trust_k)};
            }
        } catch (const Error& e) {
            row.ok = false;
            row.error = e.what();
            row.values.assign(cluster ? 2 : 1, std::numeric_limits<double>::quiet_NaN());
        }
        return row;
    });
    aggregate(res);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline ExperimentResult run_cluster_bench(const ExperimentConfig& cfg) {
    if (!is_cluster(cfg.scenario)) throw ConfigError("run_cluster_bench needs a clustering scenario");
    return run_bench(cfg);
}

inline ExperimentResult run_manifold_bench(const ExperimentConfig& cfg) {
    if (!is_manifold(cfg.scenario)) throw ConfigError("run_manifold_bench needs a manifold scenario");
    return run_bench(cfg);
}

// ============================================================
// Output
// ============================================================

inline std::string format_cell(const MetricSummary& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f (%.2f)", s.mean, s.sd);
    return buf;
}

/// Per-replication rows: scenario, seed, method, metrics...
inline std::string rows_csv(const ExperimentResult& res) {
    std::string out = "scenario,replication,seed,method,ok,m,c_star";
    for (const auto& m : res.metric_names) out += "," + m;
    out += ",error\n";
    for (const auto& r : res.rows) {
        out += std::string(scenario_name(res.config.scenario)) + "," + std::to_string(r.replication) + "," +
               std::to_string(r.seed) + "," + r.method + "," + (r.ok ? "1" : "0") + "," + std::to_string(r.m_used) +
               "," + io::format_double(r.c_star);
        for (double v : r.values) out += "," + io::format_double(v);
        std::string err = r.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        out += "," + err + "\n";
    }
    return out;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct Table {
    std::string csv;
    std::string text;
};

/// Rows = scenarios, columns = metrics; CSV carries full precision, text carries "mean (sd)".
inline Table emit_table(const std::vector<ExperimentResult>& results) {
    Table t;
    t.csv = "scenario,metric,mean,sd,n_ok,n_failed\n";
    std::size_t w = 8;
    for (const auto& r : results) w = std::max(w, r.label.size());
    for (const auto& r : results) {
        const int n_ok = static_cast<int>(r.rows.size()) - r.failures;
        std::string line = r.label + std::string(w - r.label.size() + 2, ' ');
        for (std::size_t k = 0; k < r.metric_names.size(); ++k) {
            t.csv += csv_quote(r.label) + "," + r.metric_names[k] + "," + io::format_double(r.summary[k].mean) + "," +
                     io::format_double(r.summary[k].sd) + "," + std::to_string(n_ok) + "," +
                     std::to_string(r.failures) + "\n";
            line += r.metric_names[k] + " " + format_cell(r.summary[k]) + "  ";
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        t.text += line + "\n";
    }
    return t;
}

struct ScreeFiles {
    std::string eigen_csv;   ///< index, eigenvalue, ratio (one-based index)
    std::string vector_csv;  ///< row, view, sample, value, average  (second eigenvector; all one-based)
};

inline ScreeFiles scree_csv(const TransitionSpectrum& spec) {
    ScreeFiles f;
    const Index N = spec.size();
    f.eigen_csv = "index,eigenvalue,ratio\n";
    for (Index i = 0; i < N; ++i) {
        f.eigen_csv += std::to_string(i + 1) + "," + io::format_double(spec.eigenvalues(i)) + ",";
        if (i + 1 < N) f.eigen_csv += io::format_double(spec.eigenvalues(i) / spec.eigenvalues(i + 1));
        f.eigen_csv += "\n";
    }
    f.vector_csv = "row,view,sample,value,average\n";
    if (N < 2) return f;
    const Vector u = spec.right_eigenvectors.col(1);
    for (Index l = 0; l < spec.num_views; ++l) {
        for (Index s = 0; s < spec.n; ++s) {
            double avg = 0.0;
            for (Index o = 0; o < spec.num_views; ++o) avg += u(s + o * spec.n);
            avg /= static_cast<double>(spec.num_views);
            f.vector_csv += std::to_string(s + l * spec.n + 1) + "," + std::to_string(l + 1) + "," + std::to_string(s + 1) +
                            "," + io::format_double(u(s + l * spec.n)) + "," + io::format_double(avg) + "\n";
        }
    }
    return f;
}

inline void emit_scree(const TransitionSpectrum& spec, const std::string& prefix) {
    const auto f = scree_csv(spec);
    io::write_text(prefix + "_eigen.csv", f.eigen_csv);
    io::write_text(prefix + "_vector.csv", f.vector_csv);
}

}  // namespace grab
