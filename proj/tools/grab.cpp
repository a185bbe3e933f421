// grab: command-line driver for data generation, bandwidth selection,
// embeddings, benchmarks and the numerical oracles.
//
// Every subcommand reads an optional config file (JSON or key = value),
// applies flag overrides on top, writes its outputs into --out and a
// manifest.json echoing the resolved configuration.

#include "grab/grab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

namespace fs = std::filesystem;
using namespace grab;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> sets;  // raw key=value overrides
    std::string out = ".";
    std::string scenario, noise, c_grid, delta, omega, sketch, m, mode;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications, workers;
    std::optional<Index> n, p;
    std::optional<bool> zscore;
    std::vector<std::string> views;  // input CSV files, one per view
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_views) {
    sub->add_option("-c,--config", o.config_file, "config file (JSON or key = value)");
    sub->add_option("--set", o.sets, "override one config key, key=value (repeatable)");
    sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--scenario", o.scenario, "cluster_setup1|cluster_setup2|manifold_a|manifold_b");
    sub->add_option("--noise", o.noise, "per-view noise variances, comma separated");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--replications", o.replications);
    sub->add_option("--workers", o.workers);
    sub->add_option("--n", o.n, "number of samples");
    sub->add_option("--p", o.p, "ambient dimension per view");
    sub->add_option("--c-grid", o.c_grid, "global scale grid lo:hi:N (log spaced) or v1,v2,...");
    sub->add_option("--delta", o.delta, "spectral-distance threshold, or auto");
    sub->add_option("--omega", o.omega, "percentile: auto or v1,v2,... (one shared or one per view)");
    sub->add_option("--sketch", o.sketch, "Haar sketch dimension(s) s1,s2,... or none");
    sub->add_option("--m", o.m, "embedding dimension or auto");
    sub->add_option("--mode", o.mode, "averaged|joint|view:L");
    sub->add_option("--zscore", o.zscore, "coordinate-wise z-score normalisation (true/false)");
    if (with_views)
        sub->add_option("--views", o.views, "view CSV files (comma separated or repeated); when absent the configured scenario is generated")
            ->delimiter(',');
}

ExperimentConfig resolve(const CommonOptions& o) {
    ExperimentConfig cfg;
    if (!o.config_file.empty()) apply_config(io::load_config_file(o.config_file), cfg);

    io::json ov = io::json::object();
    if (!o.scenario.empty()) ov["scenario"] = o.scenario;
    if (!o.noise.empty()) ov["noise"] = o.noise;
    if (o.seed) ov["seed"] = *o.seed;
    if (o.replications) ov["replications"] = *o.replications;
    if (o.workers) ov["workers"] = *o.workers;
    if (o.n) ov["n"] = *o.n;
    if (o.p) ov["p"] = *o.p;
    if (!o.delta.empty()) ov["delta"] = o.delta == "auto" ? io::json("auto") : io::json(o.delta);
    if (!o.omega.empty()) ov["omega"] = o.omega;
    if (!o.sketch.empty()) ov["sketch"] = o.sketch;
    if (!o.mode.empty()) ov["mode"] = o.mode;
    if (o.zscore) ov["zscore"] = *o.zscore;
    if (!o.m.empty()) {
        double v = 0.0;
        ov["m"] = io::parse_double(o.m, v) ? io::json(v) : io::json(o.m);
    }
    if (!o.c_grid.empty()) {
        const auto parts = io::split(o.c_grid, ':');
        if (parts.size() == 3) {
            double lo = 0, hi = 0, cnt = 0;
            if (!io::parse_double(parts[0], lo) || !io::parse_double(parts[1], hi) || !io::parse_double(parts[2], cnt))
                throw ConfigError("--c-grid expects lo:hi:N");
            ov["c_lo"] = lo;
            ov["c_hi"] = hi;
            ov["c_count"] = cnt;
        } else {
            ov["c_grid"] = o.c_grid;
        }
    }
    apply_config(ov, cfg);
    for (const auto& s : o.sets) apply_config(io::parse_config(s), cfg);
    cfg.validate();
    return cfg;
}

// ---- outputs ----------------------------------------------------------------

struct Run {
    fs::path dir;
    std::vector<std::string> outputs;

    explicit Run(const std::string& out) : dir(out) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& text) {
        io::write_text((dir / name).string(), text);
        outputs.push_back(name);
    }

    void manifest(const std::string& command, const ExperimentConfig& cfg, io::json extra = io::json::object()) {
        io::json j;
        j["command"] = command;
        j["config"] = to_json(cfg);
        if (!extra.empty()) j["parameters"] = std::move(extra);
        j["outputs"] = outputs;
        io::write_text((dir / "manifest.json").string(), j.dump(2) + "\n");
    }
};

MultiviewDataset load_or_generate(const CommonOptions& o, const ExperimentConfig& cfg) {
    if (o.views.empty()) return generate(cfg, cfg.master_seed).data;
    std::vector<Matrix> ms;
    for (const auto& f : o.views) ms.push_back(io::read_matrix_csv(f));
    auto ds = MultiviewDataset::from_matrices(std::move(ms));
    ds.validate();
    return ds;
}

std::vector<std::string> column_names(const char* stem, Index count) {
    std::vector<std::string> h;
    for (Index c = 0; c < count; ++c) h.push_back(stem + std::to_string(c + 1));
    return h;
}

// ---- subcommands ------------------------------------------------------------

int cmd_gen_data(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto d = generate(cfg, cfg.master_seed);
    Run run(o.out);
    for (std::size_t l = 0; l < d.data.views.size(); ++l) {
        const Matrix& x = d.data.views[l].points;
        run.write("view_" + std::to_string(l + 1) + ".csv", io::matrix_to_csv(x, column_names("x", x.cols())));
    }
    run.write("clean_reference.csv", io::matrix_to_csv(d.clean_reference, column_names("s", d.clean_reference.cols())));
    std::string labels = "label\n";
    for (int v : d.labels) labels += std::to_string(v + 1) + "\n";
    run.write("labels.csv", labels);
    run.manifest("gen-data", cfg);
    return exit_ok;
}

int cmd_select_bandwidth(const CommonOptions& o) {
    const auto cfg = resolve(o);
    MultiviewDataset data = load_or_generate(o, cfg);
    if (cfg.zscore) data = zscore_normalize(data);
    if (!cfg.sketch.empty()) data = sketch_dataset(data, cfg.sketch);
    const auto sel = select_bandwidths(data, cfg.bandwidth);
    io::json j;
    j["report"] = io::to_json(sel.report);
    j["tuning"] = io::to_json(sel.tuning);
    Run run(o.out);
    run.write("bandwidth.json", j.dump(2) + "\n");
    run.manifest("select-bandwidth", cfg, {{"views", o.views}});
    std::cout << "c* = " << io::format_double(sel.report.c_star) << "  epsilon = [";
    for (Index l = 0; l < sel.report.epsilon.size(); ++l)
        std::cout << (l ? ", " : "") << io::format_double(sel.report.epsilon(l));
    std::cout << "]\n";
    return exit_ok;
}

int cmd_embed(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto data = load_or_generate(o, cfg);
    const auto r = run_pipeline(data, pipeline_options(cfg));
    Run run(o.out);
    run.write("embedding.csv", io::matrix_to_csv(r.embedding, column_names("phi", r.embedding.cols())));
    io::json j;
    j["m"] = r.m_used;
    j["bandwidth"] = io::to_json(r.bandwidth.report);
    j["tuning"] = io::to_json(r.tuning);
    j["eigenvalues"] = io::to_json(Vector(r.spectrum.eigenvalues.head(std::min<Index>(r.spectrum.size(), 50))));
    run.write("embedding.json", j.dump(2) + "\n");
    run.manifest("embed", cfg, {{"views", o.views}});
    return exit_ok;
}

int cmd_bench(const CommonOptions& o, bool cluster) {
    auto cfg = resolve(o);
    if (cluster != is_cluster(cfg.scenario))
        throw ConfigError(std::string("scenario ") + scenario_name(cfg.scenario) + " does not fit " +
                          (cluster ? "bench-cluster" : "bench-manifold"));
    const auto res = cluster ? run_cluster_bench(cfg) : run_manifold_bench(cfg);
    const auto table = emit_table({res});
    Run run(o.out);
    run.write("rows.csv", rows_csv(res));
    run.write("table.csv", table.csv);
    run.write("table.txt", table.text);
    run.manifest(cluster ? "bench-cluster" : "bench-manifold", cfg);
    std::cout << table.text;
    std::cerr << "wall time " << res.wall_time << " s, failures " << res.failures << "/" << cfg.replications << "\n";
    if (res.failure_rate() > cfg.failure_budget) {
        std::cerr << "failure rate " << res.failure_rate() << " exceeds budget " << cfg.failure_budget << "\n";
        return exit_numeric;
    }
    return exit_ok;
}

int cmd_scree(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto data = load_or_generate(o, cfg);
    const auto r = run_pipeline(data, pipeline_options(cfg));
    const auto f = scree_csv(r.spectrum);
    Run run(o.out);
    run.write("scree_eigen.csv", f.eigen_csv);
    run.write("scree_vector.csv", f.vector_csv);
    run.manifest("scree", cfg, {{"views", o.views}, {"m_selected", r.tuning.m_selected}});
    return exit_ok;
}

struct BiasOptions {
    Index n = 4000;
    std::string eps = "0.05,0.07,0.1";
    std::string dilations = "1,1";
    bool uniform_draws = false;
};

int cmd_oracle_bias(const CommonOptions& o, const BiasOptions& b) {
    const auto cfg = resolve(o);
    CircleInstance inst;
    inst.n = b.n;
    inst.dilations = detail::json_number_list(io::json(b.dilations), "dilations");
    inst.equispaced = !b.uniform_draws;
    inst.seed = cfg.master_seed;
    inst.kernel = cfg.bandwidth.kinds.front();
    inst.validate();
    const auto eps = detail::json_number_list(io::json(b.eps), "eps");
    const auto rep = bias_slope_test(
        inst, eps, [](double t) { return std::cos(t); }, [](double t) { return -std::cos(t); });

    Run run(o.out);
    io::json j;
    j["epsilons"] = rep.epsilons;
    j["rms"] = rep.rms;
    j["r_squared"] = rep.r_squared;
    j["laplacian_correlation"] = rep.laplacian_correlation;
    run.write("bias.json", j.dump(2) + "\n");
    const Vector th = inst.thetas();
    std::string csv = "view,sample,theta,slope,laplacian\n";
    for (Index l = 0; l < inst.num_views(); ++l)
        for (Index s = 0; s < inst.n; ++s)
            csv += std::to_string(l + 1) + "," + std::to_string(s + 1) + "," + io::format_double(th(s)) + "," +
                   io::format_double(rep.slope(l * inst.n + s)) + "," + io::format_double(-std::cos(th(s))) + "\n";
    run.write("bias_profile.csv", csv);
    run.manifest("oracle-bias", cfg,
                 {{"n", b.n}, {"eps", eps}, {"dilations", inst.dilations}, {"equispaced", inst.equispaced}});
    std::cout << "R^2 = " << rep.r_squared << "  corr(slope, Laplacian f) = " << rep.laplacian_correlation << "\n";
    return exit_ok;
}

struct RobustnessCli {
    Index n = 300;
    Index p = 100;
    std::string ladder = "1,0.3,0.1,0.03,0.01";
    std::string spikes = "5,3,2";
    double c = 1.0;
    int seeds = 1;
};

int cmd_oracle_robustness(const CommonOptions& o, const RobustnessCli& rc) {
    const auto cfg = resolve(o);
    const auto ladder = detail::json_number_list(io::json(rc.ladder), "ladder");
    const auto lambda = detail::json_number_list(io::json(rc.spikes), "spikes");
    RobustnessOptions ro;
    ro.c = rc.c;
    ro.kernel = cfg.bandwidth.kinds.front();
    std::string csv = "seed,noise_var,snr,norm\n";
    for (int s = 0; s < rc.seeds; ++s) {
        SpikedGenSpec spec;
        spec.n = rc.n;
        spec.p = {rc.p, rc.p};
        spec.spikes = {lambda, lambda};
        spec.seed = derive_seed(cfg.master_seed, 0x726f62, static_cast<std::uint64_t>(s));
        const auto rep = robustness_sweep(spec, ladder, ro);
        for (const auto& pt : rep.points)
            csv += std::to_string(s) + "," + io::format_double(pt.noise_var) + "," + io::format_double(pt.snr) + "," +
                   io::format_double(pt.norm) + "\n";
    }
    Run run(o.out);
    run.write("robustness.csv", csv);
    run.manifest("oracle-robustness", cfg,
                 {{"n", rc.n}, {"p", rc.p}, {"ladder", ladder}, {"spikes", lambda}, {"c", rc.c}, {"seeds", rc.seeds}});
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiview diffusion maps with adaptive bandwidth selection"};
    app.require_subcommand(1);

    CommonOptions gen_o, sel_o, emb_o, bc_o, bm_o, bias_o, rob_o, scree_o;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic multiview dataset");
    add_common(gen, gen_o, false);
    auto* sel = app.add_subcommand("select-bandwidth", "run the bandwidth search and write the report");
    add_common(sel, sel_o, true);
    auto* emb = app.add_subcommand("embed", "compute the diffusion embedding");
    add_common(emb, emb_o, true);
    auto* bc = app.add_subcommand("bench-cluster", "clustering benchmark (ACC, Rand index)");
    add_common(bc, bc_o, false);
    auto* bm = app.add_subcommand("bench-manifold", "manifold benchmark (trustworthiness)");
    add_common(bm, bm_o, false);

    BiasOptions bias_b;
    auto* bias = app.add_subcommand("oracle-bias", "first-order bias check on the circle");
    add_common(bias, bias_o, false);
    bias->add_option("--circle-n", bias_b.n, "samples on the circle")->capture_default_str();
    bias->add_option("--eps", bias_b.eps, "bandwidths, comma separated")->capture_default_str();
    bias->add_option("--dilations", bias_b.dilations, "per-view radii, comma separated")->capture_default_str();
    bias->add_flag("--uniform-draws", bias_b.uniform_draws, "iid uniform angles instead of an equispaced grid");

    RobustnessCli rob_r;
    auto* rob = app.add_subcommand("oracle-robustness", "clean vs noisy operator norm over a noise ladder");
    add_common(rob, rob_o, false);
    rob->add_option("--spiked-n", rob_r.n)->capture_default_str();
    rob->add_option("--spiked-p", rob_r.p)->capture_default_str();
    rob->add_option("--ladder", rob_r.ladder, "noise variances, comma separated")->capture_default_str();
    rob->add_option("--spikes", rob_r.spikes, "spike strengths, comma separated")->capture_default_str();
    rob->add_option("--global-c", rob_r.c, "bandwidth factor on the signal energy")->capture_default_str();
    rob->add_option("--seeds", rob_r.seeds)->capture_default_str();

    auto* scree = app.add_subcommand("scree", "eigenvalue ratios and second eigenvector for plotting");
    add_common(scree, scree_o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try {
        if (*gen) return cmd_gen_data(gen_o);
        if (*sel) return cmd_select_bandwidth(sel_o);
        if (*emb) return cmd_embed(emb_o);
        if (*bc) return cmd_bench(bc_o, true);
        if (*bm) return cmd_bench(bm_o, false);
        if (*bias) return cmd_oracle_bias(bias_o, bias_b);
        if (*rob) return cmd_oracle_robustness(rob_o, rob_r);
        if (*scree) return cmd_scree(scree_o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ParameterError& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return exit_config;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_ok;
}
