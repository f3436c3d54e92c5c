#include "gkr/cli.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gkr/error.hpp"
#include "gkr/eval.hpp"
#include "gkr/graphlearn.hpp"
#include "gkr/graphs.hpp"
#include "gkr/io.hpp"
#include "gkr/kernels.hpp"
#include "gkr/model_io.hpp"
#include "gkr/solver.hpp"
#include "gkr/synthdata.hpp"

namespace gkr::cli {

using nlohmann::json;
namespace fs = std::filesystem;

LogLevel log_level_from_string(const std::string& name) {
    if (name == "error") return LogLevel::error;
    if (name == "warn") return LogLevel::warn;
    if (name == "info") return LogLevel::info;
    if (name == "debug") return LogLevel::debug;
    throw error(errc::schema, "unknown log level '" + name + "'");
}

std::string error_json(const std::string& code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}}.dump() + "\n";
}

namespace {

/// Typed access to one config object. Every key that is looked up is
/// recorded; finish() rejects whatever was never asked for.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(&j), where_(std::move(where)) {
        if (!j.is_object()) {
            throw error(errc::schema, where_ + " must be an object");
        }
    }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_->contains(key) && !(*j_)[key].is_null();
    }

    const json& raw(const std::string& key) {
        if (!has(key)) {
            throw error(errc::schema, where_ + " is missing '" + key + "'");
        }
        return (*j_)[key];
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) {
            throw error(errc::schema, path(key) + " must be a number");
        }
        return v.get<double>();
    }
    double number_or(const std::string& key, double def) { return has(key) ? number(key) : def; }

    long long integer(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_integer()) {
            throw error(errc::schema, path(key) + " must be an integer");
        }
        return v.get<long long>();
    }
    int int_or(const std::string& key, int def) {
        return has(key) ? static_cast<int>(integer(key)) : def;
    }

    std::uint64_t seed(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw error(errc::schema, path(key) + " must be a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) {
            throw error(errc::schema, path(key) + " must be a string");
        }
        return v.get<std::string>();
    }
    std::string text_or(const std::string& key, const std::string& def) {
        return has(key) ? text(key) : def;
    }

    bool flag_or(const std::string& key, bool def) {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_boolean()) {
            throw error(errc::schema, path(key) + " must be true or false");
        }
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) {
            throw error(errc::schema, path(key) + " must be an array of numbers");
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                throw error(errc::schema, path(key) + " must be an array of numbers");
            }
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::vector<double> numbers_or(const std::string& key, std::vector<double> def) {
        return has(key) ? numbers(key) : def;
    }

    std::vector<int> integers(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) {
            throw error(errc::schema, path(key) + " must be an array of integers");
        }
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer()) {
                throw error(errc::schema, path(key) + " must be an array of integers");
            }
            out.push_back(e.get<int>());
        }
        return out;
    }

    Fields object(const std::string& key) { return Fields(raw(key), path(key)); }

    [[nodiscard]] std::string path(const std::string& key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_->items()) {
            if (!used_.count(key)) {
                throw error(errc::schema, "unknown key '" + key + "' in " + where_);
            }
        }
    }

private:
    const json* j_;
    std::string where_;
    std::set<std::string> used_;
};

struct Context {
    RunOptions opts;

    [[nodiscard]] fs::path in(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : opts.base_dir / path;
    }
    [[nodiscard]] fs::path out(const std::string& name) const { return opts.out_dir / name; }

    void log(LogLevel level, const std::string& msg) const {
        if (opts.log && level <= opts.log_level) {
            static const char* names[] = {"error", "warn", "info", "debug"};
            *opts.log << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
        }
    }

    void write(const std::string& name, const std::string& text) const {
        io::write_text(out(name), text);
        log(LogLevel::info, "wrote " + out(name).string());
    }
};

json parse_json_file(const fs::path& path) {
    try {
        return json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw error(errc::parse, path.string() + ": " + e.what());
    }
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string csv_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return io::format_double(x);
}

// ---------------------------------------------------------------- config parts

GraphModelSpec parse_graph_model(Fields f) {
    GraphModelSpec g;
    const std::string model = f.text("model");
    if (model == "erdos_renyi") {
        g.model = GraphModel::erdos_renyi;
        g.p = f.number("p");
    } else if (model == "barabasi_albert") {
        g.model = GraphModel::barabasi_albert;
        g.m_attach = static_cast<int>(f.integer("m_attach"));
    } else {
        throw error(errc::schema, "unknown graph model '" + model + "'");
    }
    f.finish();
    return g;
}

json graph_model_to_json(const GraphModelSpec& g) {
    if (g.model == GraphModel::erdos_renyi) {
        return json{{"model", "erdos_renyi"}, {"p", g.p}};
    }
    return json{{"model", "barabasi_albert"}, {"m_attach", g.m_attach}};
}

/// Synthetic settings shared by synth and bench (seed and SNR optional).
SynthConfig parse_synth(Fields& f, bool with_seed_and_snr) {
    SynthConfig cfg;
    cfg.num_nodes = static_cast<int>(f.integer("num_nodes"));
    cfg.num_samples = static_cast<int>(f.integer("num_samples"));
    cfg.graph = parse_graph_model(f.object("graph"));
    if (f.has("wishart_dof")) {
        cfg.wishart_dof = static_cast<int>(f.integer("wishart_dof"));
    }
    if (with_seed_and_snr) {
        cfg.snr_db = f.number("snr_db");
        cfg.seed = f.seed("seed");
    }
    cfg.validate();
    return cfg;
}

KernelSpec parse_kernel(const Context& ctx, Fields f) {
    const std::string kind = f.text("kind");
    KernelSpec spec;
    switch (kernel_kind_from_string(kind)) {
    case KernelKind::linear:
        spec = KernelSpec::linear();
        break;
    case KernelKind::rbf:
        spec = KernelSpec::rbf(f.number_or("sigma_sq", 1.0));
        break;
    case KernelKind::precomputed:
        spec = KernelSpec::precomputed(io::read_matrix_csv(ctx.in(f.text("matrix_file"))));
        break;
    }
    f.finish();
    return spec;
}

Hyperparams parse_hyper(Fields f) {
    Hyperparams h{f.number("alpha"), f.number_or("beta", 0.0)};
    f.finish();
    h.validate();
    return h;
}

GraphLearnConfig parse_learn(Fields f) {
    GraphLearnConfig cfg;
    cfg.nu = f.number_or("nu", cfg.nu);
    cfg.max_outer_iters = f.int_or("max_outer_iters", cfg.max_outer_iters);
    cfg.tol = f.number_or("tol", cfg.tol);
    if (f.has("trace_budget")) {
        cfg.trace_budget = f.number("trace_budget");
    }
    cfg.max_inner_iters = f.int_or("max_inner_iters", cfg.max_inner_iters);
    cfg.kkt_tol = f.number_or("kkt_tol", cfg.kkt_tol);
    f.finish();
    cfg.validate();
    return cfg;
}

Graph load_graph(const Context& ctx, const std::string& p) { return io::graph_from_json(parse_json_file(ctx.in(p))); }

/// Either {"manifest": path, "part": "train" | "test" | "all"} or explicit
/// headerless CSV paths {"x", "t", "t0"}. Targets may be omitted when only
/// inputs are needed.
Dataset load_dataset(const Context& ctx, Fields f, bool targets_required) {
    Dataset d;
    if (f.has("manifest")) {
        const fs::path mpath = ctx.in(f.text("manifest"));
        const std::string part = f.text_or("part", "train");
        f.finish();
        const json m = parse_json_file(mpath);
        const fs::path dir = mpath.parent_path();
        if (!m.contains("files") || !m["files"].is_object()) {
            throw error(errc::schema, mpath.string() + ": manifest has no 'files'");
        }
        const json& files = m["files"];
        const auto file = [&](const char* key) -> std::optional<fs::path> {
            if (!files.contains(key)) return std::nullopt;
            return dir / files[key].get<std::string>();
        };
        d.x = io::read_matrix_csv(*file("x"));
        if (auto t = file("t")) d.t = io::read_matrix_csv(*t);
        if (auto t0 = file("t0")) d.t0 = io::read_matrix_csv(*t0);
        if (part != "all") {
            if (part != "train" && part != "test") {
                throw error(errc::schema, "dataset 'part' must be train, test or all");
            }
            if (!m.contains("split") || !m["split"].contains(part)) {
                throw error(errc::schema, mpath.string() + ": manifest has no '" + part + "' split");
            }
            const auto rows = m["split"][part].get<std::vector<int>>();
            if (d.t.size() == 0) d.t = Eigen::MatrixXd::Zero(d.x.rows(), 1);
            d = d.subset(rows);
        }
    } else {
        d.x = io::read_matrix_csv(ctx.in(f.text("x")));
        if (f.has("t")) d.t = io::read_matrix_csv(ctx.in(f.text("t")));
        if (f.has("t0")) d.t0 = io::read_matrix_csv(ctx.in(f.text("t0")));
        f.finish();
    }
    if (d.t.size() == 0) {
        if (targets_required) {
            throw error(errc::invalid_argument, "dataset has no targets");
        }
        d.t = Eigen::MatrixXd::Zero(d.x.rows(), 1);
    }
    d.validate();
    return d;
}

Laplacian laplacian_or_zero(const Context& ctx, Fields& f, Eigen::Index num_nodes, double beta) {
    if (f.has("graph")) {
        const Laplacian l = build_laplacian(load_graph(ctx, f.text("graph")));
        if (l.num_nodes() != num_nodes) {
            throw error(errc::dimension_mismatch, "graph has " + std::to_string(l.num_nodes()) +
                                                      " nodes but targets have " +
                                                      std::to_string(num_nodes) + " columns");
        }
        return l;
    }
    if (beta > 0.0) {
        throw error(errc::invalid_argument, "beta > 0 needs a 'graph' file");
    }
    return Laplacian::zero(static_cast<int>(num_nodes));
}

// ---------------------------------------------------------------- commands

json synth_config_json(const SynthConfig& cfg) {
    json j{{"num_nodes", cfg.num_nodes},
           {"num_samples", cfg.num_samples},
           {"graph", graph_model_to_json(cfg.graph)},
           {"snr_db", cfg.snr_db},
           {"seed", cfg.seed}};
    j["wishart_dof"] = cfg.wishart_dof ? json(*cfg.wishart_dof) : json(cfg.num_samples + 2);
    return j;
}

int cmd_synth(const Context& ctx, Fields& f) {
    const SynthConfig cfg = parse_synth(f, true);
    f.finish();
    const SyntheticData data = make_synthetic_dataset(cfg);
    const int s = cfg.num_samples;

    Eigen::MatrixXd x(s, 1);
    for (int i = 0; i < s; ++i) x(i, 0) = i;
    Eigen::MatrixXd t = data.clean_targets;
    for (std::size_t k = 0; k < data.train_indices.size(); ++k) {
        t.row(data.train_indices[k]) = data.train.t.row(static_cast<Eigen::Index>(k));
    }

    const SynthSeeds seeds = SynthSeeds::from_master(cfg.seed);
    json manifest{
        {"format", "gkr-dataset"},
        {"version", 1},
        {"files",
         {{"x", "X.csv"}, {"t", "T.csv"}, {"t0", "T0.csv"}, {"kernel", "kernel.csv"}, {"graph", "graph.json"}}},
        {"config", synth_config_json(cfg)},
        {"seeds",
         {{"master", cfg.seed},
          {"graph", seeds.graph},
          {"covariance", seeds.covariance},
          {"rows", seeds.rows},
          {"split", seeds.split},
          {"noise", seeds.noise}}},
        {"num_samples", s},
        {"num_nodes", cfg.num_nodes},
        {"split", {{"train", data.train_indices}, {"test", data.test_indices}}},
    };
    ctx.write("X.csv", io::matrix_to_csv(x));
    ctx.write("T.csv", io::matrix_to_csv(t));
    ctx.write("T0.csv", io::matrix_to_csv(data.clean_targets));
    ctx.write("kernel.csv", io::matrix_to_csv(data.covariance));
    ctx.write("graph.json", io::dump(io::graph_to_json(data.graph)));
    ctx.write("manifest.json", io::dump(manifest));
    return exit_ok;
}

int cmd_ingest(const Context& ctx, Fields& f) {
    const io::Table inputs = io::read_table_csv(ctx.in(f.text("inputs")));
    const io::Table targets = io::read_table_csv(ctx.in(f.text("targets")));
    std::optional<io::Table> clean;
    if (f.has("clean_targets")) clean = io::read_table_csv(ctx.in(f.text("clean_targets")));
    std::optional<Eigen::MatrixXd> distances;
    if (f.has("distances")) distances = io::read_matrix_csv(ctx.in(f.text("distances")));
    f.finish();

    if (inputs.values.rows() != targets.values.rows()) {
        throw error(errc::dimension_mismatch, "inputs have " + std::to_string(inputs.values.rows()) +
                                                  " rows but targets have " +
                                                  std::to_string(targets.values.rows()));
    }
    const Eigen::Index m = targets.values.cols();
    if (clean && (clean->values.rows() != targets.values.rows() || clean->values.cols() != m)) {
        throw error(errc::dimension_mismatch, "clean targets do not match the targets' shape");
    }
    json files{{"x", "X.csv"}, {"t", "T.csv"}};
    ctx.write("X.csv", io::matrix_to_csv(inputs.values));
    ctx.write("T.csv", io::matrix_to_csv(targets.values));
    if (clean) {
        files["t0"] = "T0.csv";
        ctx.write("T0.csv", io::matrix_to_csv(clean->values));
    }
    if (distances) {
        if (distances->rows() != m || distances->cols() != m) {
            throw error(errc::dimension_mismatch, "distance matrix must be M x M with M = target columns");
        }
        files["graph"] = "graph.json";
        ctx.write("graph.json", io::dump(io::graph_to_json(geodesic_adjacency(*distances))));
    }
    const json manifest{{"format", "gkr-dataset"},
                        {"version", 1},
                        {"files", files},
                        {"columns", {{"inputs", inputs.header}, {"targets", targets.header}}},
                        {"num_samples", inputs.values.rows()},
                        {"num_nodes", m}};
    ctx.write("manifest.json", io::dump(manifest));
    return exit_ok;
}

json cost_terms_json(const JointCostTerms& t) {
    return json{{"data", t.data},
                {"ridge", t.ridge},
                {"roughness", t.roughness},
                {"frobenius", t.frobenius},
                {"total", t.total()}};
}

int cmd_fit(const Context& ctx, Fields& f) {
    const Dataset data = load_dataset(ctx, f.object("data"), true);
    const KernelSpec spec = parse_kernel(ctx, f.object("kernel"));
    const Hyperparams hyper = parse_hyper(f.object("hyper"));
    const Laplacian lap = laplacian_or_zero(ctx, f, data.t.cols(), hyper.beta);
    f.finish();

    GramMatrix gram = gram_matrix(data.x, spec);
    const KrgModel model = fit_krg(data.x, spec, std::move(gram), data.t, lap, hyper);
    const Eigen::MatrixXd y = model.gram.matrix * model.psi;
    const JointCostTerms terms = joint_cost_terms(model.gram, model.psi, lap, data.t, hyper, 0.0);
    const Eigen::MatrixXd grad = dual_cost_gradient(model.gram.matrix, model.psi, data.t, lap, hyper);

    json report{{"num_train", model.num_train()},
                {"num_nodes", model.num_nodes()},
                {"kernel", std::string(to_string(spec.kind))},
                {"hyper", {{"alpha", hyper.alpha}, {"beta", hyper.beta}}},
                {"residual_norm", (data.t - y).norm()},
                {"relative_residual", (data.t - y).norm() / data.t.norm()},
                {"cost_terms", cost_terms_json(terms)},
                {"gradient_norm", grad.norm()},
                {"output_roughness", output_roughness(y, lap)}};
    if (data.t0) {
        report["train_nmse_db_vs_clean"] = nmse_db(y, *data.t0);
    }
    ctx.write("model.json", io::dump(model_to_json(model)));
    ctx.write("fit_report.json", io::dump(report));
    return exit_ok;
}

int cmd_predict(const Context& ctx, Fields& f) {
    const KrgModel model = load_model(ctx.in(f.text("model")));
    const Dataset data = load_dataset(ctx, f.object("data"), false);
    f.finish();
    const Eigen::MatrixXd pred = predict_krg_batch(model, data.x);
    ctx.write("predictions.csv", io::matrix_to_csv(pred));
    if (data.t0) {
        ctx.write("predict_report.json",
                  io::dump(json{{"num_test", pred.rows()}, {"nmse_db_vs_clean", nmse_db(pred, *data.t0)}}));
    }
    return exit_ok;
}

int cmd_learn_graph(const Context& ctx, Fields& f) {
    const Dataset data = load_dataset(ctx, f.object("data"), true);
    const KernelSpec spec = parse_kernel(ctx, f.object("kernel"));
    const Hyperparams hyper = parse_hyper(f.object("hyper"));
    const GraphLearnConfig cfg = parse_learn(f.object("learn"));
    f.finish();

    const GramMatrix gram = gram_matrix(data.x, spec);
    const GraphLearnResult r = alternating_fit(data.x, spec, gram, data.t, hyper, cfg);

    std::string log;
    for (const IterationRecord& rec : r.records) {
        const json line{{"iteration", rec.iteration},
                        {"w_step_before", number_or_null(rec.w_step_before)},
                        {"w_step_after", number_or_null(rec.w_step_after)},
                        {"l_step_before", number_or_null(rec.l_step_before)},
                        {"l_step_after", number_or_null(rec.l_step_after)},
                        {"cost_terms", cost_terms_json(rec.terms)},
                        {"spectral_radius", rec.spectral_radius},
                        {"sparsity", rec.sparsity},
                        {"inner_iterations", rec.inner_iterations},
                        {"kkt_residual", rec.kkt_residual}};
        log += line.dump() + "\n";
    }
    ctx.write("learn_log.jsonl", log);
    ctx.write("learned_graph.json", io::dump(io::graph_to_json(r.learned.to_graph())));
    ctx.write("learned_laplacian.csv", io::matrix_to_csv(r.learned.matrix()));
    ctx.write("model.json", io::dump(model_to_json(r.model)));
    ctx.write("learn_report.json", io::dump(json{{"converged", r.converged},
                                                 {"outer_iterations", r.records.size()},
                                                 {"cost_trace", r.cost_trace}}));
    if (!r.converged) {
        ctx.log(LogLevel::warn, "graph learning stopped at max_outer_iters before reaching tol");
    }
    return exit_ok;
}

CvGrid parse_grid(Fields f) {
    CvGrid g;
    g.alphas = f.numbers_or("alphas", g.alphas);
    g.betas = f.numbers_or("betas", g.betas);
    g.sigma_sqs = f.numbers_or("sigma_sqs", g.sigma_sqs);
    g.nus = f.numbers_or("nus", g.nus);
    g.mus = f.numbers_or("mus", g.mus);
    g.taus = f.numbers_or("taus", g.taus);
    g.folds = f.int_or("folds", g.folds);
    f.finish();
    return g;
}

KrrKernel parse_krr_kernel(const std::string& s) {
    if (s == "diffusion") return KrrKernel::diffusion;
    if (s == "covariance") return KrrKernel::covariance;
    throw error(errc::schema, "krr_kernel must be 'diffusion' or 'covariance'");
}

/// rbf kernels take sigma^2 from the grid; a missing kernel means linear
/// (LR/LRG) or rbf (KR/KRG).
KernelSpec task_kernel(const Context& ctx, Fields& f, Method method) {
    if (f.has("kernel")) return parse_kernel(ctx, f.object("kernel"));
    if (method == Method::KR || method == Method::KRG) return KernelSpec::rbf(1.0);
    return KernelSpec::linear();
}

json params_json(const MethodParams& p) {
    return json{{"alpha", p.alpha}, {"beta", p.beta}, {"sigma_sq", p.sigma_sq},
                {"nu", p.nu},       {"mu", p.mu},     {"tau", p.tau}};
}

int cmd_cv(const Context& ctx, Fields& f) {
    const Dataset data = load_dataset(ctx, f.object("data"), true);
    RegressionTask task;
    task.method = method_from_string(f.text("method"));
    task.kernel = task_kernel(ctx, f, task.method);
    task.learn_graph = f.flag_or("learn_graph", false);
    if (f.has("learn")) task.learn = parse_learn(f.object("learn"));
    task.krr_kernel = parse_krr_kernel(f.text_or("krr_kernel", "diffusion"));
    if (f.has("graph")) {
        task.graph = load_graph(ctx, f.text("graph"));
        if (task.method != Method::KRR) task.laplacian = build_laplacian(*task.graph);
    }
    const CvGrid grid = parse_grid(f.object("grid"));
    const std::uint64_t seed = f.seed("seed");
    f.finish();

    const CvResult cv = cross_validate(data, task, grid, seed);
    std::string table = "alpha,beta,sigma_sq,nu,mu,tau,mean_nmse_db\n";
    for (const CvEntry& e : cv.table) {
        const MethodParams& p = e.params;
        for (double v : {p.alpha, p.beta, p.sigma_sq, p.nu, p.mu, p.tau}) {
            table += csv_number(v) + ",";
        }
        table += csv_number(e.mean_nmse_db) + "\n";
    }
    ctx.write("cv_table.csv", table);
    ctx.write("cv_best.json", io::dump(json{{"method", std::string(to_string(task.method))},
                                            {"best", params_json(cv.best)},
                                            {"mean_nmse_db", cv.best_nmse_db},
                                            {"folds", grid.folds},
                                            {"seed", seed}}));
    return exit_ok;
}

std::string curve_name(const char* prefix, double v) {
    std::string s = csv_number(v);
    for (char& c : s) {
        if (c == '-') c = 'm';
    }
    return std::string(prefix) + s + ".csv";
}

int cmd_bench(const Context& ctx, Fields& f) {
    BenchScenario sc;
    {
        const json& ms = f.raw("methods");
        if (!ms.is_array() || ms.empty()) {
            throw error(errc::schema, "'methods' must be a nonempty array of method names");
        }
        for (const auto& m : ms) {
            if (!m.is_string()) throw error(errc::schema, "'methods' entries must be strings");
            sc.methods.push_back(method_from_string(m.get<std::string>()));
        }
    }
    sc.n_train = f.integers("n_train");
    sc.snr_db = f.numbers("snr_db");
    sc.realizations = static_cast<int>(f.integer("realizations"));
    sc.seed = f.seed("seed");
    if (f.has("synth")) {
        Fields s = f.object("synth");
        sc.synth = parse_synth(s, false);
        s.finish();
    }
    if (f.has("data")) {
        Fields d = f.object("data");
        BenchData bd{load_dataset(ctx, d.object("train"), true), load_dataset(ctx, d.object("test"), true),
                     std::nullopt};
        if (d.has("graph")) bd.graph = load_graph(ctx, d.text("graph"));
        d.finish();
        sc.data = std::move(bd);
    }
    if (f.has("kernel")) sc.kernel = parse_kernel(ctx, f.object("kernel"));
    if (f.has("grid")) sc.grid = parse_grid(f.object("grid"));
    sc.learn_graph = f.flag_or("learn_graph", false);
    if (f.has("learn")) sc.learn = parse_learn(f.object("learn"));
    sc.krr_kernel = parse_krr_kernel(f.text_or("krr_kernel", "diffusion"));
    f.finish();

    const BenchReport report = run_benchmark(sc);

    std::string csv = "method,n_train,snr_db,split,nmse_db,nmse_db_mean_of_db,realizations,seed\n";
    json results = json::array();
    for (const BenchResult& r : report.results) {
        csv += std::string(to_string(r.method)) + "," + std::to_string(r.n_train) + "," +
               csv_number(r.snr_db) + "," + r.split + "," + csv_number(r.nmse_db) + "," +
               csv_number(r.nmse_db_mean_of_db) + "," + std::to_string(r.num_realizations) + "," +
               std::to_string(r.seed) + "\n";
        results.push_back(json{{"method", std::string(to_string(r.method))},
                               {"n_train", r.n_train},
                               {"snr_db", r.snr_db},
                               {"split", r.split},
                               {"nmse_db", r.nmse_db},
                               {"nmse_db_mean_of_db", r.nmse_db_mean_of_db},
                               {"realizations", r.num_realizations},
                               {"seed", r.seed}});
    }
    json failures = json::array();
    for (const BenchFailure& b : report.failures) {
        failures.push_back(json{{"method", std::string(to_string(b.method))},
                                {"n_train", b.n_train},
                                {"snr_db", b.snr_db},
                                {"message", b.message}});
        ctx.log(LogLevel::warn, std::string(to_string(b.method)) + " N=" + std::to_string(b.n_train) +
                                    " SNR=" + csv_number(b.snr_db) + ": " + b.message);
    }
    ctx.write("bench_results.csv", csv);
    ctx.write("bench_results.json",
              io::dump(json{{"results", results},
                            {"summary", {{"cells", sc.methods.size() * sc.n_train.size() * sc.snr_db.size()},
                                         {"failed", report.failures.size()}}},
                            {"failures", failures}}));

    // test-split curves: NMSE vs SNR per N and NMSE vs N per SNR
    std::map<std::tuple<Method, int, double>, double> test;
    for (const BenchResult& r : report.results) {
        if (r.split == "test") test[{r.method, r.n_train, r.snr_db}] = r.nmse_db;
    }
    const auto lookup = [&](Method m, int n, double s) {
        const auto it = test.find({m, n, s});
        return it == test.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    };
    std::string methods_header;
    for (Method m : sc.methods) methods_header += "," + std::string(to_string(m));
    for (int n : sc.n_train) {
        std::string c = "snr_db" + methods_header + "\n";
        for (double s : sc.snr_db) {
            c += csv_number(s);
            for (Method m : sc.methods) c += "," + csv_number(lookup(m, n, s));
            c += "\n";
        }
        ctx.write(curve_name("curve_snr_n", n), c);
    }
    for (double s : sc.snr_db) {
        std::string c = "n_train" + methods_header + "\n";
        for (int n : sc.n_train) {
            c += std::to_string(n);
            for (Method m : sc.methods) c += "," + csv_number(lookup(m, n, s));
            c += "\n";
        }
        ctx.write(curve_name("curve_n_snr", s), c);
    }
    return report.failures.empty() ? exit_ok : exit_partial;
}

int cmd_krr(const Context& ctx, Fields& f) {
    const double mu = f.number("mu");
    const std::vector<int> observed = f.integers("observed");
    Eigen::MatrixXd k_bar;
    if (f.has("kernel_matrix")) {
        k_bar = io::read_matrix_csv(ctx.in(f.text("kernel_matrix")));
    } else {
        Fields d = f.object("diffusion");
        Graph g = load_graph(ctx, d.text("graph"));
        const double tau = d.number("tau");
        const bool product = d.flag_or("product", false);
        d.finish();
        if (product) g = krr_product_graph(g);
        k_bar = diffusion_kernel(build_laplacian(g), tau);
    }
    const Eigen::MatrixXd signals = io::read_matrix_csv(ctx.in(f.text("signals")));
    f.finish();
    if (signals.cols() != static_cast<Eigen::Index>(observed.size())) {
        throw error(errc::dimension_mismatch, "each signal row must have one value per observed index");
    }
    const Eigen::MatrixXd op = krr_operator(k_bar, observed, mu);
    ctx.write("krr_estimate.csv", io::matrix_to_csv(signals * op.transpose()));
    return exit_ok;
}

} // namespace

int run_command(const json& config, const RunOptions& opts) {
    Context ctx{opts};
    Fields f(config, "config");
    const std::string command = f.text("command");
    ctx.log(LogLevel::debug, "command " + command);
    if (command == "synth") return cmd_synth(ctx, f);
    if (command == "ingest") return cmd_ingest(ctx, f);
    if (command == "fit") return cmd_fit(ctx, f);
    if (command == "predict") return cmd_predict(ctx, f);
    if (command == "learn-graph") return cmd_learn_graph(ctx, f);
    if (command == "cv") return cmd_cv(ctx, f);
    if (command == "bench") return cmd_bench(ctx, f);
    if (command == "krr") return cmd_krr(ctx, f);
    throw error(errc::schema, "unknown command '" + command + "'");
}

int run_config_file(const fs::path& config_path, const fs::path& out_dir, LogLevel level,
                    std::ostream& err) {
    try {
        const json config = parse_json_file(config_path);
        RunOptions opts;
        opts.base_dir = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
        opts.out_dir = out_dir;
        opts.log_level = level;
        opts.log = &err;
        return run_command(config, opts);
    } catch (const error& e) {
        err << error_json(std::string(to_string(e.code())), e.what());
        return e.code() == errc::schema || e.code() == errc::parse ? exit_usage : exit_failure;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what());
        return exit_failure;
    }
}

} // namespace gkr::cli
