#include "gkr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "gkr/error.hpp"
#include "gkr/linalg.hpp"
#include "gkr/random.hpp"

namespace gkr {

double nmse_db(const Eigen::MatrixXd& y, const Eigen::MatrixXd& t0) {
    if (y.rows() != t0.rows() || y.cols() != t0.cols()) {
        throw error(errc::dimension_mismatch, "prediction and reference shapes differ");
    }
    const double signal = t0.squaredNorm();
    if (!(signal > 0.0)) {
        throw error(errc::invalid_argument, "NMSE is undefined for a zero reference");
    }
    const double err = (y - t0).squaredNorm();
    if (err == 0.0) {
        return nmse_floor_db;
    }
    return std::max(nmse_floor_db, 10.0 * std::log10(err / signal));
}

void NmseAccumulator::add(const Eigen::MatrixXd& y, const Eigen::MatrixXd& t0) {
    db_sum_ += nmse_db(y, t0);
    error_energy_ += (y - t0).squaredNorm();
    signal_energy_ += t0.squaredNorm();
    ++count_;
}

double NmseAccumulator::pooled_db() const {
    if (count_ == 0) {
        throw error(errc::invalid_argument, "no realizations recorded");
    }
    if (error_energy_ == 0.0) {
        return nmse_floor_db;
    }
    return std::max(nmse_floor_db, 10.0 * std::log10(error_energy_ / signal_energy_));
}

double NmseAccumulator::mean_of_db() const {
    if (count_ == 0) {
        throw error(errc::invalid_argument, "no realizations recorded");
    }
    return db_sum_ / count_;
}

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::LR: return "LR";
    case Method::LRG: return "LRG";
    case Method::KR: return "KR";
    case Method::KRG: return "KRG";
    case Method::KRR: return "KRR";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    for (Method m : {Method::LR, Method::LRG, Method::KR, Method::KRG, Method::KRR}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw error(errc::schema, "unknown method '" + std::string(name) + "'");
}

namespace {

bool uses_graph(Method m) { return m == Method::LRG || m == Method::KRG; }
bool is_kernel_method(Method m) { return m == Method::KR || m == Method::KRG; }
bool is_linear_method(Method m) { return m == Method::LR || m == Method::LRG; }

void require_nonempty(const std::vector<double>& v, const char* name) {
    if (v.empty()) {
        throw error(errc::schema, std::string("grid list '") + name + "' is empty");
    }
}

void require_nonnegative(const std::vector<double>& v, const char* name, bool strict) {
    for (double x : v) {
        if (!std::isfinite(x) || x < 0.0 || (strict && x == 0.0)) {
            throw error(errc::schema, std::string("grid list '") + name + "' has an invalid value");
        }
    }
}

} // namespace

void CvGrid::validate(Method method, KernelKind kernel, bool learn_graph, KrrKernel krr) const {
    if (folds < 2) {
        throw error(errc::schema, "cross-validation needs at least 2 folds");
    }
    if (method == Method::KRR) {
        require_nonempty(mus, "mus");
        require_nonnegative(mus, "mus", true);
        if (krr == KrrKernel::diffusion) {
            require_nonempty(taus, "taus");
            require_nonnegative(taus, "taus", true);
        }
        return;
    }
    require_nonempty(alphas, "alphas");
    require_nonnegative(alphas, "alphas", false);
    if (uses_graph(method)) {
        require_nonempty(betas, "betas");
        require_nonnegative(betas, "betas", false);
    }
    if (is_kernel_method(method) && kernel == KernelKind::rbf) {
        require_nonempty(sigma_sqs, "sigma_sqs");
        require_nonnegative(sigma_sqs, "sigma_sqs", true);
    }
    if (learn_graph && uses_graph(method)) {
        require_nonempty(nus, "nus");
        require_nonnegative(nus, "nus", false);
    }
}

void RegressionTask::validate(Eigen::Index num_nodes) const {
    if (uses_graph(method) && !learn_graph) {
        if (!laplacian) {
            throw error(errc::invalid_argument,
                        std::string(to_string(method)) + " needs a graph Laplacian");
        }
        if (laplacian->num_nodes() != num_nodes) {
            throw error(errc::dimension_mismatch, "Laplacian size does not match the targets");
        }
    }
    if (is_linear_method(method) && kernel.kind == KernelKind::precomputed) {
        throw error(errc::invalid_argument,
                    std::string(to_string(method)) + " needs feature inputs, not a precomputed kernel");
    }
    if (method == Method::KRR) {
        if (!graph) {
            throw error(errc::invalid_argument, "KRR needs the target graph");
        }
        if (graph->num_nodes() != num_nodes) {
            throw error(errc::dimension_mismatch, "KRR graph size does not match the targets");
        }
    }
}

Eigen::MatrixXd krr_operator(const Eigen::MatrixXd& k_bar, const std::vector<int>& observed,
                             double mu) {
    if (k_bar.rows() != k_bar.cols()) {
        throw error(errc::dimension_mismatch, "KRR kernel must be square");
    }
    if (!(mu > 0.0)) {
        throw error(errc::singular_system, "KRR needs mu > 0");
    }
    const Eigen::Index p = k_bar.rows();
    std::vector<int> sorted = observed;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw error(errc::invalid_argument, "observed indices must be distinct");
    }
    for (int i : observed) {
        if (i < 0 || i >= p) {
            throw error(errc::invalid_argument, "observed index out of range");
        }
    }
    const auto s = static_cast<Eigen::Index>(observed.size());
    // K_bar Phi^T and Phi K_bar Phi^T are column / row selections
    const Eigen::MatrixXd k_cols = k_bar(Eigen::all, observed);
    Eigen::MatrixXd system = k_bar(observed, observed);
    system.diagonal().array() += mu * static_cast<double>(s);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    if (ldlt.info() != Eigen::Success) {
        throw error(errc::singular_system, "KRR system could not be factorized");
    }
    // (K_cols S^{-1}) = (S^{-1} K_cols^T)^T since S is symmetric
    return ldlt.solve(k_cols.transpose()).transpose();
}

Eigen::VectorXd krr_baseline(const Eigen::MatrixXd& k_bar, const std::vector<int>& observed,
                             const Eigen::VectorXd& x, double mu) {
    if (x.size() != static_cast<Eigen::Index>(observed.size())) {
        throw error(errc::dimension_mismatch, "observation length does not match the index set");
    }
    return krr_operator(k_bar, observed, mu) * x;
}

Eigen::MatrixXd diffusion_kernel(const Laplacian& l, double tau) {
    const auto eig = psd_eigen(l.matrix());
    const Eigen::VectorXd decay = (-tau * eig.values.array()).exp();
    return eig.vectors * decay.asDiagonal() * eig.vectors.transpose();
}

Graph krr_product_graph(const Graph& g) {
    Eigen::MatrixXd step(2, 2);
    step << 0.0, 1.0, 1.0, 0.0;
    return cartesian_product(g, Graph(step));
}

namespace {

Hyperparams hyper_for(Method method, const MethodParams& params) {
    return Hyperparams{params.alpha, uses_graph(method) ? params.beta : 0.0};
}

KernelSpec kernel_for(const RegressionTask& task, const MethodParams& params) {
    KernelSpec spec = task.kernel;
    if (spec.kind == KernelKind::rbf && params.sigma_sq > 0.0) {
        spec.sigma_sq = params.sigma_sq;
    }
    return spec;
}

Laplacian laplacian_for(const RegressionTask& task, Eigen::Index num_nodes) {
    if (uses_graph(task.method) && task.laplacian) {
        return *task.laplacian;
    }
    return Laplacian::zero(static_cast<int>(num_nodes));
}

FitPredict fit_predict_krr(const RegressionTask& task, const MethodParams& params,
                           const Dataset& train, const Eigen::MatrixXd& x_test) {
    const Eigen::Index m = train.t.cols();
    if (train.x.cols() != m || x_test.cols() != m) {
        throw error(errc::dimension_mismatch,
                    "KRR needs inputs that are signals on the same M nodes as the targets");
    }
    Eigen::MatrixXd k_bar;
    if (task.krr_kernel == KrrKernel::diffusion) {
        k_bar = diffusion_kernel(build_laplacian(krr_product_graph(*task.graph)), params.tau);
    } else {
        // second-moment estimate over stacked [target; input] training signals
        Eigen::MatrixXd z(train.size(), 2 * m);
        z << train.t, train.x;
        k_bar = z.transpose() * z / static_cast<double>(train.size());
    }
    std::vector<int> observed(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        observed[static_cast<std::size_t>(i)] = static_cast<int>(m + i);
    }
    const Eigen::MatrixXd op = krr_operator(k_bar, observed, params.mu);
    const Eigen::MatrixXd target_rows = op.topRows(m);
    return FitPredict{train.x * target_rows.transpose(), x_test * target_rows.transpose()};
}

} // namespace

FitPredict fit_and_predict(const RegressionTask& task, const MethodParams& params,
                           const Dataset& train, const Eigen::MatrixXd& x_test) {
    const Eigen::Index m = train.t.cols();
    task.validate(m);
    if (task.method == Method::KRR) {
        return fit_predict_krr(task, params, train, x_test);
    }
    const Hyperparams hyper = hyper_for(task.method, params);
    const bool learn = task.learn_graph && uses_graph(task.method);

    if (is_linear_method(task.method) && !learn) {
        const LrgModel model = fit_lrg(train.x, train.t, laplacian_for(task, m), hyper);
        return FitPredict{train.x * model.w, predict_lrg_batch(model, x_test)};
    }

    // kernel route; LRG with a learned graph uses the linear kernel
    const KernelSpec spec =
        is_linear_method(task.method) ? KernelSpec::linear() : kernel_for(task, params);
    GramMatrix gram = gram_matrix(train.x, spec);
    if (learn) {
        GraphLearnConfig cfg = task.learn;
        cfg.nu = params.nu;
        const GraphLearnResult r = alternating_fit(train.x, spec, gram, train.t, hyper, cfg);
        return FitPredict{gram.matrix * r.model.psi, predict_krg_batch(r.model, x_test)};
    }
    const KrgModel model = fit_krg(train.x, spec, gram, train.t, laplacian_for(task, m), hyper);
    return FitPredict{model.gram.matrix * model.psi, predict_krg_batch(model, x_test)};
}

std::vector<std::vector<int>> fold_assignment(int n, int folds, std::uint64_t seed) {
    if (folds < 2 || folds > n) {
        throw error(errc::invalid_argument, "fold count must lie in [2, N]");
    }
    Rng rng(seed);
    const std::vector<int> perm = rng.permutation(n);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i % folds)].push_back(perm[static_cast<std::size_t>(i)]);
    }
    for (auto& f : out) {
        std::sort(f.begin(), f.end());
    }
    return out;
}

namespace {

std::vector<double> sorted_or(const std::vector<double>& v, bool used) {
    if (!used) {
        return {0.0};
    }
    std::vector<double> out = v;
    std::stable_sort(out.begin(), out.end());
    return out;
}

std::vector<MethodParams> grid_points(const RegressionTask& task, const CvGrid& grid) {
    const Method m = task.method;
    const bool krr = m == Method::KRR;
    const auto alphas = sorted_or(grid.alphas, !krr);
    const auto betas = sorted_or(grid.betas, uses_graph(m));
    const auto sigmas =
        sorted_or(grid.sigma_sqs, is_kernel_method(m) && task.kernel.kind == KernelKind::rbf);
    const auto nus = sorted_or(grid.nus, task.learn_graph && uses_graph(m));
    const auto mus = sorted_or(grid.mus, krr);
    const auto taus = sorted_or(grid.taus, krr && task.krr_kernel == KrrKernel::diffusion);
    std::vector<MethodParams> out;
    for (double a : alphas)
        for (double b : betas)
            for (double s : sigmas)
                for (double n : nus)
                    for (double mu : mus)
                        for (double tau : taus)
                            out.push_back(MethodParams{a, b, s, n, mu, tau});
    return out;
}

} // namespace

CvResult cross_validate(const Dataset& train, const RegressionTask& task, const CvGrid& grid,
                        std::uint64_t seed) {
    train.validate();
    grid.validate(task.method, task.kernel.kind, task.learn_graph, task.krr_kernel);
    const auto n = static_cast<int>(train.size());
    if (grid.folds > n) {
        throw error(errc::invalid_argument, "more folds than training samples");
    }
    const Eigen::Index m = train.t.cols();
    task.validate(m);

    const std::vector<MethodParams> points = grid_points(task, grid);
    std::vector<double> db_sum(points.size(), 0.0);
    std::vector<bool> failed(points.size(), false);
    const auto folds = fold_assignment(n, grid.folds, seed);
    const bool fast = task.method != Method::KRR && !(task.learn_graph && uses_graph(task.method));
    const Laplacian lap = laplacian_for(task, m);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<int> fit_rows;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g != f) {
                fit_rows.insert(fit_rows.end(), folds[g].begin(), folds[g].end());
            }
        }
        std::sort(fit_rows.begin(), fit_rows.end());
        const Dataset fit_set = train.subset(fit_rows);
        const Dataset val_set = train.subset(folds[f]);
        const Eigen::MatrixXd& reference = val_set.clean_or_observed();

        // sample-matrix eigendecompositions are shared by every (alpha, beta)
        std::map<double, std::tuple<SpectralCache, Eigen::MatrixXd, Eigen::MatrixXd>> prepared;
        for (std::size_t p = 0; p < points.size(); ++p) {
            if (failed[p]) {
                continue;
            }
            const MethodParams& params = points[p];
            try {
                Eigen::MatrixXd pred;
                if (fast) {
                    auto it = prepared.find(params.sigma_sq);
                    if (it == prepared.end()) {
                        if (is_linear_method(task.method)) {
                            const Eigen::MatrixXd& phi = fit_set.x;
                            it = prepared
                                     .emplace(params.sigma_sq,
                                              std::make_tuple(SpectralCache(phi.transpose() * phi, lap),
                                                              Eigen::MatrixXd(phi.transpose() * fit_set.t),
                                                              val_set.x))
                                     .first;
                        } else {
                            const KernelSpec spec = kernel_for(task, params);
                            const GramMatrix gram = gram_matrix(fit_set.x, spec);
                            it = prepared
                                     .emplace(params.sigma_sq,
                                              std::make_tuple(SpectralCache(gram.matrix, lap), fit_set.t,
                                                              cross_kernel(fit_set.x, val_set.x, spec, gram)))
                                     .first;
                        }
                    }
                    const auto& [cache, rhs, rows] = it->second;
                    const Eigen::MatrixXd coef =
                        solve_dual(cache, rhs, hyper_for(task.method, params));
                    pred = rows * coef;
                } else {
                    pred = fit_and_predict(task, params, fit_set, val_set.x).test_pred;
                }
                const double db = nmse_db(pred, reference);
                if (!std::isfinite(db)) {
                    failed[p] = true;
                } else {
                    db_sum[p] += db;
                }
            } catch (const error& e) {
                if (e.code() == errc::dimension_mismatch || e.code() == errc::invalid_argument) {
                    throw;
                }
                failed[p] = true;
            }
        }
    }

    CvResult result;
    const double inf = std::numeric_limits<double>::infinity();
    std::size_t best = points.size();
    for (std::size_t p = 0; p < points.size(); ++p) {
        const double mean = failed[p] ? inf : db_sum[p] / static_cast<double>(folds.size());
        result.table.push_back(CvEntry{points[p], mean});
        if (!failed[p] && (best == points.size() || mean < result.table[best].mean_nmse_db)) {
            best = p;
        }
    }
    if (best == points.size()) {
        throw error(errc::singular_system, "every cross-validation grid point failed");
    }
    result.best = points[best];
    result.best_nmse_db = result.table[best].mean_nmse_db;
    return result;
}

void BenchScenario::validate() const {
    if (methods.empty() || n_train.empty() || snr_db.empty()) {
        throw error(errc::schema, "benchmark needs methods, n_train and snr_db lists");
    }
    if (realizations < 1) {
        throw error(errc::schema, "realizations must be at least 1");
    }
    if (synth.has_value() == data.has_value()) {
        throw error(errc::schema, "benchmark needs exactly one data source (synthetic or dataset)");
    }
    for (int n : n_train) {
        if (n < 2) {
            throw error(errc::schema, "n_train values must be at least 2");
        }
    }
    if (synth) {
        synth->validate();
    }
}

namespace {

struct Cell {
    NmseAccumulator train;
    NmseAccumulator test;
    bool failed = false;
    std::string message;
};

std::vector<int> training_subset(int available, int n, std::uint64_t seed) {
    if (n > available) {
        std::ostringstream msg;
        msg << "n_train = " << n << " exceeds the " << available << " available training samples";
        throw error(errc::invalid_argument, msg.str());
    }
    if (n == available) {
        std::vector<int> all(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            all[static_cast<std::size_t>(i)] = i;
        }
        return all;
    }
    Rng rng(seed);
    std::vector<int> perm = rng.permutation(available);
    perm.resize(static_cast<std::size_t>(n));
    std::sort(perm.begin(), perm.end());
    return perm;
}

} // namespace

BenchReport run_benchmark(const BenchScenario& scenario) {
    scenario.validate();
    const std::size_t nm = scenario.methods.size();
    const std::size_t nn = scenario.n_train.size();
    const std::size_t ns = scenario.snr_db.size();
    std::vector<Cell> cells(nm * nn * ns);
    const auto cell_at = [&](std::size_t mi, std::size_t ni, std::size_t si) -> Cell& {
        return cells[(mi * nn + ni) * ns + si];
    };

    for (int r = 0; r < scenario.realizations; ++r) {
        const std::uint64_t rseed = derive_seed(scenario.seed, static_cast<std::uint64_t>(r));

        // clean data for this realization
        Dataset train_clean;
        Dataset test;
        KernelSpec kernel = scenario.kernel;
        std::optional<Graph> graph;
        try {
            if (scenario.synth) {
                SynthConfig cfg = *scenario.synth;
                cfg.seed = rseed;
                SyntheticData data = make_clean_synthetic_dataset(cfg);
                train_clean = std::move(data.train);
                test = std::move(data.test);
                kernel = KernelSpec::precomputed(data.covariance);
                graph = std::move(data.graph);
            } else {
                train_clean = scenario.data->train;
                train_clean.t0 = train_clean.clean_or_observed();
                test = scenario.data->test;
                graph = scenario.data->graph;
            }
        } catch (const error& e) {
            for (auto& c : cells) {
                c.failed = true;
                c.message = e.what();
            }
            break;
        }
        const std::optional<Laplacian> lap =
            graph ? std::optional<Laplacian>(build_laplacian(*graph)) : std::nullopt;

        for (std::size_t si = 0; si < ns; ++si) {
            Dataset noisy = train_clean;
            noisy.t = add_noise_snr(*train_clean.t0, scenario.snr_db[si], derive_seed(rseed, 100 + si));
            for (std::size_t ni = 0; ni < nn; ++ni) {
                const std::uint64_t subset_seed = derive_seed(rseed, 200 + ni);
                const std::uint64_t cv_seed = derive_seed(rseed, 300 + ni);
                for (std::size_t mi = 0; mi < nm; ++mi) {
                    Cell& cell = cell_at(mi, ni, si);
                    if (cell.failed) {
                        continue;
                    }
                    try {
                        const auto rows = training_subset(static_cast<int>(noisy.size()),
                                                          scenario.n_train[ni], subset_seed);
                        const Dataset train = noisy.subset(rows);
                        RegressionTask task;
                        task.method = scenario.methods[mi];
                        task.kernel = kernel;
                        task.laplacian = lap;
                        task.learn_graph = scenario.learn_graph;
                        task.learn = scenario.learn;
                        task.graph = graph;
                        task.krr_kernel = scenario.krr_kernel;
                        const CvResult cv = cross_validate(train, task, scenario.grid, cv_seed);
                        const FitPredict fp = fit_and_predict(task, cv.best, train, test.x);
                        cell.train.add(fp.train_fit, *train.t0);
                        cell.test.add(fp.test_pred, test.clean_or_observed());
                    } catch (const error& e) {
                        cell.failed = true;
                        cell.message = e.what();
                    }
                }
            }
        }
    }

    BenchReport report;
    for (std::size_t mi = 0; mi < nm; ++mi) {
        for (std::size_t ni = 0; ni < nn; ++ni) {
            for (std::size_t si = 0; si < ns; ++si) {
                const Cell& cell = cell_at(mi, ni, si);
                const Method method = scenario.methods[mi];
                const int n = scenario.n_train[ni];
                const double snr = scenario.snr_db[si];
                if (cell.failed) {
                    report.failures.push_back(BenchFailure{method, n, snr, cell.message});
                    continue;
                }
                for (const auto& [split, acc] :
                     {std::pair<const char*, const NmseAccumulator*>{"train", &cell.train},
                      std::pair<const char*, const NmseAccumulator*>{"test", &cell.test}}) {
                    report.results.push_back(BenchResult{method, n, snr, split, acc->pooled_db(),
                                                         acc->mean_of_db(), acc->count(),
                                                         scenario.seed});
                }
            }
        }
    }
    return report;
}

} // namespace gkr
