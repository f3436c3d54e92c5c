#include "doctest.h"

#include <cmath>
#include <set>

#include "gkr/error.hpp"
#include "gkr/eval.hpp"
#include "gkr/linalg.hpp"
#include "oracles.hpp"

using namespace gkr;

TEST_CASE("nmse_db trivial and derived cases") {
    oracle::Gen gen(1);
    const Eigen::MatrixXd t0 = gen.matrix(6, 4);
    CHECK(nmse_db(t0, t0) == nmse_floor_db);
    CHECK(nmse_db(Eigen::MatrixXd::Zero(6, 4), t0) == 0.0);
    Eigen::MatrixXd e = gen.matrix(6, 4);
    e *= std::sqrt(0.01 * t0.squaredNorm() / e.squaredNorm());
    CHECK(nmse_db(t0 + e, t0) == doctest::Approx(-20.0).epsilon(1e-12));
    CHECK_THROWS_AS(nmse_db(t0, Eigen::MatrixXd::Zero(6, 4)), error);
    CHECK_THROWS_AS(nmse_db(t0, gen.matrix(4, 6)), error);
}

TEST_CASE("property: nmse_db is scale invariant") {
    oracle::Gen gen(2);
    for (int i = 0; i < 50; ++i) {
        const Eigen::MatrixXd t0 = gen.matrix(5, 3);
        const Eigen::MatrixXd y = gen.matrix(5, 3);
        double c = gen.uniform(-100, 100);
        if (c == 0.0) c = 1.0;
        CHECK(nmse_db(c * y, c * t0) == doctest::Approx(nmse_db(y, t0)).epsilon(1e-10));
    }
}

TEST_CASE("nmse accumulator pools energies before the ratio") {
    Eigen::MatrixXd a0(1, 1), a(1, 1), b0(1, 1), b(1, 1);
    a0 << 1.0;
    a << 2.0; // error 1, signal 1
    b0 << 3.0;
    b << 3.0; // error 0, signal 9
    NmseAccumulator acc;
    acc.add(a, a0);
    acc.add(b, b0);
    CHECK(acc.count() == 2);
    CHECK(acc.pooled_db() == doctest::Approx(10 * std::log10(1.0 / 10.0)));
    CHECK(acc.mean_of_db() == doctest::Approx((0.0 + nmse_floor_db) / 2));
    CHECK_THROWS_AS((void)NmseAccumulator{}.pooled_db(), error);
}

TEST_CASE("property: folds partition the indices") {
    oracle::Gen gen(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = gen.integer(2, 60);
        const int k = gen.integer(2, n);
        const auto folds = fold_assignment(n, k, static_cast<std::uint64_t>(trial));
        CHECK(folds.size() == static_cast<std::size_t>(k));
        std::multiset<int> seen;
        std::size_t smallest = n, largest = 0;
        for (const auto& f : folds) {
            seen.insert(f.begin(), f.end());
            smallest = std::min(smallest, f.size());
            largest = std::max(largest, f.size());
        }
        CHECK(seen.size() == static_cast<std::size_t>(n));
        CHECK(std::set<int>(seen.begin(), seen.end()).size() == static_cast<std::size_t>(n));
        CHECK(largest - smallest <= 1);
        CHECK(fold_assignment(n, k, trial) == folds);
    }
    CHECK_THROWS_AS(fold_assignment(3, 4, 0), error);
    CHECK_THROWS_AS(fold_assignment(3, 1, 0), error);
}

namespace {

Dataset toy_dataset(oracle::Gen& gen, int n, int d, int m) {
    Dataset data;
    data.x = gen.matrix(n, d);
    data.t0 = data.x * gen.matrix(d, m);
    data.t = *data.t0 + 0.3 * gen.matrix(n, m);
    return data;
}

} // namespace

TEST_CASE("cross_validate basics") {
    oracle::Gen gen(4);
    const Dataset data = toy_dataset(gen, 20, 3, 4);
    RegressionTask task;
    task.method = Method::KR;
    task.kernel = KernelSpec::rbf(1.0);
    CvGrid single;
    single.alphas = {0.3};
    single.sigma_sqs = {2.0};
    const CvResult one = cross_validate(data, task, single, 1);
    CHECK(one.best.alpha == 0.3);
    CHECK(one.best.sigma_sq == 2.0);
    CHECK(one.table.size() == 1);

    CvGrid dup;
    dup.alphas = {0.3, 0.3, 1.0};
    dup.sigma_sqs = {2.0};
    const CvResult d = cross_validate(data, task, dup, 1);
    CHECK(d.table[0].mean_nmse_db == d.table[1].mean_nmse_db);

    CvGrid empty;
    empty.alphas = {};
    empty.sigma_sqs = {1.0};
    CHECK_THROWS_AS(cross_validate(data, task, empty, 1), error);
    CvGrid too_many = single;
    too_many.folds = 21;
    CHECK_THROWS_AS(cross_validate(data, task, too_many, 1), error);
}

TEST_CASE("cross_validate tie-break goes to the smaller alpha") {
    oracle::Gen gen(5);
    const Dataset data = toy_dataset(gen, 15, 2, 3);
    RegressionTask task;
    task.method = Method::KRG;
    task.kernel = KernelSpec::linear();
    task.laplacian = Laplacian::zero(3); // beta has no effect, so every beta ties
    CvGrid grid;
    grid.alphas = {0.5};
    grid.betas = {4.0, 0.0, 1.0};
    const CvResult r = cross_validate(data, task, grid, 2);
    CHECK(r.best.beta == 0.0);
}

TEST_CASE("cross_validate prefers beta > 0 on smooth data") {
    int positive = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        SynthConfig cfg;
        cfg.num_nodes = 20;
        cfg.num_samples = 60;
        cfg.graph.p = 0.3;
        cfg.snr_db = 0.0;
        cfg.seed = 500 + rep;
        const SyntheticData d = make_synthetic_dataset(cfg);
        const Laplacian l = build_laplacian(d.graph);
        // clean rows restricted to the three lowest graph frequencies
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l.matrix());
        const Eigen::MatrixXd u = eig.eigenvectors().leftCols(3);
        const Eigen::MatrixXd rows = generate_correlated_rows(d.covariance, 20, 900 + rep);
        const Eigen::MatrixXd clean = rows * u * u.transpose();
        Dataset train = d.train;
        train.t0 = clean(train.sample_index, Eigen::all);
        train.t = add_noise_snr(*train.t0, 0.0, 950 + rep);
        RegressionTask task;
        task.method = Method::KRG;
        task.kernel = KernelSpec::precomputed(d.covariance);
        task.laplacian = l;
        CvGrid grid;
        grid.alphas = {0.01, 0.1, 1.0};
        grid.betas = {0.0, 0.1, 1.0, 10.0};
        if (cross_validate(train, task, grid, rep).best.beta > 0.0) ++positive;
    }
    CHECK(positive >= 16);
}

TEST_CASE("krr baseline hand case") {
    Eigen::Matrix4d k;
    k << 2.0, 0.5, 0.3, 0.1,
         0.5, 1.5, 0.2, 0.4,
         0.3, 0.2, 1.0, 0.6,
         0.1, 0.4, 0.6, 1.2;
    const std::vector<int> observed{2, 3};
    const double mu = 0.25;
    Eigen::Vector2d x(1.0, -2.0);
    // Phi K Phi^T + mu S I = [[1.5, 0.6], [0.6, 1.7]]
    const double a = 1.0 + 0.5, b = 0.6, d = 1.2 + 0.5;
    const double det = a * d - b * b;
    const Eigen::Vector2d alpha((d * x(0) - b * x(1)) / det, (-b * x(0) + a * x(1)) / det);
    const Eigen::Vector4d expect = k.col(2) * alpha(0) + k.col(3) * alpha(1);
    const Eigen::VectorXd got = krr_baseline(k, observed, x, mu);
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(krr_baseline(k, observed, Eigen::Vector2d::Zero(), mu).isZero(0.0));
    CHECK_THROWS_AS(krr_baseline(k, observed, x, 0.0), error);
    CHECK_THROWS_AS(krr_baseline(k, {2, 2}, x, mu), error);
    CHECK_THROWS_AS(krr_baseline(k, {2, 4}, x, mu), error);
}

TEST_CASE("property: krr interpolates observed nodes as mu -> 0") {
    oracle::Gen gen(6);
    for (int trial = 0; trial < 10; ++trial) {
        const int p = gen.integer(2, 12);
        const Eigen::MatrixXd k = gen.psd(p, p) + 0.1 * Eigen::MatrixXd::Identity(p, p);
        std::vector<int> all(static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
        const Eigen::VectorXd x = gen.matrix(p, 1);
        CHECK((krr_baseline(k, all, x, 1e-10) - x).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("diffusion kernel and KRR product graph") {
    oracle::Gen gen(7);
    const Laplacian l = build_laplacian(Graph(gen.adjacency(5, 0.6)));
    CHECK(rel_error(diffusion_kernel(l, 0.0), Eigen::MatrixXd::Identity(5, 5)) <= 1e-14);
    const Eigen::MatrixXd k = diffusion_kernel(l, 0.7);
    CHECK(is_symmetric(k, 1e-12));
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() > 0.0);
    CHECK((k * Eigen::VectorXd::Ones(5) - Eigen::VectorXd::Ones(5)).norm() <= 1e-12);

    const Eigen::MatrixXd a = gen.adjacency(4, 0.5);
    Eigen::MatrixXd block(8, 8);
    block << a, Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(4, 4), a;
    CHECK(krr_product_graph(Graph(a)).adjacency() == block);
}

TEST_CASE("fit_and_predict dispatch") {
    oracle::Gen gen(8);
    const Dataset data = toy_dataset(gen, 12, 3, 4);
    const Eigen::MatrixXd xt = gen.matrix(5, 3);
    const Laplacian l = build_laplacian(Graph(gen.adjacency(4, 0.7)));
    MethodParams p;
    p.alpha = 0.2;
    p.beta = 1.5;
    p.sigma_sq = 1.0;

    RegressionTask lr;
    lr.method = Method::LR;
    const FitPredict a = fit_and_predict(lr, p, data, xt);
    const Eigen::MatrixXd w = (data.x.transpose() * data.x + 0.2 * Eigen::MatrixXd::Identity(3, 3))
                                  .fullPivLu()
                                  .solve(data.x.transpose() * data.t);
    CHECK(rel_error(a.test_pred, xt * w) <= 1e-10);

    RegressionTask lrg = lr;
    lrg.method = Method::LRG;
    lrg.laplacian = l;
    RegressionTask krg_lin;
    krg_lin.method = Method::KRG;
    krg_lin.kernel = KernelSpec::linear();
    krg_lin.laplacian = l;
    CHECK(rel_error(fit_and_predict(lrg, p, data, xt).test_pred,
                    fit_and_predict(krg_lin, p, data, xt).test_pred) <= 1e-8);

    RegressionTask missing;
    missing.method = Method::KRG;
    missing.kernel = KernelSpec::rbf(1.0);
    CHECK_THROWS_AS(fit_and_predict(missing, p, data, xt), error);
}

namespace {

BenchScenario small_scenario() {
    BenchScenario sc;
    sc.methods = {Method::KR, Method::KRG};
    sc.n_train = {20};
    sc.snr_db = {5.0};
    sc.realizations = 2;
    sc.seed = 99;
    SynthConfig cfg;
    cfg.num_nodes = 10;
    cfg.num_samples = 40;
    cfg.graph.p = 0.3;
    sc.synth = cfg;
    sc.grid.alphas = {0.1, 1.0};
    sc.grid.betas = {0.0};
    sc.grid.folds = 4;
    return sc;
}

} // namespace

TEST_CASE("run_benchmark: single cell, reduction and determinism") {
    BenchScenario one = small_scenario();
    one.methods = {Method::KR};
    one.realizations = 1;
    const BenchReport r1 = run_benchmark(one);
    CHECK(r1.failures.empty());
    REQUIRE(r1.results.size() == 2);
    CHECK(r1.results[1].split == "test");
    CHECK(r1.results[1].num_realizations == 1);
    CHECK(std::isfinite(r1.results[1].nmse_db));

    const BenchReport r = run_benchmark(small_scenario());
    REQUIRE(r.results.size() == 4);
    for (int s = 0; s < 2; ++s) {
        CHECK(r.results[static_cast<std::size_t>(s)].nmse_db == r.results[static_cast<std::size_t>(2 + s)].nmse_db);
        CHECK(r.results[static_cast<std::size_t>(s)].nmse_db_mean_of_db ==
              r.results[static_cast<std::size_t>(2 + s)].nmse_db_mean_of_db);
    }
    const BenchReport again = run_benchmark(small_scenario());
    for (std::size_t i = 0; i < r.results.size(); ++i) CHECK(again.results[i].nmse_db == r.results[i].nmse_db);
}

TEST_CASE("run_benchmark isolates failing cells") {
    BenchScenario sc = small_scenario();
    sc.methods = {Method::KR, Method::LR};
    sc.realizations = 1;
    const BenchReport r = run_benchmark(sc);
    CHECK(r.results.size() == 2);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].method == Method::LR);
    sc.n_train = {30};
    const BenchReport big = run_benchmark(sc);
    CHECK(big.results.empty());
    CHECK(big.failures.size() == 2);
}
