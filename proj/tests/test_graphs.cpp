#include "doctest.h"

#include <cmath>

#include "gkr/error.hpp"
#include "gkr/graphs.hpp"
#include "gkr/linalg.hpp"
#include "oracles.hpp"

using gkr::Graph;
using gkr::Laplacian;

namespace {

Eigen::MatrixXd k3() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
    a.diagonal().setZero();
    return a;
}

void check_laplacian_invariants(const Eigen::MatrixXd& l) {
    CHECK(gkr::is_symmetric(l));
    const double scale = std::max(1.0, l.norm());
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10 * scale);
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        CHECK(l(i, i) >= 0.0);
        for (Eigen::Index j = 0; j < l.cols(); ++j)
            if (i != j) CHECK(l(i, j) <= 0.0);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()));
}

} // namespace

TEST_CASE("build_laplacian on small graphs") {
    CHECK(gkr::build_laplacian(Graph::empty(3)).matrix().isZero(0.0));

    Eigen::MatrixXd edge(2, 2);
    edge << 0, 1, 1, 0;
    Eigen::MatrixXd expect(2, 2);
    expect << 1, -1, -1, 1;
    CHECK(gkr::build_laplacian(Graph(edge)).matrix() == expect);

    const Eigen::MatrixXd l = gkr::build_laplacian(Graph(k3())).matrix();
    CHECK(l.diagonal() == Eigen::Vector3d::Constant(2.0));
    CHECK(l(0, 1) == -1.0);
    const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(l).eigenvalues();
    CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ev(1) == doctest::Approx(3.0));
    CHECK(ev(2) == doctest::Approx(3.0));
}

TEST_CASE("invalid adjacency is rejected") {
    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 2, 0;
    CHECK_THROWS_AS(Graph{asym}, gkr::error);
    Eigen::MatrixXd neg(2, 2);
    neg << 0, -1, -1, 0;
    CHECK_THROWS_AS(Graph{neg}, gkr::error);
    Eigen::MatrixXd loop(2, 2);
    loop << 1, 1, 1, 0;
    CHECK_THROWS_AS(Graph{loop}, gkr::error);
}

TEST_CASE("Laplacian::from_matrix validation") {
    Eigen::MatrixXd good(2, 2);
    good << 1, -1, -1, 1;
    CHECK_NOTHROW(Laplacian::from_matrix(good));
    Eigen::MatrixXd bad_rows(2, 2);
    bad_rows << 1, -0.5, -0.5, 1;
    CHECK_THROWS_AS(Laplacian::from_matrix(bad_rows), gkr::error);
    Eigen::MatrixXd pos_off(2, 2);
    pos_off << -1, 1, 1, -1;
    CHECK_THROWS_AS(Laplacian::from_matrix(pos_off), gkr::error);
}

TEST_CASE("quadratic_form examples") {
    const Laplacian l = gkr::build_laplacian(Graph(k3()));
    CHECK(gkr::quadratic_form(l, Eigen::Vector3d(1, 0, 0)) == doctest::Approx(2.0));
    CHECK(gkr::quadratic_form(l, Eigen::Vector3d::Constant(4.2)) == doctest::Approx(0.0));
    CHECK(gkr::quadratic_form(Laplacian::zero(3), Eigen::Vector3d(1, 2, 3)) == 0.0);
    CHECK_THROWS_AS(gkr::quadratic_form(l, Eigen::Vector2d(1, 2)), gkr::error);
}

TEST_CASE("property: quadratic form matches edge sum and is nonnegative") {
    oracle::Gen gen(11);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = gen.integer(2, 50);
        const Eigen::MatrixXd a = gen.adjacency(m, gen.uniform(0.05, 0.9));
        const Laplacian l = gkr::build_laplacian(Graph(a));
        check_laplacian_invariants(l.matrix());
        CHECK(gkr::rel_error(l.matrix(), oracle::edge_sum_laplacian(a)) <= 1e-12);
        for (int k = 0; k < 35; ++k) {
            const Eigen::VectorXd x = gen.matrix(m, 1);
            const double q = gkr::quadratic_form(l, x);
            const double e = oracle::edge_sum_roughness(a, x);
            CHECK(q >= 0.0);
            CHECK(std::abs(q - e) <= 1e-10 * std::max(1.0, std::abs(e)));
        }
    }
}

TEST_CASE("erdos_renyi") {
    CHECK(gkr::erdos_renyi(10, 0.0, 1).num_edges() == 0);
    CHECK(gkr::erdos_renyi(10, 1.0, 1).num_edges() == 45);
    const Graph g = gkr::erdos_renyi(50, 0.1, 42);
    const double mean = 1225 * 0.1;
    const double sd = std::sqrt(1225 * 0.1 * 0.9);
    CHECK(std::abs(g.num_edges() - mean) <= 4 * sd);
    CHECK(gkr::erdos_renyi(50, 0.1, 42).adjacency() == g.adjacency());
    CHECK(gkr::erdos_renyi(50, 0.1, 43).adjacency() != g.adjacency());
    CHECK_THROWS_AS(gkr::erdos_renyi(5, 1.5, 1), gkr::error);
    check_laplacian_invariants(gkr::build_laplacian(g).matrix());
}

namespace {

bool connected(const Eigen::MatrixXd& a) {
    std::vector<bool> seen(static_cast<std::size_t>(a.rows()), false);
    std::vector<Eigen::Index> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const Eigen::Index i = stack.back();
        stack.pop_back();
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (a(i, j) > 0 && !seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                stack.push_back(j);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

} // namespace

TEST_CASE("barabasi_albert") {
    CHECK(gkr::barabasi_albert(2, 1, 3).num_edges() == 1);
    // clique on 3 nodes (3 edges) then 2 edges for each of the 47 later nodes
    static_assert(gkr::barabasi_albert_edge_count(50, 2) == 3 + 2 * 47);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Graph g = gkr::barabasi_albert(50, 2, seed);
        CHECK(g.num_edges() == 97);
        CHECK(connected(g.adjacency()));
        CHECK(g.adjacency() == gkr::barabasi_albert(50, 2, seed).adjacency());
    }
    CHECK_THROWS_AS(gkr::barabasi_albert(5, 5, 1), gkr::error);
    CHECK_THROWS_AS(gkr::barabasi_albert(5, 0, 1), gkr::error);
}

TEST_CASE("barabasi_albert is heavier-tailed than erdos_renyi at equal edge count") {
    const int m = 50;
    const double p = 97.0 / 1225.0;
    double ba_max = 0.0;
    double er_max = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ba_max += gkr::barabasi_albert(m, 2, seed).degrees().maxCoeff();
        er_max += gkr::erdos_renyi(m, p, 1000 + seed).degrees().maxCoeff();
    }
    CHECK(ba_max / 100 > er_max / 100);
}

TEST_CASE("geodesic_adjacency") {
    Eigen::MatrixXd d2(2, 2);
    d2 << 0, 1, 1, 0;
    CHECK(gkr::geodesic_adjacency(d2).adjacency()(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

    const int m = 5;
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(m, m, 3.7);
    d.diagonal().setZero();
    const Eigen::MatrixXd a = gkr::geodesic_adjacency(d).adjacency();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            CHECK(a(i, j) == doctest::Approx(i == j ? 0.0 : std::exp(-1.0 / (m * m - m))));

    Eigen::MatrixXd far = d;
    far(1, 3) = far(3, 1) = 50.0;
    const Eigen::MatrixXd af = gkr::geodesic_adjacency(far).adjacency();
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (!(i == 1 && j == 3)) CHECK(af(1, 3) < af(i, j));

    Eigen::MatrixXd bad = d;
    bad(0, 1) = -1.0;
    CHECK_THROWS_AS(gkr::geodesic_adjacency(bad), gkr::error);
    bad(0, 1) = 2.0;
    CHECK_THROWS_AS(gkr::geodesic_adjacency(bad), gkr::error);
}

TEST_CASE("cartesian_product") {
    oracle::Gen gen(5);
    const Eigen::MatrixXd a = gen.adjacency(4, 0.6);
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    const Eigen::MatrixXd p = gkr::cartesian_product(Graph(a), Graph(swap)).adjacency();
    Eigen::MatrixXd block(8, 8);
    block << a, Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Identity(4, 4), a;
    CHECK(p == block);

    CHECK(gkr::cartesian_product(Graph(a), Graph::empty(1)).adjacency() == a);

    Eigen::MatrixXd p2(2, 2);
    p2 << 0, 1, 1, 0;
    const Graph c4 = gkr::cartesian_product(Graph(p2), Graph(p2));
    CHECK(c4.num_edges() == 4);
    CHECK(c4.degrees() == Eigen::Vector4d::Constant(2.0));
}

TEST_CASE("property: product is a node permutation of the other Kronecker ordering") {
    oracle::Gen gen(15);
    for (int trial = 0; trial < 20; ++trial) {
        const int ma = gen.integer(1, 5);
        const int mb = gen.integer(1, 5);
        const Eigen::MatrixXd a = gen.adjacency(ma, 0.5, 2.0);
        const Eigen::MatrixXd b = gen.adjacency(mb, 0.5, 2.0);
        // node (a, b) sits at a * mb + b in A (x) I + I (x) B
        const Eigen::MatrixXd other = oracle::kron(a, Eigen::MatrixXd::Identity(mb, mb)) +
                                      oracle::kron(Eigen::MatrixXd::Identity(ma, ma), b);
        Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(ma * mb, ma * mb);
        for (int i = 0; i < ma; ++i)
            for (int j = 0; j < mb; ++j) perm(j * ma + i, i * mb + j) = 1.0;
        CHECK(gkr::cartesian_product(Graph(a), Graph(b)).adjacency() == perm * other * perm.transpose());
    }
}

TEST_CASE("property: product degrees add for unit weights") {
    oracle::Gen gen(8);
    for (int trial = 0; trial < 20; ++trial) {
        const int ma = gen.integer(1, 6);
        const int mb = gen.integer(1, 6);
        Eigen::MatrixXd a = gen.adjacency(ma, 0.5);
        Eigen::MatrixXd b = gen.adjacency(mb, 0.5);
        a = (a.array() > 0).cast<double>();
        b = (b.array() > 0).cast<double>();
        const Graph g = gkr::cartesian_product(Graph(a), Graph(b));
        REQUIRE(g.num_nodes() == ma * mb);
        const Eigen::VectorXd da = a.rowwise().sum();
        const Eigen::VectorXd db = b.rowwise().sum();
        for (int x = 0; x < ma; ++x)
            for (int y = 0; y < mb; ++y) CHECK(g.degrees()(y * ma + x) == da(x) + db(y));
    }
}

TEST_CASE("spectral_rescale") {
    Eigen::MatrixXd edge(2, 2);
    edge << 0, 1, 1, 0;
    const Laplacian l = gkr::build_laplacian(Graph(edge));
    const Laplacian r = gkr::spectral_rescale(l);
    CHECK(gkr::rel_error(r.matrix(), l.matrix() / 2.0) <= 1e-15);
    CHECK(gkr::rel_error(gkr::spectral_rescale(r).matrix(), r.matrix()) <= 1e-14);
    CHECK_THROWS_AS(gkr::spectral_rescale(Laplacian::zero(3)), gkr::error);

    oracle::Gen gen(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Laplacian big = gkr::build_laplacian(Graph(gen.adjacency(12, 0.4)));
        if (big.is_zero()) continue;
        CHECK(gkr::spectral_radius(gkr::spectral_rescale(big)) == doctest::Approx(1.0).epsilon(1e-10));
    }
}
