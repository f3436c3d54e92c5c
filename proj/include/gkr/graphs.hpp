#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace gkr {

/// Undirected weighted graph. The adjacency is symmetric, nonnegative and has a
/// zero diagonal; the constructor enforces this.
class Graph {
public:
    /// Throws invalid_graph when the invariants do not hold. Symmetry is
    /// checked to 1e-12 relative and the stored matrix is exactly symmetrized.
    explicit Graph(Eigen::MatrixXd adjacency);

    static Graph empty(int num_nodes);

    [[nodiscard]] const Eigen::MatrixXd& adjacency() const { return adjacency_; }
    [[nodiscard]] int num_nodes() const { return static_cast<int>(adjacency_.rows()); }
    [[nodiscard]] Eigen::VectorXd degrees() const { return adjacency_.rowwise().sum(); }
    /// Number of unordered pairs with positive weight.
    [[nodiscard]] int num_edges() const;

private:
    Eigen::MatrixXd adjacency_;
};

/// Combinatorial graph Laplacian L = D - A.
class Laplacian {
public:
    /// Validates a user-supplied Laplacian: symmetric, zero row sums within
    /// 1e-10 ||L||_F, nonpositive off-diagonal, nonnegative diagonal, PSD.
    static Laplacian from_matrix(Eigen::MatrixXd matrix);
    /// All-zero Laplacian, the "no graph" case used by plain kernel regression.
    static Laplacian zero(int num_nodes);

    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return matrix_; }
    [[nodiscard]] int num_nodes() const { return static_cast<int>(matrix_.rows()); }
    [[nodiscard]] bool is_zero() const { return matrix_.isZero(0.0); }
    /// Adjacency with A(i,j) = -L(i,j) off the diagonal.
    [[nodiscard]] Graph to_graph() const;

private:
    friend Laplacian build_laplacian(const Graph& g);
    friend Laplacian spectral_rescale(const Laplacian& l);
    explicit Laplacian(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}

    Eigen::MatrixXd matrix_;
};

Laplacian build_laplacian(const Graph& g);

/// x^T L x.
double quadratic_form(const Laplacian& l, const Eigen::VectorXd& x);

/// G(M, p): every unordered pair becomes a unit-weight edge with probability p.
Graph erdos_renyi(int num_nodes, double p, std::uint64_t seed);

/// Preferential attachment. Starts from a clique on m_attach + 1 nodes; every
/// later node attaches to m_attach distinct existing nodes chosen with
/// probability proportional to their current degree. The edge count is
/// therefore m(m+1)/2 + m(M - m - 1).
Graph barabasi_albert(int num_nodes, int m_attach, std::uint64_t seed);

/// Edge count produced by barabasi_albert for the given sizes.
constexpr long barabasi_albert_edge_count(int num_nodes, int m_attach) {
    return static_cast<long>(m_attach) * (m_attach + 1) / 2 +
           static_cast<long>(m_attach) * (num_nodes - m_attach - 1);
}

/// A(i,j) = exp(-d_ij^2 / sum_{k,l} d_kl^2) for i != j. The normalizing sum runs
/// over all ordered pairs (the zero diagonal contributes nothing).
Graph geodesic_adjacency(const Eigen::MatrixXd& distances);

/// Cartesian product graph with adjacency I_{M_B} (x) A + B (x) I_{M_A}: node
/// (a, b) has index b * M_A + a, so for B = [[0,1],[1,0]] the result is the
/// block matrix [[A, I], [I, A]].
Graph cartesian_product(const Graph& a, const Graph& b);

/// L divided by its spectral radius. Throws cannot_rescale for L = 0.
Laplacian spectral_rescale(const Laplacian& l);

/// Largest eigenvalue of a Laplacian (its spectral radius).
double spectral_radius(const Laplacian& l);

} // namespace gkr
