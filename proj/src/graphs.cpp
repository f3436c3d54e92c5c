#include "gkr/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "gkr/error.hpp"
#include "gkr/linalg.hpp"
#include "gkr/random.hpp"

namespace gkr {

Graph::Graph(Eigen::MatrixXd adjacency) : adjacency_(std::move(adjacency)) {
    if (adjacency_.rows() != adjacency_.cols()) {
        throw error(errc::invalid_graph, "adjacency matrix must be square");
    }
    if (adjacency_.rows() < 1) {
        throw error(errc::invalid_graph, "graph needs at least one node");
    }
    if (!adjacency_.allFinite()) {
        throw error(errc::invalid_graph, "adjacency has non-finite entries");
    }
    if (!is_symmetric(adjacency_)) {
        throw error(errc::invalid_graph, "adjacency matrix is not symmetric");
    }
    for (Eigen::Index i = 0; i < adjacency_.rows(); ++i) {
        if (adjacency_(i, i) != 0.0) {
            throw error(errc::invalid_graph, "adjacency diagonal must be zero (self loops)");
        }
        for (Eigen::Index j = 0; j < adjacency_.cols(); ++j) {
            if (adjacency_(i, j) < 0.0) {
                std::ostringstream msg;
                msg << "negative edge weight at (" << i << ", " << j << ")";
                throw error(errc::invalid_graph, msg.str());
            }
        }
    }
    const Eigen::MatrixXd sym = 0.5 * (adjacency_ + adjacency_.transpose());
    adjacency_ = sym;
}

Graph Graph::empty(int num_nodes) {
    return Graph(Eigen::MatrixXd::Zero(num_nodes, num_nodes));
}

int Graph::num_edges() const {
    int count = 0;
    for (Eigen::Index i = 0; i < adjacency_.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < adjacency_.cols(); ++j) {
            count += adjacency_(i, j) > 0.0 ? 1 : 0;
        }
    }
    return count;
}

Laplacian Laplacian::from_matrix(Eigen::MatrixXd matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
        throw error(errc::invalid_laplacian, "Laplacian must be a nonempty square matrix");
    }
    if (!matrix.allFinite()) {
        throw error(errc::invalid_laplacian, "Laplacian has non-finite entries");
    }
    if (!is_symmetric(matrix)) {
        throw error(errc::invalid_laplacian, "Laplacian is not symmetric");
    }
    const double fro = matrix.norm();
    const double row_tol = 1e-10 * std::max(fro, 1e-300);
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        if (std::abs(matrix.row(i).sum()) > row_tol) {
            std::ostringstream msg;
            msg << "Laplacian row " << i << " does not sum to zero";
            throw error(errc::invalid_laplacian, msg.str());
        }
        if (matrix(i, i) < 0.0) {
            throw error(errc::invalid_laplacian, "Laplacian has a negative diagonal entry");
        }
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (i != j && matrix(i, j) > 0.0) {
                throw error(errc::invalid_laplacian, "Laplacian has a positive off-diagonal entry");
            }
        }
    }
    try {
        (void)psd_eigen(matrix);
    } catch (const error&) {
        throw error(errc::invalid_laplacian, "Laplacian is not positive semidefinite");
    }
    const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
    return Laplacian(sym);
}

Laplacian Laplacian::zero(int num_nodes) {
    if (num_nodes < 1) {
        throw error(errc::invalid_argument, "Laplacian needs at least one node");
    }
    return Laplacian(Eigen::MatrixXd::Zero(num_nodes, num_nodes));
}

Graph Laplacian::to_graph() const {
    Eigen::MatrixXd a = -matrix_;
    a.diagonal().setZero();
    // entries like -0.0 or roundoff-negative zeros
    a = a.cwiseMax(0.0);
    return Graph(a);
}

Laplacian build_laplacian(const Graph& g) {
    Eigen::MatrixXd l = -g.adjacency();
    l.diagonal() = g.degrees();
    return Laplacian(std::move(l));
}

double quadratic_form(const Laplacian& l, const Eigen::VectorXd& x) {
    if (x.size() != l.num_nodes()) {
        throw error(errc::dimension_mismatch, "signal length does not match the number of nodes");
    }
    return x.dot(l.matrix() * x);
}

Graph erdos_renyi(int num_nodes, double p, std::uint64_t seed) {
    if (num_nodes < 2) {
        throw error(errc::invalid_argument, "erdos_renyi needs at least 2 nodes");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw error(errc::invalid_argument, "edge probability must lie in [0, 1]");
    }
    Rng rng(seed);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
    for (int i = 0; i < num_nodes; ++i) {
        for (int j = i + 1; j < num_nodes; ++j) {
            if (rng.uniform() < p) {
                a(i, j) = a(j, i) = 1.0;
            }
        }
    }
    return Graph(std::move(a));
}

Graph barabasi_albert(int num_nodes, int m_attach, std::uint64_t seed) {
    if (m_attach < 1 || m_attach >= num_nodes) {
        throw error(errc::invalid_argument, "barabasi_albert needs 1 <= m_attach < num_nodes");
    }
    Rng rng(seed);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
    // every edge endpoint appears once here, so uniform picks are degree-proportional
    std::vector<int> endpoints;
    const int seed_nodes = m_attach + 1;
    for (int i = 0; i < seed_nodes; ++i) {
        for (int j = i + 1; j < seed_nodes; ++j) {
            a(i, j) = a(j, i) = 1.0;
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    }
    for (int v = seed_nodes; v < num_nodes; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < m_attach) {
            targets.insert(endpoints[rng.below(endpoints.size())]);
        }
        for (int t : targets) {
            a(v, t) = a(t, v) = 1.0;
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    return Graph(std::move(a));
}

Graph geodesic_adjacency(const Eigen::MatrixXd& distances) {
    if (distances.rows() != distances.cols() || distances.rows() < 1) {
        throw error(errc::invalid_graph, "distance matrix must be square");
    }
    if (!distances.allFinite() || !is_symmetric(distances)) {
        throw error(errc::invalid_graph, "distance matrix must be finite and symmetric");
    }
    if ((distances.array() < 0.0).any()) {
        throw error(errc::invalid_graph, "distances must be nonnegative");
    }
    if (!distances.diagonal().isZero(0.0)) {
        throw error(errc::invalid_graph, "distance matrix diagonal must be zero");
    }
    const double total = distances.squaredNorm();
    const Eigen::Index m = distances.rows();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    if (total == 0.0) {
        throw error(errc::invalid_graph, "all distances are zero; geodesic weights are undefined");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j) {
                const double d = distances(i, j);
                a(i, j) = std::exp(-d * d / total);
            }
        }
    }
    return Graph(std::move(a));
}

Graph cartesian_product(const Graph& a, const Graph& b) {
    const Eigen::Index ma = a.num_nodes();
    const Eigen::Index mb = b.num_nodes();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ma * mb, ma * mb);
    for (Eigen::Index blk = 0; blk < mb; ++blk) {
        out.block(blk * ma, blk * ma, ma, ma) = a.adjacency();
    }
    for (Eigen::Index r = 0; r < mb; ++r) {
        for (Eigen::Index c = 0; c < mb; ++c) {
            const double w = b.adjacency()(r, c);
            if (w != 0.0) {
                out.block(r * ma, c * ma, ma, ma).diagonal().setConstant(w);
            }
        }
    }
    return Graph(std::move(out));
}

double spectral_radius(const Laplacian& l) {
    return psd_eigen(l.matrix()).values.maxCoeff();
}

Laplacian spectral_rescale(const Laplacian& l) {
    if (l.is_zero()) {
        throw error(errc::cannot_rescale, "cannot rescale the zero Laplacian (graph collapsed)");
    }
    const double rho = spectral_radius(l);
    if (!(rho > 0.0)) {
        throw error(errc::cannot_rescale, "Laplacian has zero spectral radius");
    }
    return Laplacian(l.matrix() / rho);
}

} // namespace gkr
