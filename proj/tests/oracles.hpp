#pragma once

// Reference implementations used only by the tests. They deliberately take
// the slow, direct route so they share no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

inline Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

/// Dense (MN) x (MN) solve of [I_M (x) (K + aI) + b (L (x) K)] vec(Psi) = vec(T).
inline Eigen::MatrixXd dense_dual_solve(const Eigen::MatrixXd& k, const Eigen::MatrixXd& t,
                                        const Eigen::MatrixXd& l, double alpha, double beta) {
    const Eigen::Index n = k.rows();
    const Eigen::Index m = l.rows();
    const Eigen::MatrixXd kreg = k + alpha * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd sys =
        kron(Eigen::MatrixXd::Identity(m, m), kreg) + beta * kron(l.transpose(), k);
    return unvec(sys.fullPivLu().solve(vec(t)), n, m);
}

/// Primal normal equations in Kronecker form.
inline Eigen::MatrixXd dense_primal_solve(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& t,
                                          const Eigen::MatrixXd& l, double alpha, double beta) {
    const Eigen::MatrixXd g = phi.transpose() * phi;
    const Eigen::Index d = g.rows();
    const Eigen::Index m = l.rows();
    const Eigen::MatrixXd sys = kron(Eigen::MatrixXd::Identity(m, m),
                                     g + alpha * Eigen::MatrixXd::Identity(d, d)) +
                                beta * kron(l.transpose(), g);
    return unvec(sys.fullPivLu().solve(vec(phi.transpose() * t)), d, m);
}

/// KR closed form y = T^T (K + aI)^{-1} k(x), one row per test sample.
inline Eigen::MatrixXd kr_closed_form(const Eigen::MatrixXd& k, const Eigen::MatrixXd& k_test,
                                      const Eigen::MatrixXd& t, double alpha) {
    const Eigen::Index n = k.rows();
    const Eigen::MatrixXd inv =
        (k + alpha * Eigen::MatrixXd::Identity(n, n)).fullPivLu().inverse();
    return k_test * inv * t;
}

/// L = sum over edges of w (e_i - e_j)(e_i - e_j)^T.
inline Eigen::MatrixXd edge_sum_laplacian(const Eigen::MatrixXd& adjacency) {
    const Eigen::Index m = adjacency.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
            e(i) = 1.0;
            e(j) = -1.0;
            l += adjacency(i, j) * e * e.transpose();
        }
    }
    return l;
}

/// Sum over edges of w_ij (x_i - x_j)^2.
inline double edge_sum_roughness(const Eigen::MatrixXd& adjacency, const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
        for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j)
            s += adjacency(i, j) * (x(i) - x(j)) * (x(i) - x(j));
    return s;
}

inline Eigen::MatrixXd rbf_gram_loops(const Eigen::MatrixXd& x, double sigma_sq) {
    const Eigen::Index n = x.rows();
    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) z += (x.row(i) - x.row(j)).squaredNorm();
    z /= static_cast<double>(n);
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = std::exp(-(x.row(i) - x.row(j)).squaredNorm() / (sigma_sq * z));
    return k;
}

/// Central differences of a scalar function of a matrix.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                         const Eigen::MatrixXd& x, double h) {
    Eigen::MatrixXd g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            Eigen::MatrixXd xp = x;
            Eigen::MatrixXd xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            g(i, j) = (f(xp) - f(xm)) / (2.0 * h);
        }
    }
    return g;
}

/// Three-node L-step by brute force: w = (w01, w02, w12) on a grid over the
/// simplex w >= 0, 2 sum w = budget, minimizing c.w + nu tr(L^2).
struct GridMin {
    Eigen::Vector3d w;
    double objective;
};
inline GridMin simplex_grid_three(const Eigen::Vector3d& c, double nu, double budget, int steps) {
    const double total = budget / 2.0;
    GridMin best{Eigen::Vector3d::Zero(), INFINITY};
    for (int a = 0; a <= steps; ++a) {
        for (int b = 0; a + b <= steps; ++b) {
            const Eigen::Vector3d w(total * a / steps, total * b / steps,
                                    total * (steps - a - b) / steps);
            Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
            const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
            for (int k = 0; k < 3; ++k) {
                const int i = pairs[k][0];
                const int j = pairs[k][1];
                l(i, j) -= w(k);
                l(j, i) -= w(k);
                l(i, i) += w(k);
                l(j, j) += w(k);
            }
            const double obj = c.dot(w) + nu * (l * l).trace();
            if (obj < best.objective) best = GridMin{w, obj};
        }
    }
    return best;
}

inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mid;
        i = j + 1;
    }
    return r;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Test-side random source, independent of the library's Rng.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c) {
        Eigen::MatrixXd m(r, c);
        std::normal_distribution<double> nd;
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(eng_);
        return m;
    }
    /// Symmetric nonnegative weights with zero diagonal, each pair present
    /// with probability p.
    Eigen::MatrixXd adjacency(Eigen::Index m, double p, double wmax = 2.0) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = i + 1; j < m; ++j)
                if (uniform() < p) a(i, j) = a(j, i) = uniform(0.1, wmax);
        return a;
    }
    /// Random PSD matrix B B^T of the given rank.
    Eigen::MatrixXd psd(Eigen::Index n, Eigen::Index rank) {
        const Eigen::MatrixXd b = matrix(n, rank);
        return b * b.transpose();
    }

private:
    std::mt19937_64 eng_;
};

} // namespace oracle
