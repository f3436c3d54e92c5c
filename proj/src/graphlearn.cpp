#include "gkr/graphlearn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "gkr/error.hpp"
#include "gkr/linalg.hpp"

namespace gkr {

void GraphLearnConfig::validate() const {
    if (!(nu >= 0.0) || !std::isfinite(nu)) {
        throw error(errc::invalid_argument, "nu must be a finite nonnegative number");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw error(errc::invalid_argument, "beta must be a finite nonnegative number");
    }
    if (max_outer_iters < 1) {
        throw error(errc::invalid_argument, "max_outer_iters must be at least 1");
    }
    if (!(tol > 0.0)) {
        throw error(errc::invalid_argument, "tol must be positive");
    }
    if (trace_budget && !(*trace_budget > 0.0 && std::isfinite(*trace_budget))) {
        throw error(errc::invalid_argument, "trace_budget must be positive");
    }
    if (max_inner_iters < 1 || !(kkt_tol > 0.0)) {
        throw error(errc::invalid_argument, "inner solver limits must be positive");
    }
}

Eigen::Index EdgeWeights::pair_index(int i, int j, int num_nodes) {
    if (i > j) {
        std::swap(i, j);
    }
    // pairs before row i: sum_{r < i} (M - 1 - r)
    return static_cast<Eigen::Index>(i) * (2 * num_nodes - i - 1) / 2 + (j - i - 1);
}

EdgeWeights EdgeWeights::uniform(int num_nodes, double total) {
    const Eigen::Index p = num_pairs(num_nodes);
    return EdgeWeights{num_nodes, Eigen::VectorXd::Constant(p, total / static_cast<double>(p))};
}

EdgeWeights EdgeWeights::from_laplacian(const Laplacian& l) {
    const int m = l.num_nodes();
    EdgeWeights out{m, Eigen::VectorXd(num_pairs(m))};
    Eigen::Index k = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            out.w(k++) = std::max(0.0, -l.matrix()(i, j));
        }
    }
    return out;
}

Eigen::MatrixXd EdgeWeights::laplacian_matrix() const {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
    Eigen::Index k = 0;
    for (int i = 0; i < num_nodes; ++i) {
        for (int j = i + 1; j < num_nodes; ++j) {
            const double v = w(k++);
            l(i, j) = l(j, i) = -v;
            l(i, i) += v;
            l(j, j) += v;
        }
    }
    return l;
}

Laplacian EdgeWeights::laplacian() const {
    Eigen::MatrixXd a = -laplacian_matrix();
    a.diagonal().setZero();
    return build_laplacian(Graph(a.cwiseMax(0.0)));
}

Eigen::VectorXd project_scaled_simplex(const Eigen::VectorXd& v, double total) {
    const Eigen::Index n = v.size();
    if (n == 0) {
        return v;
    }
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumulative += sorted[static_cast<std::size_t>(k)];
        const double candidate = (cumulative - total) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) {
            shift = candidate;
        }
    }
    return (v.array() - shift).cwiseMax(0.0).matrix();
}

Eigen::VectorXd pair_costs(const Eigen::MatrixXd& y, double beta) {
    const auto m = static_cast<int>(y.cols());
    Eigen::VectorXd c(EdgeWeights::num_pairs(m));
    Eigen::Index k = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            c(k++) = beta * (y.col(i) - y.col(j)).squaredNorm();
        }
    }
    return c;
}

namespace {

// tr(L^2) = sum_i d_i^2 + 2 sum_{i<j} w_ij^2
double frobenius_sq(const EdgeWeights& ew) {
    Eigen::VectorXd degree = Eigen::VectorXd::Zero(ew.num_nodes);
    Eigen::Index k = 0;
    for (int i = 0; i < ew.num_nodes; ++i) {
        for (int j = i + 1; j < ew.num_nodes; ++j) {
            degree(i) += ew.w(k);
            degree(j) += ew.w(k);
            ++k;
        }
    }
    return degree.squaredNorm() + 2.0 * ew.w.squaredNorm();
}

// gradient c + 2 nu Q w, with (Q w)_ij = d_i + d_j + 2 w_ij
Eigen::VectorXd edge_gradient(const Eigen::VectorXd& c, const EdgeWeights& ew, double nu) {
    Eigen::VectorXd degree = Eigen::VectorXd::Zero(ew.num_nodes);
    Eigen::Index k = 0;
    for (int i = 0; i < ew.num_nodes; ++i) {
        for (int j = i + 1; j < ew.num_nodes; ++j) {
            degree(i) += ew.w(k);
            degree(j) += ew.w(k);
            ++k;
        }
    }
    Eigen::VectorXd g(c.size());
    k = 0;
    for (int i = 0; i < ew.num_nodes; ++i) {
        for (int j = i + 1; j < ew.num_nodes; ++j) {
            g(k) = c(k) + 2.0 * nu * (degree(i) + degree(j) + 2.0 * ew.w(k));
            ++k;
        }
    }
    return g;
}

double kkt_measure(const Eigen::VectorXd& c, const EdgeWeights& ew, double nu, double total,
                   double step) {
    const Eigen::VectorXd g = edge_gradient(c, ew, nu);
    const Eigen::VectorXd moved = project_scaled_simplex(ew.w - step * g, total);
    const double mapping = (ew.w - moved).cwiseAbs().maxCoeff() / step;
    return mapping / std::max(1.0, g.cwiseAbs().maxCoeff());
}

} // namespace

double edge_objective(const Eigen::VectorXd& c, const EdgeWeights& w, double nu) {
    return c.dot(w.w) + nu * frobenius_sq(w);
}

LaplacianStepResult solve_laplacian_step(const Eigen::MatrixXd& y, const GraphLearnConfig& cfg,
                                         const EdgeWeights* warm_start) {
    cfg.validate();
    if (!y.allFinite()) {
        throw error(errc::invalid_argument, "L-step input Y has non-finite values");
    }
    const auto m = static_cast<int>(y.cols());
    if (m < 2) {
        throw error(errc::invalid_argument, "graph learning needs at least 2 nodes");
    }
    const double total = 0.5 * cfg.budget(m); // tr(L) = 2 sum w
    const Eigen::VectorXd c = pair_costs(y, cfg.beta);
    const Eigen::Index pairs = c.size();

    EdgeWeights x{m, Eigen::VectorXd()};
    int iterations = 0;
    double kkt = 0.0;

    if (cfg.nu == 0.0) {
        // linear program: split the budget evenly over the cheapest pairs
        const double best = c.minCoeff();
        const double tie = 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff());
        x.w = Eigen::VectorXd::Zero(pairs);
        int count = 0;
        for (Eigen::Index k = 0; k < pairs; ++k) {
            count += c(k) <= best + tie ? 1 : 0;
        }
        for (Eigen::Index k = 0; k < pairs; ++k) {
            if (c(k) <= best + tie) {
                x.w(k) = total / count;
            }
        }
    } else if (pairs == 1) {
        x.w = Eigen::VectorXd::Constant(1, total);
    } else {
        // Q has eigenvalues {2M, M, 2}; the gradient is 4 nu M Lipschitz
        const double step = 1.0 / (4.0 * cfg.nu * m);
        if (warm_start && warm_start->num_nodes == m && warm_start->w.size() == pairs) {
            x.w = project_scaled_simplex(warm_start->w, total);
            // keep the warm start exactly when it is already feasible
            if ((x.w - warm_start->w).cwiseAbs().maxCoeff() <= 1e-15 * total) {
                x.w = warm_start->w;
            }
        } else {
            x = EdgeWeights::uniform(m, total);
        }
        double fx = edge_objective(c, x, cfg.nu);
        EdgeWeights probe = x;
        EdgeWeights z = x;
        double t = 1.0;
        kkt = kkt_measure(c, x, cfg.nu, total, step);
        while (kkt > cfg.kkt_tol && iterations < cfg.max_inner_iters) {
            ++iterations;
            z.w = project_scaled_simplex(probe.w - step * edge_gradient(c, probe, cfg.nu), total);
            const double fz = edge_objective(c, z, cfg.nu);
            const Eigen::VectorXd previous = x.w;
            if (fz <= fx) {
                x.w = z.w;
                fx = fz;
            }
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            probe.w = x.w + (t / t_next) * (z.w - x.w) + ((t - 1.0) / t_next) * (x.w - previous);
            t = t_next;
            if (iterations % 10 == 0) {
                kkt = kkt_measure(c, x, cfg.nu, total, step);
            }
        }
        kkt = kkt_measure(c, x, cfg.nu, total, step);
        if (kkt > cfg.kkt_tol) {
            std::ostringstream msg;
            msg << "L-step did not converge after " << iterations
                << " iterations (KKT residual " << kkt << ")";
            throw error(errc::convergence, msg.str());
        }
    }

    Laplacian constrained = x.laplacian();
    Laplacian rescaled = spectral_rescale(constrained);
    const double objective = edge_objective(c, x, cfg.nu);
    return LaplacianStepResult{std::move(x), std::move(constrained), std::move(rescaled),
                               iterations, kkt, objective};
}

Laplacian laplacian_step(const Eigen::MatrixXd& y, const GraphLearnConfig& cfg) {
    return solve_laplacian_step(y, cfg).rescaled;
}

JointCostTerms joint_cost_terms(const GramMatrix& gram, const Eigen::MatrixXd& psi,
                                const Laplacian& l, const Eigen::MatrixXd& targets,
                                const Hyperparams& hyper, double nu) {
    if (psi.rows() != gram.size() || targets.rows() != gram.size() ||
        psi.cols() != l.num_nodes() || targets.cols() != l.num_nodes()) {
        throw error(errc::dimension_mismatch, "joint cost inputs have inconsistent shapes");
    }
    const Eigen::MatrixXd y = gram.matrix * psi;
    JointCostTerms terms;
    terms.data = (targets - y).squaredNorm();
    terms.ridge = hyper.alpha * psi.cwiseProduct(y).sum();
    terms.roughness = hyper.beta * output_roughness(y, l);
    terms.frobenius = nu * l.matrix().squaredNorm();
    return terms;
}

double joint_cost(const GramMatrix& gram, const Eigen::MatrixXd& psi, const Laplacian& l,
                  const Eigen::MatrixXd& targets, const Hyperparams& hyper,
                  const GraphLearnConfig& cfg) {
    return joint_cost_terms(gram, psi, l, targets, hyper, cfg.nu).total();
}

GraphLearnResult alternating_fit(const Eigen::MatrixXd& x_train, const KernelSpec& spec,
                                 const GramMatrix& gram, const Eigen::MatrixXd& targets,
                                 const Hyperparams& hyper, const GraphLearnConfig& cfg) {
    hyper.validate();
    cfg.validate();
    if (!(hyper.alpha > 0.0)) {
        throw error(errc::invalid_argument, "graph learning requires alpha > 0");
    }
    const auto m = static_cast<int>(targets.cols());
    GraphLearnConfig step_cfg = cfg;
    step_cfg.beta = hyper.beta;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto cost = [&](const Eigen::MatrixXd& psi, const Laplacian& l) {
        return joint_cost(gram, psi, l, targets, hyper, cfg);
    };

    Laplacian w_step_laplacian = Laplacian::zero(m);
    std::optional<Laplacian> constrained;
    std::optional<EdgeWeights> weights;
    std::optional<Laplacian> rescaled;
    Eigen::MatrixXd psi;
    GraphLearnResult result{KrgModel{Eigen::MatrixXd(), x_train, spec, gram, w_step_laplacian, hyper},
                            Laplacian::zero(m), Laplacian::zero(m), {}, {}, false};

    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
        IterationRecord rec;
        rec.iteration = it;

        rec.w_step_before = psi.size() == 0 ? nan : cost(psi, w_step_laplacian);
        const SpectralCache cache(gram.matrix, w_step_laplacian);
        psi = solve_dual(cache, targets, hyper);
        rec.w_step_after = cost(psi, w_step_laplacian);

        const Eigen::MatrixXd y = gram.matrix * psi;
        rec.l_step_before = constrained ? cost(psi, *constrained) : nan;
        LaplacianStepResult step =
            solve_laplacian_step(y, step_cfg, weights ? &*weights : nullptr);
        rec.l_step_after = cost(psi, step.constrained);
        rec.terms = joint_cost_terms(gram, psi, step.constrained, targets, hyper, cfg.nu);
        rec.spectral_radius = spectral_radius(step.constrained);
        const double wmax = step.weights.w.maxCoeff();
        rec.sparsity = static_cast<double>((step.weights.w.array() <= 1e-12 * wmax).count()) /
                       static_cast<double>(step.weights.w.size());
        rec.inner_iterations = step.iterations;
        rec.kkt_residual = step.kkt_residual;

        result.model.psi = psi;
        result.model.laplacian = w_step_laplacian;
        result.cost_trace.push_back(rec.l_step_after);
        result.records.push_back(rec);

        weights = step.weights;
        constrained = step.constrained;
        rescaled = step.rescaled;
        w_step_laplacian = step.rescaled;

        const auto& trace = result.cost_trace;
        if (trace.size() >= 2) {
            const double prev = trace[trace.size() - 2];
            const double change = std::abs(trace.back() - prev) / std::max(std::abs(prev), 1e-300);
            if (change < cfg.tol) {
                result.converged = true;
                break;
            }
        }
    }
    result.learned = *rescaled;
    result.learned_constrained = *constrained;
    return result;
}

} // namespace gkr
