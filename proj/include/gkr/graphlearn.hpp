#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gkr/graphs.hpp"
#include "gkr/kernels.hpp"
#include "gkr/solver.hpp"

namespace gkr {

struct GraphLearnConfig {
    double nu = 0.0;   // weight of tr(L^T L)
    double beta = 0.0; // roughness weight used by laplacian_step
    int max_outer_iters = 20;
    double tol = 1e-4; // relative change of the joint cost between outer iterations
    /// tr(L) is pinned to this value in the L-step; defaults to M.
    std::optional<double> trace_budget;
    int max_inner_iters = 50000;
    double kkt_tol = 1e-6;

    void validate() const;
    [[nodiscard]] double budget(int num_nodes) const {
        return trace_budget.value_or(static_cast<double>(num_nodes));
    }
};

/// One nonnegative weight per unordered node pair (i < j), ordered row-major
/// over the strict upper triangle. The induced L = sum w_ij (e_i - e_j)(e_i - e_j)^T
/// is a valid Laplacian for any w >= 0.
struct EdgeWeights {
    int num_nodes = 0;
    Eigen::VectorXd w;

    static Eigen::Index num_pairs(int num_nodes) {
        return static_cast<Eigen::Index>(num_nodes) * (num_nodes - 1) / 2;
    }
    static Eigen::Index pair_index(int i, int j, int num_nodes);
    static EdgeWeights uniform(int num_nodes, double total);
    static EdgeWeights from_laplacian(const Laplacian& l);

    [[nodiscard]] Eigen::MatrixXd laplacian_matrix() const;
    [[nodiscard]] Laplacian laplacian() const;
};

/// Euclidean projection onto { w >= 0, sum w = total }.
Eigen::VectorXd project_scaled_simplex(const Eigen::VectorXd& v, double total);

/// Per-pair linear cost c_ij = beta * sum_n (y_n(i) - y_n(j))^2.
Eigen::VectorXd pair_costs(const Eigen::MatrixXd& y, double beta);

/// c.w + nu * tr(L(w)^2).
double edge_objective(const Eigen::VectorXd& c, const EdgeWeights& w, double nu);

struct LaplacianStepResult {
    EdgeWeights weights;
    Laplacian constrained; // tr(L) = trace budget
    Laplacian rescaled;    // spectral radius 1
    int iterations = 0;
    double kkt_residual = 0.0;
    double objective = 0.0;
};

/// Minimizes c.w + nu w^T Q w over w >= 0 with 2 sum w = trace budget, where Q
/// is the Gram matrix of the edge Laplacians (4 on a pair, 1 for pairs sharing
/// one node). Projected accelerated gradient with a monotone safeguard, so a
/// warm start never ends at a higher objective than it started from.
/// Throws convergence if the KKT residual is above cfg.kkt_tol after
/// cfg.max_inner_iters iterations.
LaplacianStepResult solve_laplacian_step(const Eigen::MatrixXd& y, const GraphLearnConfig& cfg,
                                         const EdgeWeights* warm_start = nullptr);

/// The rescaled L-step output.
Laplacian laplacian_step(const Eigen::MatrixXd& y, const GraphLearnConfig& cfg);

struct JointCostTerms {
    double data = 0.0;      // sum ||t_n - y_n||^2
    double ridge = 0.0;     // alpha tr(Psi^T K Psi)
    double roughness = 0.0; // beta sum y_n^T L y_n
    double frobenius = 0.0; // nu tr(L^T L)
    [[nodiscard]] double total() const { return data + ridge + roughness + frobenius; }
};

JointCostTerms joint_cost_terms(const GramMatrix& gram, const Eigen::MatrixXd& psi,
                                const Laplacian& l, const Eigen::MatrixXd& targets,
                                const Hyperparams& hyper, double nu);

double joint_cost(const GramMatrix& gram, const Eigen::MatrixXd& psi, const Laplacian& l,
                  const Eigen::MatrixXd& targets, const Hyperparams& hyper,
                  const GraphLearnConfig& cfg);

/// Diagnostics for one outer iteration. "before" costs are NaN when the
/// comparison point does not exist (no previous Psi, or L = 0 which is outside
/// the trace-constrained set).
struct IterationRecord {
    int iteration = 0;
    double w_step_before = 0.0;
    double w_step_after = 0.0;
    double l_step_before = 0.0;
    double l_step_after = 0.0;
    JointCostTerms terms; // at (Psi_k, constrained L_k)
    double spectral_radius = 0.0; // of the constrained L_k
    double sparsity = 0.0;        // fraction of zero edge weights
    int inner_iterations = 0;
    double kkt_residual = 0.0;
};

struct GraphLearnResult {
    /// Model from the last W-step; model.laplacian is the L it was fitted with
    /// (L = 0 on the first iteration, i.e. plain kernel regression).
    KrgModel model;
    /// Rescaled output of the last L-step.
    Laplacian learned;
    /// Same, before rescaling (tr = trace budget).
    Laplacian learned_constrained;
    std::vector<double> cost_trace;
    std::vector<IterationRecord> records;
    bool converged = false;
};

/// Alternating minimization starting from L = 0. Each outer iteration fits
/// Psi for the current L, then solves the L-step for Y = K Psi and rescales it
/// for the next W-step. hyper.beta is used in both steps (cfg.beta is ignored).
GraphLearnResult alternating_fit(const Eigen::MatrixXd& x_train, const KernelSpec& spec,
                                 const GramMatrix& gram, const Eigen::MatrixXd& targets,
                                 const Hyperparams& hyper, const GraphLearnConfig& cfg);

} // namespace gkr
