#pragma once

#include <Eigen/Dense>

#include "gkr/graphs.hpp"
#include "gkr/kernels.hpp"

namespace gkr {

/// Regularization weights: alpha on ||W||_F^2, beta on the graph roughness of
/// the outputs.
struct Hyperparams {
    double alpha = 0.0;
    double beta = 0.0;

    void validate() const;
};

/// Eigenpairs of a symmetric PSD "sample" matrix (a Gram matrix K, or Phi^T Phi
/// for the primal problem) and of a Laplacian L. Computed once per (K, L) pair
/// and reused across any number of (alpha, beta) values.
class SpectralCache {
public:
    SpectralCache(const Eigen::MatrixXd& sample_matrix, const Laplacian& laplacian);

    [[nodiscard]] const Eigen::MatrixXd& u() const { return u_; }
    [[nodiscard]] const Eigen::VectorXd& theta() const { return theta_; }
    [[nodiscard]] const Eigen::MatrixXd& v() const { return v_; }
    [[nodiscard]] const Eigen::VectorXd& lambda() const { return lambda_; }
    [[nodiscard]] Eigen::Index rows() const { return theta_.size(); }
    [[nodiscard]] Eigen::Index cols() const { return lambda_.size(); }

    /// Rotates a matrix into the joint eigenbasis: U^T X V.
    [[nodiscard]] Eigen::MatrixXd to_spectral(const Eigen::MatrixXd& x) const;
    /// Inverse of to_spectral: U X V^T.
    [[nodiscard]] Eigen::MatrixXd from_spectral(const Eigen::MatrixXd& x) const;

private:
    Eigen::MatrixXd u_;
    Eigen::VectorXd theta_;
    Eigen::MatrixXd v_;
    Eigen::VectorXd lambda_;
};

/// eta(n, m) = (theta_n + alpha) + beta * lambda_m * theta_n, the eigenvalues of
/// the Kronecker system matrix (I (x) (K + alpha I)) + beta (L (x) K).
Eigen::MatrixXd system_eigenvalues(const SpectralCache& cache, const Hyperparams& hyper);

/// Solves (K + alpha I) X + beta K X L = rhs as U [ (U^T rhs V) ./ eta ] V^T.
/// Throws near_singular naming the offending (theta, lambda) pair when some eta
/// is at or below max(1e-14, 64 eps * max eta).
Eigen::MatrixXd solve_sylvester_spectral(const SpectralCache& cache, const Eigen::MatrixXd& rhs,
                                         const Hyperparams& hyper);

/// zeta = theta / eta, the per-component shrinkage applied to the targets in
/// the V (x) U basis. Each entry lies in [0, 1) when alpha > 0.
Eigen::MatrixXd shrinkage_factors(const SpectralCache& cache, const Hyperparams& hyper);

/// Kernel regression over graphs in dual form.
struct KrgModel {
    Eigen::MatrixXd psi; // N x M
    Eigen::MatrixXd x_train;
    KernelSpec spec;
    GramMatrix gram;
    Laplacian laplacian;
    Hyperparams hyper;

    [[nodiscard]] Eigen::Index num_train() const { return psi.rows(); }
    [[nodiscard]] Eigen::Index num_nodes() const { return psi.cols(); }
};

/// Dual coefficients solving (K + alpha I) Psi + beta K Psi L = T.
Eigen::MatrixXd solve_dual(const GramMatrix& gram, const Eigen::MatrixXd& targets,
                           const Laplacian& laplacian, const Hyperparams& hyper);
Eigen::MatrixXd solve_dual(const SpectralCache& cache, const Eigen::MatrixXd& targets,
                           const Hyperparams& hyper);

KrgModel fit_krg(const Eigen::MatrixXd& x_train, const KernelSpec& spec, GramMatrix gram,
                 const Eigen::MatrixXd& targets, const Laplacian& laplacian,
                 const Hyperparams& hyper);

/// y = Psi^T k(x).
Eigen::VectorXd predict_krg(const KrgModel& model, const Eigen::VectorXd& x);
/// One prediction per row of x_test.
Eigen::MatrixXd predict_krg_batch(const KrgModel& model, const Eigen::MatrixXd& x_test);
/// Predictions from precomputed kernel rows (N_test x N).
Eigen::MatrixXd predict_from_kernel_rows(const Eigen::MatrixXd& psi,
                                         const Eigen::MatrixXd& kernel_rows);

/// Linear regression over graphs in primal form with identity feature map.
struct LrgModel {
    Eigen::MatrixXd w; // K_feat x M
    Hyperparams hyper;
    Laplacian laplacian;
};

/// Solves (Phi^T Phi + alpha I) W + beta Phi^T Phi W L = Phi^T T through the
/// eigendecompositions of Phi^T Phi and L; the MK x MK system is never formed.
LrgModel fit_lrg(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& targets,
                 const Laplacian& laplacian, const Hyperparams& hyper);

Eigen::VectorXd predict_lrg(const LrgModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd predict_lrg_batch(const LrgModel& model, const Eigen::MatrixXd& x_test);

/// Training-set fitted outputs Y = K Psi, evaluated through the shrinkage
/// factors: Y = U [ zeta .* (U^T T V) ] V^T.
Eigen::MatrixXd fitted_smoother(const GramMatrix& gram, const Laplacian& laplacian,
                                const Hyperparams& hyper, const Eigen::MatrixXd& targets);

/// Graph-free smoother K (K + alpha I)^{-1} T, applied column by column along
/// the kernel eigenvectors with factors theta / (theta + alpha).
Eigen::MatrixXd kr_fitted_shrinkage(const GramMatrix& gram, double alpha,
                                    const Eigen::MatrixXd& targets);

/// Dual cost with the constant sum ||t_n||^2 dropped:
/// -2 tr(T^T K Psi) + tr(Psi^T K K Psi) + alpha tr(Psi^T K Psi) + beta tr(Psi^T K K Psi L).
double dual_cost(const Eigen::MatrixXd& k, const Eigen::MatrixXd& psi,
                 const Eigen::MatrixXd& targets, const Laplacian& laplacian,
                 const Hyperparams& hyper);

/// Gradient of dual_cost: 2 K [ (K + alpha I) Psi + beta K Psi L - T ].
Eigen::MatrixXd dual_cost_gradient(const Eigen::MatrixXd& k, const Eigen::MatrixXd& psi,
                                   const Eigen::MatrixXd& targets, const Laplacian& laplacian,
                                   const Hyperparams& hyper);

/// Graph roughness of fitted outputs, sum_n y_n^T L y_n = tr(Y L Y^T).
double output_roughness(const Eigen::MatrixXd& y, const Laplacian& laplacian);

} // namespace gkr
