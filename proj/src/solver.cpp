#include "gkr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gkr/error.hpp"
#include "gkr/linalg.hpp"

namespace gkr {

void Hyperparams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw error(errc::invalid_argument, "alpha must be a finite nonnegative number");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw error(errc::invalid_argument, "beta must be a finite nonnegative number");
    }
}

SpectralCache::SpectralCache(const Eigen::MatrixXd& sample_matrix, const Laplacian& laplacian) {
    auto k_eig = psd_eigen(sample_matrix);
    auto l_eig = psd_eigen(laplacian.matrix());
    u_ = std::move(k_eig.vectors);
    theta_ = std::move(k_eig.values);
    v_ = std::move(l_eig.vectors);
    lambda_ = std::move(l_eig.values);
}

Eigen::MatrixXd SpectralCache::to_spectral(const Eigen::MatrixXd& x) const {
    if (x.rows() != rows() || x.cols() != cols()) {
        throw error(errc::dimension_mismatch, "matrix shape does not match the spectral cache");
    }
    return u_.transpose() * x * v_;
}

Eigen::MatrixXd SpectralCache::from_spectral(const Eigen::MatrixXd& x) const {
    return u_ * x * v_.transpose();
}

Eigen::MatrixXd system_eigenvalues(const SpectralCache& cache, const Hyperparams& hyper) {
    hyper.validate();
    const auto& theta = cache.theta();
    const auto& lambda = cache.lambda();
    Eigen::MatrixXd eta(theta.size(), lambda.size());
    for (Eigen::Index m = 0; m < lambda.size(); ++m) {
        for (Eigen::Index n = 0; n < theta.size(); ++n) {
            eta(n, m) = (theta(n) + hyper.alpha) + hyper.beta * (lambda(m) * theta(n));
        }
    }
    return eta;
}

namespace {

void check_eta(const SpectralCache& cache, const Eigen::MatrixXd& eta) {
    if (eta.size() == 0) {
        return;
    }
    const double floor = std::max(1e-14, 64.0 * std::numeric_limits<double>::epsilon() *
                                             eta.maxCoeff());
    Eigen::Index n = 0, m = 0;
    const double smallest = eta.minCoeff(&n, &m);
    if (smallest <= floor) {
        std::ostringstream msg;
        msg << "near-singular system: eta = " << smallest << " at theta = " << cache.theta()(n)
            << ", lambda = " << cache.lambda()(m);
        throw error(errc::near_singular, msg.str());
    }
}

} // namespace

Eigen::MatrixXd solve_sylvester_spectral(const SpectralCache& cache, const Eigen::MatrixXd& rhs,
                                         const Hyperparams& hyper) {
    const Eigen::MatrixXd eta = system_eigenvalues(cache, hyper);
    check_eta(cache, eta);
    if (hyper.beta == 0.0) {
        // the graph drops out; skipping V makes beta = 0 identical to L = 0
        if (rhs.rows() != cache.rows()) {
            throw error(errc::dimension_mismatch, "matrix shape does not match the spectral cache");
        }
        const Eigen::VectorXd inv = eta.col(0).cwiseInverse();
        return cache.u() * (inv.asDiagonal() * (cache.u().transpose() * rhs));
    }
    const Eigen::MatrixXd rotated = cache.to_spectral(rhs);
    return cache.from_spectral(rotated.cwiseQuotient(eta));
}

Eigen::MatrixXd shrinkage_factors(const SpectralCache& cache, const Hyperparams& hyper) {
    const Eigen::MatrixXd eta = system_eigenvalues(cache, hyper);
    Eigen::MatrixXd zeta(eta.rows(), eta.cols());
    for (Eigen::Index m = 0; m < eta.cols(); ++m) {
        for (Eigen::Index n = 0; n < eta.rows(); ++n) {
            const double theta = cache.theta()(n);
            if (theta == 0.0) {
                zeta(n, m) = 0.0;
            } else if (eta(n, m) <= 0.0) {
                throw error(errc::near_singular, "shrinkage factor undefined: eta <= 0");
            } else {
                zeta(n, m) = theta / eta(n, m);
            }
        }
    }
    return zeta;
}

namespace {

void check_targets(Eigen::Index n, Eigen::Index m, const Eigen::MatrixXd& targets) {
    if (targets.rows() != n || targets.cols() != m) {
        std::ostringstream msg;
        msg << "targets are " << targets.rows() << "x" << targets.cols() << ", expected " << n
            << "x" << m;
        throw error(errc::dimension_mismatch, msg.str());
    }
    if (!targets.allFinite()) {
        throw error(errc::invalid_argument, "targets contain non-finite values");
    }
}

// alpha = 0 with a singular sample matrix is reported as singular rather than
// near-singular, since no beta can repair it.
void check_alpha_zero(const SpectralCache& cache, const Hyperparams& hyper) {
    if (hyper.alpha == 0.0 && cache.rows() > 0) {
        const double top = std::max(cache.theta().maxCoeff(), 1e-300);
        if (cache.theta().minCoeff() <= 64.0 * std::numeric_limits<double>::epsilon() * top) {
            throw error(errc::singular_system,
                        "alpha = 0 with a singular kernel (or Phi^T Phi) matrix");
        }
    }
}

} // namespace

Eigen::MatrixXd solve_dual(const SpectralCache& cache, const Eigen::MatrixXd& targets,
                           const Hyperparams& hyper) {
    hyper.validate();
    check_targets(cache.rows(), cache.cols(), targets);
    check_alpha_zero(cache, hyper);
    return solve_sylvester_spectral(cache, targets, hyper);
}

Eigen::MatrixXd solve_dual(const GramMatrix& gram, const Eigen::MatrixXd& targets,
                           const Laplacian& laplacian, const Hyperparams& hyper) {
    return solve_dual(SpectralCache(gram.matrix, laplacian), targets, hyper);
}

KrgModel fit_krg(const Eigen::MatrixXd& x_train, const KernelSpec& spec, GramMatrix gram,
                 const Eigen::MatrixXd& targets, const Laplacian& laplacian,
                 const Hyperparams& hyper) {
    if (x_train.rows() != gram.size()) {
        throw error(errc::dimension_mismatch, "training inputs do not match the Gram matrix");
    }
    Eigen::MatrixXd psi = solve_dual(gram, targets, laplacian, hyper);
    return KrgModel{std::move(psi), x_train, spec, std::move(gram), laplacian, hyper};
}

Eigen::MatrixXd predict_from_kernel_rows(const Eigen::MatrixXd& psi,
                                         const Eigen::MatrixXd& kernel_rows) {
    if (kernel_rows.cols() != psi.rows()) {
        throw error(errc::dimension_mismatch, "kernel rows do not match the number of training samples");
    }
    return kernel_rows * psi;
}

Eigen::VectorXd predict_krg(const KrgModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd k = kernel_vector(model.x_train, x, model.spec, model.gram);
    return model.psi.transpose() * k;
}

Eigen::MatrixXd predict_krg_batch(const KrgModel& model, const Eigen::MatrixXd& x_test) {
    return predict_from_kernel_rows(model.psi,
                                    cross_kernel(model.x_train, x_test, model.spec, model.gram));
}

LrgModel fit_lrg(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& targets,
                 const Laplacian& laplacian, const Hyperparams& hyper) {
    hyper.validate();
    check_targets(phi.rows(), laplacian.num_nodes(), targets);
    const Eigen::MatrixXd gram = phi.transpose() * phi;
    const SpectralCache cache(gram, laplacian);
    check_alpha_zero(cache, hyper);
    Eigen::MatrixXd w = solve_sylvester_spectral(cache, phi.transpose() * targets, hyper);
    return LrgModel{std::move(w), hyper, laplacian};
}

Eigen::VectorXd predict_lrg(const LrgModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.w.rows()) {
        throw error(errc::dimension_mismatch, "feature vector does not match the model");
    }
    return model.w.transpose() * x;
}

Eigen::MatrixXd predict_lrg_batch(const LrgModel& model, const Eigen::MatrixXd& x_test) {
    if (x_test.cols() != model.w.rows()) {
        throw error(errc::dimension_mismatch, "feature dimension does not match the model");
    }
    return x_test * model.w;
}

Eigen::MatrixXd fitted_smoother(const GramMatrix& gram, const Laplacian& laplacian,
                                const Hyperparams& hyper, const Eigen::MatrixXd& targets) {
    const SpectralCache cache(gram.matrix, laplacian);
    check_targets(cache.rows(), cache.cols(), targets);
    check_alpha_zero(cache, hyper);
    check_eta(cache, system_eigenvalues(cache, hyper));
    const Eigen::MatrixXd zeta = shrinkage_factors(cache, hyper);
    if (hyper.beta == 0.0) {
        const Eigen::VectorXd factor = zeta.col(0);
        return cache.u() * (factor.asDiagonal() * (cache.u().transpose() * targets));
    }
    return cache.from_spectral(cache.to_spectral(targets).cwiseProduct(zeta));
}

Eigen::MatrixXd kr_fitted_shrinkage(const GramMatrix& gram, double alpha,
                                    const Eigen::MatrixXd& targets) {
    if (targets.rows() != gram.size()) {
        throw error(errc::dimension_mismatch, "targets do not match the Gram matrix");
    }
    const auto eig = psd_eigen(gram.matrix);
    Eigen::VectorXd factor(eig.values.size());
    for (Eigen::Index i = 0; i < factor.size(); ++i) {
        const double theta = eig.values(i);
        factor(i) = theta == 0.0 ? 0.0 : theta / (theta + alpha);
    }
    return eig.vectors * (factor.asDiagonal() * (eig.vectors.transpose() * targets));
}

double dual_cost(const Eigen::MatrixXd& k, const Eigen::MatrixXd& psi,
                 const Eigen::MatrixXd& targets, const Laplacian& laplacian,
                 const Hyperparams& hyper) {
    const Eigen::MatrixXd kpsi = k * psi;
    return -2.0 * (targets.transpose() * kpsi).trace() + kpsi.squaredNorm() +
           hyper.alpha * (psi.transpose() * kpsi).trace() +
           hyper.beta * (kpsi.transpose() * kpsi * laplacian.matrix()).trace();
}

Eigen::MatrixXd dual_cost_gradient(const Eigen::MatrixXd& k, const Eigen::MatrixXd& psi,
                                   const Eigen::MatrixXd& targets, const Laplacian& laplacian,
                                   const Hyperparams& hyper) {
    const Eigen::MatrixXd kpsi = k * psi;
    const Eigen::MatrixXd residual =
        kpsi + hyper.alpha * psi + hyper.beta * kpsi * laplacian.matrix() - targets;
    return 2.0 * k * residual;
}

double output_roughness(const Eigen::MatrixXd& y, const Laplacian& laplacian) {
    if (y.cols() != laplacian.num_nodes()) {
        throw error(errc::dimension_mismatch, "outputs do not match the number of nodes");
    }
    return (y * laplacian.matrix()).cwiseProduct(y).sum();
}

} // namespace gkr
