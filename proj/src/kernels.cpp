#include "gkr/kernels.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "gkr/error.hpp"
#include "gkr/linalg.hpp"

namespace gkr {

std::string_view to_string(KernelKind kind) noexcept {
    switch (kind) {
    case KernelKind::linear: return "linear";
    case KernelKind::rbf: return "rbf";
    case KernelKind::precomputed: return "precomputed";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(std::string_view name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "rbf") return KernelKind::rbf;
    if (name == "precomputed") return KernelKind::precomputed;
    throw error(errc::schema, "unknown kernel kind '" + std::string(name) + "'");
}

KernelSpec KernelSpec::linear() { return KernelSpec{}; }

KernelSpec KernelSpec::rbf(double sigma_sq) {
    KernelSpec spec;
    spec.kind = KernelKind::rbf;
    spec.sigma_sq = sigma_sq;
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::precomputed(Eigen::MatrixXd kernel) {
    KernelSpec spec;
    spec.kind = KernelKind::precomputed;
    if (kernel.rows() != kernel.cols() || kernel.rows() == 0 || !kernel.allFinite()) {
        throw error(errc::invalid_argument, "precomputed kernel must be a finite square matrix");
    }
    if (!is_symmetric(kernel, 1e-10)) {
        throw error(errc::invalid_argument, "precomputed kernel is not symmetric");
    }
    kernel = (0.5 * (kernel + kernel.transpose())).eval();
    try {
        (void)psd_eigen(kernel, 1e-8);
    } catch (const error&) {
        throw error(errc::not_positive_definite, "precomputed kernel is not positive semidefinite");
    }
    spec.matrix = std::make_shared<const Eigen::MatrixXd>(std::move(kernel));
    return spec;
}

void KernelSpec::validate() const {
    switch (kind) {
    case KernelKind::linear:
        break;
    case KernelKind::rbf:
        if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
            throw error(errc::invalid_argument, "rbf kernel needs sigma_sq > 0");
        }
        break;
    case KernelKind::precomputed:
        if (!matrix) {
            throw error(errc::invalid_argument, "precomputed kernel spec has no matrix");
        }
        break;
    }
}

std::vector<int> sample_indices(const Eigen::MatrixXd& x, Eigen::Index universe) {
    if (x.cols() != 1) {
        throw error(errc::dimension_mismatch,
                    "precomputed-kernel inputs must be a single column of sample indices");
    }
    std::vector<int> idx(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double v = x(i, 0);
        if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(universe)) {
            std::ostringstream msg;
            msg << "sample index " << v << " is not an integer in [0, " << universe << ")";
            throw error(errc::invalid_argument, msg.str());
        }
        idx[static_cast<std::size_t>(i)] = static_cast<int>(v);
    }
    return idx;
}

double rbf_normalizer(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    double total = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index k = m + 1; k < n; ++k) {
            total += (x.row(m) - x.row(k)).squaredNorm();
        }
    }
    // both orders of each pair; the m == n terms are zero
    return 2.0 * total / static_cast<double>(n);
}

namespace {

double rbf_value(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                 const Eigen::Ref<const Eigen::RowVectorXd>& b, double denom) {
    return std::exp(-(a - b).squaredNorm() / denom);
}

} // namespace

GramMatrix gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& spec) {
    spec.validate();
    const Eigen::Index n = x.rows();
    if (n < 1) {
        throw error(errc::invalid_argument, "gram matrix needs at least one sample");
    }
    GramMatrix gram;
    switch (spec.kind) {
    case KernelKind::linear:
        gram.matrix = x * x.transpose();
        break;
    case KernelKind::rbf: {
        const double z = rbf_normalizer(x);
        if (!(z > 0.0)) {
            throw error(errc::degenerate_kernel,
                        "rbf normalizer is zero: all training inputs are identical");
        }
        gram.rbf_normalizer = z;
        const double denom = spec.sigma_sq * z;
        gram.matrix.resize(n, n);
        for (Eigen::Index m = 0; m < n; ++m) {
            gram.matrix(m, m) = 1.0;
            for (Eigen::Index k = m + 1; k < n; ++k) {
                gram.matrix(m, k) = gram.matrix(k, m) = rbf_value(x.row(m), x.row(k), denom);
            }
        }
        break;
    }
    case KernelKind::precomputed: {
        const auto idx = sample_indices(x, spec.matrix->rows());
        gram.matrix = (*spec.matrix)(idx, idx);
        break;
    }
    }
    return gram;
}

Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& x,
                              const KernelSpec& spec, const GramMatrix& gram) {
    Eigen::MatrixXd row(1, x.size());
    row.row(0) = x.transpose();
    return cross_kernel(x_train, row, spec, gram).row(0).transpose();
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& x_test,
                             const KernelSpec& spec, const GramMatrix& gram) {
    spec.validate();
    if (x_train.rows() != gram.size()) {
        throw error(errc::dimension_mismatch, "training inputs do not match the Gram matrix");
    }
    if (x_test.cols() != x_train.cols()) {
        throw error(errc::dimension_mismatch, "input dimension does not match the training inputs");
    }
    switch (spec.kind) {
    case KernelKind::linear:
        return x_test * x_train.transpose();
    case KernelKind::rbf: {
        if (!gram.rbf_normalizer) {
            throw error(errc::invalid_argument, "rbf Gram matrix is missing its normalizer");
        }
        const double denom = spec.sigma_sq * *gram.rbf_normalizer;
        Eigen::MatrixXd out(x_test.rows(), x_train.rows());
        for (Eigen::Index t = 0; t < x_test.rows(); ++t) {
            for (Eigen::Index n = 0; n < x_train.rows(); ++n) {
                out(t, n) = rbf_value(x_test.row(t), x_train.row(n), denom);
            }
        }
        return out;
    }
    case KernelKind::precomputed: {
        const auto train_idx = sample_indices(x_train, spec.matrix->rows());
        const auto test_idx = sample_indices(x_test, spec.matrix->rows());
        return (*spec.matrix)(test_idx, train_idx);
    }
    }
    return {};
}

} // namespace gkr
