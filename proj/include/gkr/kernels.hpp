#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace gkr {

enum class KernelKind { linear, rbf, precomputed };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind kernel_kind_from_string(std::string_view name);

/// Declarative kernel choice.
///
/// For `precomputed`, `matrix` is a symmetric PSD kernel over a universe of
/// samples and every input vector is a single entry holding a sample index
/// into it. Training and test kernels are restrictions of that one matrix,
/// which is how the synthetic covariance kernel is used.
struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double sigma_sq = 1.0;
    std::shared_ptr<const Eigen::MatrixXd> matrix;

    static KernelSpec linear();
    static KernelSpec rbf(double sigma_sq);
    /// Validates symmetry and PSD (within 1e-8 relative).
    static KernelSpec precomputed(Eigen::MatrixXd kernel);

    void validate() const;
};

struct GramMatrix {
    Eigen::MatrixXd matrix;
    /// Z = sum_{m,n} ||x_m - x_n||^2 / N over the training set; RBF only.
    std::optional<double> rbf_normalizer;

    [[nodiscard]] Eigen::Index size() const { return matrix.rows(); }
};

/// Sum over all ordered training pairs of squared distances, divided by N.
double rbf_normalizer(const Eigen::MatrixXd& x);

/// Training Gram matrix. linear: X X^T. rbf: exp(-||x_m - x_n||^2 / (sigma^2 Z)).
/// precomputed: the kernel restricted to the sample indices in column 0 of X.
GramMatrix gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& spec);

/// k(x) = [k(x_1, x), ..., k(x_N, x)]^T, using the normalizer frozen in `gram`.
Eigen::VectorXd kernel_vector(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& x,
                              const KernelSpec& spec, const GramMatrix& gram);

/// Rows are kernel_vector for each row of x_test (N_test x N).
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& x_test,
                             const KernelSpec& spec, const GramMatrix& gram);

/// Reads column 0 of an index-valued input matrix; validates integrality and range.
std::vector<int> sample_indices(const Eigen::MatrixXd& x, Eigen::Index universe);

} // namespace gkr
