#pragma once

#include <Eigen/Dense>

namespace gkr {

struct SymmetricEigen {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // orthonormal columns
};

/// Eigendecomposition of a symmetric PSD matrix. Eigenvalues in
/// [-psd_tol * max(1, |largest|), 0) are clamped to 0; anything more negative
/// throws not_positive_definite.
SymmetricEigen psd_eigen(const Eigen::MatrixXd& m, double psd_tol = 1e-8);

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

/// Largest absolute entry, or 0 for an empty matrix.
double max_abs(const Eigen::MatrixXd& m);

/// Relative Frobenius error ||a - b|| / max(||b||, tiny).
double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace gkr
