#include "gkr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gkr/error.hpp"

namespace gkr {

std::string_view to_string(errc code) noexcept {
    switch (code) {
    case errc::invalid_graph: return "invalid_graph";
    case errc::invalid_laplacian: return "invalid_laplacian";
    case errc::dimension_mismatch: return "dimension_mismatch";
    case errc::invalid_argument: return "invalid_argument";
    case errc::singular_system: return "singular_system";
    case errc::near_singular: return "near_singular";
    case errc::degenerate_kernel: return "degenerate_kernel";
    case errc::not_positive_definite: return "not_positive_definite";
    case errc::cannot_rescale: return "cannot_rescale";
    case errc::convergence: return "convergence";
    case errc::io: return "io";
    case errc::parse: return "parse";
    case errc::schema: return "schema";
    }
    return "unknown";
}

SymmetricEigen psd_eigen(const Eigen::MatrixXd& m, double psd_tol) {
    if (m.rows() != m.cols()) {
        throw error(errc::dimension_mismatch, "eigendecomposition needs a square matrix");
    }
    if (m.rows() == 0) {
        return {Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) {
        throw error(errc::convergence, "symmetric eigensolver did not converge");
    }
    SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
    const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < out.values.size(); ++i) {
        double& v = out.values(i);
        if (v < 0.0) {
            if (v < -psd_tol * scale) {
                std::ostringstream msg;
                msg << "matrix is not positive semidefinite (eigenvalue " << v << ")";
                throw error(errc::not_positive_definite, msg.str());
            }
            v = 0.0;
        }
    }
    return out;
}

bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const double tol = rel_tol * std::max(1.0, max_abs(m));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                return false;
            }
        }
    }
    return true;
}

double max_abs(const Eigen::MatrixXd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

} // namespace gkr
