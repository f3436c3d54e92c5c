#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gkr/graphs.hpp"

namespace gkr {

enum class GraphModel { erdos_renyi, barabasi_albert };

struct GraphModelSpec {
    GraphModel model = GraphModel::erdos_renyi;
    double p = 0.1;   // erdos_renyi edge probability
    int m_attach = 2; // barabasi_albert attachments per node

    [[nodiscard]] Graph generate(int num_nodes, std::uint64_t seed) const;
};

struct SynthConfig {
    int num_nodes = 50;    // M
    int num_samples = 100; // S, split evenly into train and test
    GraphModelSpec graph;
    double snr_db = 10.0;
    std::uint64_t seed = 0;
    /// Inverse-Wishart degrees of freedom; defaults to S + 2.
    std::optional<int> wishart_dof;

    void validate() const;
};

/// Inputs, observed targets and (optionally) clean targets. For the synthetic
/// covariance kernel the inputs are sample indices (one column).
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::MatrixXd t;
    std::optional<Eigen::MatrixXd> t0;
    std::vector<int> sample_index;

    [[nodiscard]] Eigen::Index size() const { return t.rows(); }
    [[nodiscard]] const Eigen::MatrixXd& clean_or_observed() const { return t0 ? *t0 : t; }
    /// Row subset, preserving order of `rows`.
    [[nodiscard]] Dataset subset(const std::vector<int>& rows) const;
    void validate() const;
};

/// Draw from IW(I, dof) via the Bartlett decomposition of a Wishart(I, dof)
/// sample. dof defaults to S + 2, the smallest value with a finite mean (= I).
Eigen::MatrixXd sample_inverse_wishart_covariance(int size, std::uint64_t seed,
                                                  std::optional<int> dof = std::nullopt);

/// S x M matrix whose columns are independent N(0, C_S) draws.
Eigen::MatrixXd generate_correlated_rows(const Eigen::MatrixXd& covariance, int num_columns,
                                         std::uint64_t seed);

/// argmin_z ||r - z||^2 + z^T L z = (I + L)^{-1} r.
Eigen::VectorXd smooth_projection(const Eigen::VectorXd& r, const Laplacian& l);
/// Row-wise smooth_projection of every row of R.
Eigen::MatrixXd smooth_projection_rows(const Eigen::MatrixXd& rows, const Laplacian& l);

/// T0 + E with E iid N(0, s^2) and s^2 = ||T0||_F^2 / (numel * 10^(snr/10)),
/// so the expected noise energy matches the requested SNR.
Eigen::MatrixXd add_noise_snr(const Eigen::MatrixXd& t0, double snr_db, std::uint64_t seed);

struct SyntheticData {
    Dataset train; // noisy targets, t0 = clean
    Dataset test;  // clean targets
    Graph graph;
    Eigen::MatrixXd covariance; // C_S; kernel k(i, j) = C_S(i, j) over sample indices
    Eigen::MatrixXd source_rows; // rows r before projection (S x M)
    Eigen::MatrixXd clean_targets; // all S projected rows
    std::vector<int> train_indices;
    std::vector<int> test_indices;
};

/// Seed streams derived from the master seed, recorded in manifests.
struct SynthSeeds {
    std::uint64_t graph, covariance, rows, split, noise;
    static SynthSeeds from_master(std::uint64_t master);
};

/// graph -> C_S -> correlated rows -> per-row smooth projection -> random
/// half/half split -> noise on the training targets only.
SyntheticData make_synthetic_dataset(const SynthConfig& cfg);

/// The same pipeline without noise; train.t equals the clean targets.
SyntheticData make_clean_synthetic_dataset(const SynthConfig& cfg);

} // namespace gkr
