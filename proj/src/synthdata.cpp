#include "gkr/synthdata.hpp"

#include <cmath>
#include <sstream>

#include "gkr/error.hpp"
#include "gkr/random.hpp"

namespace gkr {

Graph GraphModelSpec::generate(int num_nodes, std::uint64_t seed) const {
    switch (model) {
    case GraphModel::erdos_renyi: return erdos_renyi(num_nodes, p, seed);
    case GraphModel::barabasi_albert: return barabasi_albert(num_nodes, m_attach, seed);
    }
    throw error(errc::invalid_argument, "unknown graph model");
}

void SynthConfig::validate() const {
    if (num_nodes < 2) {
        throw error(errc::schema, "num_nodes must be at least 2");
    }
    if (num_samples < 2 || num_samples % 2 != 0) {
        throw error(errc::schema, "num_samples must be an even number >= 2");
    }
    if (!std::isfinite(snr_db)) {
        throw error(errc::schema, "snr_db must be finite");
    }
    if (wishart_dof && *wishart_dof < num_samples + 2) {
        throw error(errc::schema, "wishart_dof must be at least num_samples + 2");
    }
}

void Dataset::validate() const {
    if (x.rows() != t.rows()) {
        throw error(errc::dimension_mismatch, "inputs and targets have different row counts");
    }
    if (t0 && (t0->rows() != t.rows() || t0->cols() != t.cols())) {
        throw error(errc::dimension_mismatch, "clean targets do not match the targets");
    }
    if (!sample_index.empty() && static_cast<Eigen::Index>(sample_index.size()) != t.rows()) {
        throw error(errc::dimension_mismatch, "sample index list does not match the targets");
    }
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out;
    out.x = x(rows, Eigen::all);
    out.t = t(rows, Eigen::all);
    if (t0) {
        out.t0 = (*t0)(rows, Eigen::all);
    }
    if (!sample_index.empty()) {
        for (int r : rows) {
            out.sample_index.push_back(sample_index[static_cast<std::size_t>(r)]);
        }
    }
    return out;
}

Eigen::MatrixXd sample_inverse_wishart_covariance(int size, std::uint64_t seed,
                                                  std::optional<int> dof) {
    if (size < 2) {
        throw error(errc::invalid_argument, "covariance size must be at least 2");
    }
    const int nu = dof.value_or(size + 2);
    if (nu < size) {
        throw error(errc::invalid_argument, "Wishart degrees of freedom must be >= size");
    }
    Rng rng(seed);
    // Bartlett: W = A A^T, A lower triangular, A_ii^2 ~ chi2(nu - i), A_ij ~ N(0,1)
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    for (int i = 0; i < size; ++i) {
        double chi2 = 0.0;
        for (int k = 0; k < nu - i; ++k) {
            const double z = rng.normal();
            chi2 += z * z;
        }
        a(i, i) = std::sqrt(chi2);
        for (int j = 0; j < i; ++j) {
            a(i, j) = rng.normal();
        }
    }
    // W^{-1} = A^{-T} A^{-1}
    const Eigen::MatrixXd a_inv =
        a.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(size, size));
    Eigen::MatrixXd c = a_inv.transpose() * a_inv;
    return 0.5 * (c + c.transpose());
}

Eigen::MatrixXd generate_correlated_rows(const Eigen::MatrixXd& covariance, int num_columns,
                                         std::uint64_t seed) {
    const Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) {
        throw error(errc::not_positive_definite, "covariance is not positive definite");
    }
    Rng rng(seed);
    Eigen::MatrixXd z(covariance.rows(), num_columns);
    for (int col = 0; col < num_columns; ++col) {
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            z(r, col) = rng.normal();
        }
    }
    return llt.matrixL() * z;
}

Eigen::VectorXd smooth_projection(const Eigen::VectorXd& r, const Laplacian& l) {
    if (r.size() != l.num_nodes()) {
        throw error(errc::dimension_mismatch, "signal length does not match the Laplacian");
    }
    Eigen::MatrixXd rows(1, r.size());
    rows.row(0) = r.transpose();
    return smooth_projection_rows(rows, l).row(0).transpose();
}

Eigen::MatrixXd smooth_projection_rows(const Eigen::MatrixXd& rows, const Laplacian& l) {
    if (rows.cols() != l.num_nodes()) {
        throw error(errc::dimension_mismatch, "row length does not match the Laplacian");
    }
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(l.num_nodes(), l.num_nodes()) + l.matrix();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    return ldlt.solve(rows.transpose()).transpose();
}

Eigen::MatrixXd add_noise_snr(const Eigen::MatrixXd& t0, double snr_db, std::uint64_t seed) {
    const double energy = t0.squaredNorm();
    if (!(energy > 0.0)) {
        throw error(errc::invalid_argument, "cannot set an SNR for a zero signal");
    }
    const double variance =
        energy / (static_cast<double>(t0.size()) * std::pow(10.0, snr_db / 10.0));
    const double sd = std::sqrt(variance);
    Rng rng(seed);
    Eigen::MatrixXd out = t0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            out(r, c) += sd * rng.normal();
        }
    }
    return out;
}

SynthSeeds SynthSeeds::from_master(std::uint64_t master) {
    return SynthSeeds{derive_seed(master, 1), derive_seed(master, 2), derive_seed(master, 3),
                      derive_seed(master, 4), derive_seed(master, 5)};
}

SyntheticData make_clean_synthetic_dataset(const SynthConfig& cfg) {
    cfg.validate();
    const auto seeds = SynthSeeds::from_master(cfg.seed);
    Graph graph = cfg.graph.generate(cfg.num_nodes, seeds.graph);
    const Laplacian l = build_laplacian(graph);
    Eigen::MatrixXd cov =
        sample_inverse_wishart_covariance(cfg.num_samples, seeds.covariance, cfg.wishart_dof);
    Eigen::MatrixXd rows = generate_correlated_rows(cov, cfg.num_nodes, seeds.rows);
    Eigen::MatrixXd clean = smooth_projection_rows(rows, l);

    Rng rng(seeds.split);
    const std::vector<int> perm = rng.permutation(cfg.num_samples);
    const auto half = static_cast<std::size_t>(cfg.num_samples / 2);
    std::vector<int> train_idx(perm.begin(), perm.begin() + static_cast<long>(half));
    std::vector<int> test_idx(perm.begin() + static_cast<long>(half), perm.end());

    Dataset all;
    all.x.resize(cfg.num_samples, 1);
    for (int s = 0; s < cfg.num_samples; ++s) {
        all.x(s, 0) = s;
        all.sample_index.push_back(s);
    }
    all.t = clean;
    all.t0 = clean;

    SyntheticData out{all.subset(train_idx), all.subset(test_idx), std::move(graph),
                      std::move(cov), std::move(rows), std::move(clean), train_idx, test_idx};
    return out;
}

SyntheticData make_synthetic_dataset(const SynthConfig& cfg) {
    SyntheticData data = make_clean_synthetic_dataset(cfg);
    const auto seeds = SynthSeeds::from_master(cfg.seed);
    data.train.t = add_noise_snr(*data.train.t0, cfg.snr_db, seeds.noise);
    return data;
}

} // namespace gkr
