#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gkr/graphlearn.hpp"
#include "gkr/graphs.hpp"
#include "gkr/kernels.hpp"
#include "gkr/solver.hpp"
#include "gkr/synthdata.hpp"

namespace gkr {

/// Reported in place of -inf when the prediction is exact.
inline constexpr double nmse_floor_db = -300.0;

/// 10 log10(||Y - T0||_F^2 / ||T0||_F^2), floored at nmse_floor_db.
double nmse_db(const Eigen::MatrixXd& y, const Eigen::MatrixXd& t0);

/// Averages error and signal energies over realizations before taking the
/// ratio (the primary figure), and separately averages per-realization dB.
class NmseAccumulator {
public:
    void add(const Eigen::MatrixXd& y, const Eigen::MatrixXd& t0);
    [[nodiscard]] double pooled_db() const;
    [[nodiscard]] double mean_of_db() const;
    [[nodiscard]] int count() const { return count_; }

private:
    double error_energy_ = 0.0;
    double signal_energy_ = 0.0;
    double db_sum_ = 0.0;
    int count_ = 0;
};

enum class Method { LR, LRG, KR, KRG, KRR };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view name);

enum class KrrKernel { diffusion, covariance };

struct CvGrid {
    std::vector<double> alphas{1.0};
    std::vector<double> betas{0.0};
    std::vector<double> sigma_sqs;   // rbf only
    std::vector<double> nus;         // graph learning only
    std::vector<double> mus;         // KRR regularization
    std::vector<double> taus;        // KRR diffusion-kernel scale
    int folds = 5;

    void validate(Method method, KernelKind kernel, bool learn_graph, KrrKernel krr) const;
};

/// Values for one grid point. Unused entries stay 0.
struct MethodParams {
    double alpha = 0.0;
    double beta = 0.0;
    double sigma_sq = 0.0;
    double nu = 0.0;
    double mu = 0.0;
    double tau = 0.0;
};

/// Everything needed to fit one of the five methods except the data and the
/// grid point.
struct RegressionTask {
    Method method = Method::KRG;
    KernelSpec kernel;                 // KR / KRG; sigma_sq is taken from the grid for rbf
    std::optional<Laplacian> laplacian; // required for LRG / KRG unless learn_graph
    bool learn_graph = false;
    GraphLearnConfig learn;            // nu taken from the grid
    std::optional<Graph> graph;        // KRR: graph on the M target nodes
    KrrKernel krr_kernel = KrrKernel::diffusion;

    void validate(Eigen::Index num_nodes) const;
};

struct FitPredict {
    Eigen::MatrixXd train_fit;  // fitted outputs on the training inputs
    Eigen::MatrixXd test_pred;  // predictions for x_test
};

FitPredict fit_and_predict(const RegressionTask& task, const MethodParams& params,
                           const Dataset& train, const Eigen::MatrixXd& x_test);

/// Seeded assignment of n indices to `folds` validation folds of near-equal
/// size; every index lands in exactly one fold.
std::vector<std::vector<int>> fold_assignment(int n, int folds, std::uint64_t seed);

struct CvEntry {
    MethodParams params;
    double mean_nmse_db = 0.0; // +inf when the fit failed for some fold
};

struct CvResult {
    MethodParams best;
    double best_nmse_db = 0.0;
    std::vector<CvEntry> table;
};

/// Grid search scored by mean validation NMSE over folds, using clean
/// validation targets when the dataset carries them. Ties go to the smaller
/// alpha, then beta, sigma^2, nu (then mu, tau).
CvResult cross_validate(const Dataset& train, const RegressionTask& task, const CvGrid& grid,
                        std::uint64_t seed);

/// Graph-signal extrapolation: K_bar Phi^T (Phi K_bar Phi^T + mu S I_S)^{-1} x,
/// with Phi selecting the observed rows.
Eigen::VectorXd krr_baseline(const Eigen::MatrixXd& k_bar, const std::vector<int>& observed,
                             const Eigen::VectorXd& x, double mu);

/// The P x S linear map applied by krr_baseline.
Eigen::MatrixXd krr_operator(const Eigen::MatrixXd& k_bar, const std::vector<int>& observed,
                             double mu);

/// exp(-tau L), a heat/diffusion kernel over graph nodes.
Eigen::MatrixXd diffusion_kernel(const Laplacian& l, double tau);

/// Node ordering used by the KRR method: the target graph crossed with a
/// two-step temporal edge; targets occupy nodes [0, M), inputs [M, 2M).
Graph krr_product_graph(const Graph& g);

struct BenchResult {
    Method method = Method::KR;
    int n_train = 0;
    double snr_db = 0.0;
    std::string split; // "train" or "test"
    double nmse_db = 0.0;
    double nmse_db_mean_of_db = 0.0;
    int num_realizations = 0;
    std::uint64_t seed = 0;
};

struct BenchFailure {
    Method method = Method::KR;
    int n_train = 0;
    double snr_db = 0.0;
    std::string message;
};

/// User-supplied data for a benchmark: training pairs (targets treated as
/// clean unless t0 is given), a test set and the target graph.
struct BenchData {
    Dataset train;
    Dataset test;
    std::optional<Graph> graph;
};

struct BenchScenario {
    std::vector<Method> methods;
    std::vector<int> n_train;
    std::vector<double> snr_db;
    int realizations = 1;
    std::uint64_t seed = 0;
    std::optional<SynthConfig> synth; // snr_db and seed are set per cell
    std::optional<BenchData> data;
    KernelSpec kernel = KernelSpec::rbf(1.0); // used with user data
    CvGrid grid;
    bool learn_graph = false;
    GraphLearnConfig learn;
    KrrKernel krr_kernel = KrrKernel::diffusion;

    void validate() const;
};

struct BenchReport {
    std::vector<BenchResult> results;
    std::vector<BenchFailure> failures;
};

/// Runs every (method, N, SNR) cell over the configured realizations. Data,
/// noise and fold seeds depend only on (master seed, realization, SNR, N), so
/// methods see identical data. A failing cell is reported and dropped while
/// the others complete.
BenchReport run_benchmark(const BenchScenario& scenario);

} // namespace gkr
