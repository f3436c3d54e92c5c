#pragma once

#include <filesystem>

#include "json.hpp"

#include "gkr/kernels.hpp"
#include "gkr/solver.hpp"

namespace gkr {

inline constexpr int model_format_version = 1;

/// {"kind": ..., "sigma_sq": ...} for rbf; precomputed kernels carry the
/// full matrix inline under "matrix".
nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

/// {version, kernel_spec, rbf_normalizer, hyper, laplacian, x_train, psi},
/// matrices as row-major arrays and the Laplacian inline.
nlohmann::json model_to_json(const KrgModel& model);
/// Rebuilds the Gram matrix from x_train; the stored RBF normalizer is kept
/// so predictions match the fitting process exactly.
KrgModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const KrgModel& model);
KrgModel load_model(const std::filesystem::path& path);

} // namespace gkr
