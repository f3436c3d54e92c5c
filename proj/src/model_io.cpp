#include "gkr/model_io.hpp"

#include <set>
#include <string>

#include "gkr/error.hpp"
#include "gkr/io.hpp"

namespace gkr {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& what) {
    if (!j.is_object()) {
        throw error(errc::schema, what + " must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw error(errc::schema, "unknown key '" + key + "' in " + what);
        }
    }
}

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& what) {
    if (!j.contains(key)) {
        throw error(errc::schema, what + " is missing '" + key + "'");
    }
    return j[key];
}

} // namespace

nlohmann::json kernel_spec_to_json(const KernelSpec& spec) {
    nlohmann::json j{{"kind", std::string(to_string(spec.kind))}};
    if (spec.kind == KernelKind::rbf) {
        j["sigma_sq"] = spec.sigma_sq;
    } else if (spec.kind == KernelKind::precomputed) {
        j["matrix"] = io::matrix_to_json(*spec.matrix);
    }
    return j;
}

KernelSpec kernel_spec_from_json(const nlohmann::json& j) {
    reject_unknown(j, {"kind", "sigma_sq", "matrix"}, "kernel_spec");
    const auto& kind_j = require(j, "kind", "kernel_spec");
    if (!kind_j.is_string()) {
        throw error(errc::schema, "kernel_spec 'kind' must be a string");
    }
    switch (kernel_kind_from_string(kind_j.get<std::string>())) {
    case KernelKind::linear:
        return KernelSpec::linear();
    case KernelKind::rbf: {
        const auto& s = require(j, "sigma_sq", "rbf kernel_spec");
        if (!s.is_number()) {
            throw error(errc::schema, "'sigma_sq' must be a number");
        }
        return KernelSpec::rbf(s.get<double>());
    }
    case KernelKind::precomputed:
        return KernelSpec::precomputed(io::matrix_from_json(require(j, "matrix", "kernel_spec"), "matrix"));
    }
    throw error(errc::schema, "unknown kernel kind");
}

nlohmann::json model_to_json(const KrgModel& model) {
    nlohmann::json j;
    j["version"] = model_format_version;
    j["kernel_spec"] = kernel_spec_to_json(model.spec);
    j["rbf_normalizer"] = model.gram.rbf_normalizer ? nlohmann::json(*model.gram.rbf_normalizer)
                                                    : nlohmann::json(nullptr);
    j["hyper"] = {{"alpha", model.hyper.alpha}, {"beta", model.hyper.beta}};
    j["laplacian"] = io::matrix_to_json(model.laplacian.matrix());
    j["x_train"] = io::matrix_to_json(model.x_train);
    j["psi"] = io::matrix_to_json(model.psi);
    return j;
}

KrgModel model_from_json(const nlohmann::json& j) {
    const std::string what = "model";
    reject_unknown(j, {"version", "kernel_spec", "rbf_normalizer", "hyper", "laplacian", "x_train", "psi"},
                   what);
    const auto& version = require(j, "version", what);
    if (!version.is_number_integer() || version.get<int>() != model_format_version) {
        throw error(errc::schema, "unsupported model version");
    }
    KernelSpec spec = kernel_spec_from_json(require(j, "kernel_spec", what));
    const auto& hj = require(j, "hyper", what);
    reject_unknown(hj, {"alpha", "beta"}, "hyper");
    const auto& aj = require(hj, "alpha", "hyper");
    const auto& bj = require(hj, "beta", "hyper");
    if (!aj.is_number() || !bj.is_number()) {
        throw error(errc::schema, "hyper values must be numbers");
    }
    Hyperparams hyper{aj.get<double>(), bj.get<double>()};
    hyper.validate();
    Laplacian lap = Laplacian::from_matrix(io::matrix_from_json(require(j, "laplacian", what), "laplacian"));
    Eigen::MatrixXd x_train = io::matrix_from_json(require(j, "x_train", what), "x_train");
    Eigen::MatrixXd psi = io::matrix_from_json(require(j, "psi", what), "psi");
    if (psi.rows() != x_train.rows()) {
        throw error(errc::dimension_mismatch, "psi rows do not match the training samples");
    }
    if (psi.cols() != lap.num_nodes()) {
        throw error(errc::dimension_mismatch, "psi columns do not match the Laplacian size");
    }
    GramMatrix gram = gram_matrix(x_train, spec);
    if (spec.kind == KernelKind::rbf) {
        const auto& z = require(j, "rbf_normalizer", what);
        if (!z.is_number()) {
            throw error(errc::schema, "rbf model needs a numeric 'rbf_normalizer'");
        }
        gram.rbf_normalizer = z.get<double>();
    }
    return KrgModel{std::move(psi), std::move(x_train), std::move(spec), std::move(gram), std::move(lap),
                    hyper};
}

void save_model(const std::filesystem::path& path, const KrgModel& model) {
    io::write_text(path, io::dump(model_to_json(model)));
}

KrgModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw error(errc::parse, path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace gkr
