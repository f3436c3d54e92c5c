#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gkr/graphs.hpp"

namespace gkr::io {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Headerless numeric CSV, one matrix row per line, LF endings.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& text, const std::string& source = "<memory>");

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Numeric CSV whose first line is a header. Ragged rows, empty cells and
/// non-numeric cells are rejected with the offending line number.
struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};
Table table_from_csv(const std::string& text, const std::string& source = "<memory>");
Table read_table_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
/// Writes bytes as given; parent directories are created.
void write_text(const std::filesystem::path& path, const std::string& text);

/// {"nodes": M, "edges": [[i, j, w], ...]}, 0-based, i < j.
nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

/// Row-major nested arrays.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what);

/// Serialized JSON followed by a newline.
std::string dump(const nlohmann::json& j);

} // namespace gkr::io
