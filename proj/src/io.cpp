#include "gkr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "gkr/error.hpp"

namespace gkr::io {

std::string format_double(double x) {
    if (!std::isfinite(x)) {
        throw error(errc::invalid_argument, "cannot serialize a non-finite value");
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line) {
    if (cell.empty()) {
        throw error(errc::parse, where(source, line) + ": missing value");
    }
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw error(errc::parse, where(source, line) + ": not a finite number: '" + cell + "'");
    }
    return v;
}

struct RawRows {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
};

RawRows parse_rows(const std::string& text, const std::string& source, bool has_header) {
    RawRows out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool header_done = !has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_cells(line);
        if (!header_done) {
            for (const auto& c : cells) {
                if (c.empty()) {
                    throw error(errc::parse, where(source, line_no) + ": empty column name");
                }
            }
            out.header = std::move(cells);
            width = out.header.size();
            header_done = true;
            continue;
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            throw error(errc::parse, where(source, line_no) + ": expected " + std::to_string(width) +
                                         " fields, found " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            row.push_back(parse_cell(c, source, line_no));
        }
        out.rows.push_back(std::move(row));
    }
    if (has_header && !header_done) {
        throw error(errc::parse, source + ": missing header row");
    }
    return out;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t width) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

} // namespace

Eigen::MatrixXd matrix_from_csv(const std::string& text, const std::string& source) {
    const RawRows raw = parse_rows(text, source, false);
    if (raw.rows.empty()) {
        throw error(errc::parse, source + ": no data rows");
    }
    return to_matrix(raw.rows, raw.rows.front().size());
}

Table table_from_csv(const std::string& text, const std::string& source) {
    RawRows raw = parse_rows(text, source, true);
    if (raw.rows.empty()) {
        throw error(errc::parse, source + ": no data rows");
    }
    Eigen::MatrixXd values = to_matrix(raw.rows, raw.header.size());
    return Table{std::move(raw.header), std::move(values)};
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error(errc::io, "cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw error(errc::io, "cannot create directory '" + path.parent_path().string() + "'");
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw error(errc::io, "cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw error(errc::io, "write to '" + path.string() + "' failed");
    }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    write_text(path, matrix_to_csv(m));
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
    return matrix_from_csv(read_text(path), path.string());
}

Table read_table_csv(const std::filesystem::path& path) {
    return table_from_csv(read_text(path), path.string());
}

nlohmann::json graph_to_json(const Graph& g) {
    const Eigen::MatrixXd& a = g.adjacency();
    nlohmann::json edges = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            if (a(i, j) != 0.0) {
                edges.push_back(nlohmann::json::array({i, j, a(i, j)}));
            }
        }
    }
    return nlohmann::json{{"nodes", g.num_nodes()}, {"edges", std::move(edges)}};
}

Graph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges")) {
        throw error(errc::schema, "graph JSON needs 'nodes' and 'edges'");
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "nodes" && key != "edges") {
            throw error(errc::schema, "unknown key '" + key + "' in graph JSON");
        }
    }
    if (!j["nodes"].is_number_integer() || j["nodes"].get<long long>() < 1) {
        throw error(errc::schema, "graph 'nodes' must be a positive integer");
    }
    const auto m = j["nodes"].get<Eigen::Index>();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    if (!j["edges"].is_array()) {
        throw error(errc::schema, "graph 'edges' must be an array");
    }
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
            !e[1].is_number_integer() || !e[2].is_number()) {
            throw error(errc::schema, "each edge must be [i, j, w]");
        }
        const auto i = e[0].get<Eigen::Index>();
        const auto k = e[1].get<Eigen::Index>();
        const double w = e[2].get<double>();
        if (i < 0 || k < 0 || i >= m || k >= m) {
            throw error(errc::invalid_graph, "edge index out of range");
        }
        if (i == k) {
            throw error(errc::invalid_graph, "self-loops are not allowed");
        }
        if (a(i, k) != 0.0) {
            throw error(errc::invalid_graph, "duplicate edge");
        }
        a(i, k) = w;
        a(k, i) = w;
    }
    return Graph(std::move(a));
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw error(errc::schema, "'" + what + "' must be a nonempty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw error(errc::schema, "'" + what + "' has ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const auto& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) {
                throw error(errc::schema, "'" + what + "' has a non-numeric entry");
            }
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

} // namespace gkr::io
