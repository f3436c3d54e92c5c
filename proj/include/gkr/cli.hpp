#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "json.hpp"

namespace gkr::cli {

enum class LogLevel { error, warn, info, debug };

LogLevel log_level_from_string(const std::string& name);

struct RunOptions {
    /// Relative paths inside the config resolve against this directory.
    std::filesystem::path base_dir = ".";
    std::filesystem::path out_dir = ".";
    LogLevel log_level = LogLevel::warn;
    std::ostream* log = nullptr; // diagnostics; nothing is written when null
};

/// Exit statuses returned by run_command / main.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;        // runtime / numerical / I/O error
inline constexpr int exit_usage = 2;          // schema or argument error
inline constexpr int exit_partial = 3;        // bench finished with failed cells

/// Executes the command named by config["command"]. Errors propagate as
/// gkr::error; bench returns exit_partial when some cells failed.
int run_command(const nlohmann::json& config, const RunOptions& opts);

/// Loads the config file, runs it and reports errors as a JSON object on
/// `err`. Returns the process exit status.
int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                    LogLevel level, std::ostream& err);

/// {"error": {"code": ..., "message": ...}}
std::string error_json(const std::string& code, const std::string& message);

} // namespace gkr::cli
