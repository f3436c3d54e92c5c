#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gkr/cli.hpp"
#include "gkr/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Kernel regression over graphs: experiments from a single JSON config"};
    std::string config;
    std::string out_dir = ".";
    std::string level = "warn";
    app.add_option("--config", config, "experiment config (JSON)")->required();
    app.add_option("--out-dir", out_dir, "directory for output files");
    app.add_option("--log-level", level, "error | warn | info | debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << gkr::cli::error_json("usage", e.what());
        return gkr::cli::exit_usage;
    }
    return gkr::cli::run_config_file(config, out_dir, gkr::cli::log_level_from_string(level), std::cerr);
}
