#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "fermsig/parallel.hpp"
#include "report.hpp"

namespace {

enum Exit { ok = 0, verify_fail = 1, config_error = 2, numeric_failure = 3 };

}  // namespace

int main(int argc, char** argv) {
    using namespace fermsig::cli;

    CLI::App app{"fermsig: fermionic signature operator on ultrastatic and de Sitter modes"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;

    const std::vector<std::pair<const char*, const char*>> commands{
        {"evolve", "Tabulate mode solutions u(t) on the lambda x mass x time grid"},
        {"signature", "Signature matrix, spectral projectors and nu per (lambda, m)"},
        {"verify", "Run the property checks; exit 1 if any fails"},
        {"sweep", "Tabulate de Sitter scattering matrices W+- per (lambda, m)"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--set", overrides, "Override a config key: key=value (repeatable)")->allow_extra_args(false);
        sub->add_option("--out", out_path, "Output file (.csv or .json)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        if (!fermsig::worker_env_valid()) throw ConfigError("FERMSIG_THREADS must be a positive integer");
        RunConfig cfg = load_config(config_path, overrides);
        if (out_path.empty()) out_path = cfg.out;
        if (out_path.empty()) throw ConfigError("no output path: pass --out or set \"out\" in the config");
        if (cfg.format.empty()) {
            if (out_path.size() >= 4 && out_path.compare(out_path.size() - 4, 4, ".csv") == 0) cfg.format = "csv";
            if (out_path.size() >= 5 && out_path.compare(out_path.size() - 5, 5, ".json") == 0) cfg.format = "json";
        }
        const CommandResult result = run_command(command, cfg);
        write_file(out_path, result.content);
        if (result.exit_code == verify_fail) std::cerr << "fermsig verify: FAIL (see " << out_path << ")\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "fermsig: config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "fermsig: config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "fermsig: numeric failure: " << e.what() << '\n';
        return numeric_failure;
    }
}
