// Batch front end: symtomo run|verify <config> [--tolerance x] [--out-dir dir]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "symtomo/scenario.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;

int execute(symtomo::RunMode mode, const std::string& config, std::optional<double> tol, const std::string& out_dir) {
    symtomo::Scenario scenario;
    try {
        scenario = symtomo::load_scenario(config);
    } catch (const symtomo::ConfigError& e) {
        std::cerr << "symtomo: " << e.what() << "\n";
        return kExitParse;
    } catch (const symtomo::Error& e) {
        std::cerr << "symtomo: invalid scenario: " << e.what() << "\n";
        return kExitParse;
    }
    std::filesystem::path out = out_dir.empty() ? std::filesystem::path(config).parent_path() / "out" : std::filesystem::path(out_dir);
    try {
        const symtomo::RunReport report = symtomo::run_scenario(scenario, out, mode, tol);
        for (const auto& t : report.tasks) {
            std::cout << (t.passed ? "ok    " : "FAIL  ") << t.task << " -> " << t.file.string();
            if (!t.report.empty()) std::cout << "  [" << t.report << "]";
            std::cout << "\n";
        }
        return report.exit_code;
    } catch (const symtomo::ConfigError& e) {
        std::cerr << "symtomo: " << e.what() << "\n";
        return kExitParse;
    } catch (const symtomo::Error& e) {
        std::cerr << "symtomo: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "symtomo: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symplectic tomography of continuously measured quadratic systems"};
    app.require_subcommand(1);

    std::string config, out_dir;
    double tolerance = 0.0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "scenario file (JSON)")->required();
        sub->add_option("--tolerance", tolerance, "override the tolerance of verify tasks")->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", out_dir, "output directory (default: <config dir>/out)");
    };
    CLI::App* run = app.add_subcommand("run", "run every task of the scenario");
    CLI::App* verify = app.add_subcommand("verify", "run only the verify-* tasks");
    add_common(run);
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    const std::optional<double> tol = tolerance > 0.0 ? std::optional<double>(tolerance) : std::nullopt;
    const symtomo::RunMode mode = run->parsed() ? symtomo::RunMode::run : symtomo::RunMode::verify;
    return execute(mode, config, tol, out_dir);
}
