// semiflow command line: run scenarios, verify invariant suites or finished
// runs, and emit convergence ladders.
//
// Exit status: 0 success, 2 configuration problem, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "semiflow/exec.hpp"
#include "semiflow/scenario.hpp"
#include "semiflow/verify.hpp"
#include "semiflow/version.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& output_dir) {
    const semiflow::ScenarioConfig cfg = semiflow::load_config(config_path);
    const semiflow::RunOutputs outputs = semiflow::run_scenario(cfg, output_dir);
    for (const auto& f : outputs.files) std::cout << f << "\n";
    return 0;
}

int do_verify(const std::string& target) {
    semiflow::SuiteReport report;
    const auto names = semiflow::suite_names();
    if (std::find(names.begin(), names.end(), target) != names.end()) {
        report = semiflow::run_suite(target);
    } else if (std::filesystem::exists(target)) {
        std::filesystem::path p(target);
        if (std::filesystem::is_directory(p)) p /= "manifest.json";
        report = semiflow::verify_artifacts(p.string());
    } else {
        throw semiflow::ConfigError("unknown suite or missing run: " + target);
    }
    std::cout << semiflow::report_json(report);
    return report.pass ? 0 : 1;
}

int do_converge(const std::string& config_path, const std::string& parameter,
                const std::vector<double>& values, const std::string& out_path) {
    const semiflow::ScenarioConfig cfg = semiflow::load_config(config_path);
    const semiflow::LadderSpec ladder{parameter, values};
    if (out_path.empty()) {
        semiflow::convergence_study(cfg, ladder, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
        semiflow::convergence_study(cfg, ladder, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    semiflow::apply_thread_env();

    CLI::App app{"semiflow: semiconvex particle and Galerkin dynamics"};
    app.set_version_flag("--version", semiflow::kVersion);
    app.require_subcommand(1);

    std::string config_path, output_dir, target, parameter = "dt", out_path;
    std::vector<double> ladder_values;

    auto* run_cmd = app.add_subcommand("run", "execute a scenario config");
    run_cmd->add_option("config", config_path, "scenario JSON file")->required();
    run_cmd->add_option("--output-dir", output_dir, "override the output directory");

    auto* verify_cmd =
        app.add_subcommand("verify", "run an invariant suite or re-check a run");
    verify_cmd->add_option("target", target, "suite name or run directory/manifest")
        ->required();

    auto* conv_cmd = app.add_subcommand("converge", "resolution ladder study");
    conv_cmd->add_option("config", config_path, "scenario JSON file")->required();
    conv_cmd->add_option("--parameter", parameter, "ladder parameter: dt | n | modes");
    conv_cmd->add_option("--ladder", ladder_values, "ladder values")->required();
    conv_cmd->add_option("--output", out_path, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(config_path, output_dir);
        if (verify_cmd->parsed()) return do_verify(target);
        return do_converge(config_path, parameter, ladder_values, out_path);
    } catch (const semiflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
