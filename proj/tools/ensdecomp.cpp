// Command-line runner: decompose, theory, verify, scatter.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ensdecomp/harness/commands.hpp"
#include "ensdecomp/harness/config.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ensdecomp::ConfigError("cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ensdecomp::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bias/variance/diversity decompositions of ensemble losses"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool svg = false;
    auto common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "JSON configuration file");
        if (needs_config) opt->required();
        cmd->add_option("--seed", seed, "master seed (overrides the config)");
        cmd->add_option("--out", out_dir, "output directory (overrides the config)");
    };

    auto* decompose = app.add_subcommand("decompose", "decomposition sweep over ensemble sizes or depths");
    common(decompose, true);
    decompose->add_flag("--svg", svg, "also write an SVG chart");

    auto* theory = app.add_subcommand("theory", "independent-voter diversity-effect curves");
    common(theory, false);
    theory->add_flag("--svg", svg, "also write an SVG chart");

    auto* verify = app.add_subcommand("verify", "randomised identity residual suites");
    std::size_t counts = 1000;
    bool inject_fault = false;
    verify->add_option("--seed", seed, "suite seed");
    verify->add_option("--counts", counts, "instances per identity")->check(CLI::PositiveNumber);
    verify->add_flag("--inject-fault", inject_fault, "negative control: corrupt one identity");

    auto* scatter = app.add_subcommand("scatter", "validation diversity against test 0-1 gain");
    common(scatter, true);
    scatter->add_flag("--svg", svg, "also write an SVG chart");

    CLI11_PARSE(app, argc, argv);

    const ensdecomp::CommandOptions opt{seed, out_dir, svg};
    try {
        if (*decompose) return ensdecomp::cmd_decompose(ensdecomp::parse_config(read_json(config_path)), opt, std::cout);
        if (*scatter) return ensdecomp::cmd_scatter(ensdecomp::parse_config(read_json(config_path)), opt, std::cout);
        if (*theory) {
            const auto t = config_path.empty() ? ensdecomp::TheoryConfig{}
                                               : ensdecomp::parse_theory_config(read_json(config_path));
            return ensdecomp::cmd_theory(t, opt, std::cout);
        }
        if (*verify) return ensdecomp::cmd_verify({counts, seed.value_or(0), inject_fault}, std::cout);
    } catch (const ensdecomp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
