#include "momentlab/errors.hpp"
#include "momentlab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace momentlab;

namespace {

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-lab: moment dynamics of the time-dependent quantum harmonic oscillator"};
    app.require_subcommand(1);

    harness::GlobalOptions global;
    std::string out_dir;
    app.add_option("--out", out_dir, "Output directory (overrides config and MOMENT_LAB_OUT)");
    app.add_option("--threads", global.threads, "Worker threads for engines and sweeps")
        ->check(CLI::PositiveNumber);
    app.add_flag("--allow-inverted", global.allow_inverted, "Permit omega^2 <= 0 profiles");
    app.set_version_flag("--version", std::string(harness::kVersion));

    std::string config;
    auto* run = app.add_subcommand("run", "Run the engines selected in a config file");
    run->add_option("config", config, "Config file (JSON)")->required();

    std::string suite;
    std::size_t grid_points = 1024;
    auto* verify = app.add_subcommand("verify", "Run a built-in verification suite");
    verify->add_option("suite", suite, "algebra | closed-form | invariants | oracle")
        ->required()
        ->check(CLI::IsMember({"algebra", "closed-form", "invariants", "oracle"}));
    verify->add_option("--grid-points", grid_points, "Grid size for the oracle suite");

    std::string param, values;
    auto* sweep = app.add_subcommand("sweep", "Run a config once per parameter value");
    sweep->add_option("config", config, "Config file (JSON)")->required();
    sweep->add_option("--param", param, "Dotted config key, e.g. potential.V4")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : harness::kValidation;
    }
    if (!out_dir.empty()) global.out_dir = out_dir;

    if (*run) return harness::run(config, global, std::cerr);
    if (*sweep) return harness::sweep(config, param, split_values(values), global, std::cerr);

    try {
        harness::VerifyOptions opt;
        opt.grid_points = grid_points;
        opt.threads = global.threads;
        const auto report = harness::verify_suite(suite, opt);
        harness::print_report(report, std::cout);
        return report.passed() ? harness::kOk : harness::kCheckFailed;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return harness::kValidation;
    }
}
