#include <iostream>

#include <CLI11.hpp>

#include "fbp/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Two-phase free boundary experiment runner"};
    app.set_version_flag("--version", fbp::kVersion);
    app.require_subcommand(1);

    fbp::RunOptions options;
    std::string out_dir;
    long long seed = 0;
    double margin = 0.0, slack = 0.0;
    int profiles = 0;

    const char* commands[][2] = {
        {"solve", "Solve the Dirichlet problem and write the field"},
        {"analyze", "Decay table, dichotomy and the normalized decay claim"},
        {"viscosity-check", "Interior and free boundary viscosity tests"},
        {"cascade", "Flatness cascade at the free boundary point nearest the origin"},
        {"barrier", "Barrier Laplacian and comparison against the solved field"},
        {"limit-sweep", "Residual of the limit equation for the rescaled laws"},
        {"suite", "Run the acceptance matrix and write suite_summary.csv"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", options.config_path, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides the output key)");
        sub->add_option("--seed", seed, "Random seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--override", options.overrides, "key=value, repeatable")->take_all();
        if (std::string(name) == "viscosity-check") {
            sub->add_option("--margin", margin, "Interior strictness margin")->check(CLI::PositiveNumber);
            sub->add_option("--slack", slack, "Free boundary slack")->check(CLI::PositiveNumber);
            sub->add_option("--profiles", profiles, "Number of test profiles")->check(CLI::PositiveNumber);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    options.command = sub->get_name();
    if (sub->count("--out")) options.out_dir = out_dir;
    if (sub->count("--seed")) options.seed = seed;
    if (options.command == "viscosity-check") {
        if (sub->count("--margin")) options.margin = margin;
        if (sub->count("--slack")) options.slack = slack;
        if (sub->count("--profiles")) options.profiles = profiles;
    }
    return fbp::run(options, std::cerr);
}
