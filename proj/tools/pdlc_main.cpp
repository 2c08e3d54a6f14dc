#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "pdlc/config.hpp"
#include "pdlc/errors.hpp"
#include "pdlc/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Packetized direct load control: queue analysis, procurement and simulation"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    int algorithm = 3;
    for (const auto& name : pdlc::subcommand_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "INI configuration file")->required();
        sub->add_option("--out", out_path, "CSV output file")->required();
        sub->add_option("--seed", seed, "RNG seed, overrides [run] seed");
        if (name == "procure-double") {
            sub->add_option("--algorithm", algorithm, "stochastic approximation variant")
                ->check(CLI::IsMember({1, 2, 3}));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pdlc::kExitConfig;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "config error: cannot read " << config_path << '\n';
        return pdlc::kExitConfig;
    }
    std::stringstream text;
    text << in.rdbuf();

    pdlc::RunConfig cfg;
    try {
        cfg = pdlc::parse_config(text.str());
    } catch (const pdlc::ConfigError& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
        return pdlc::kExitConfig;
    }
    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (name == "procure-double" && sub->count("--algorithm") > 0) cfg.algorithm = algorithm;

    std::ostringstream csv;
    const int code = pdlc::run_subcommand(name, cfg, csv, std::cerr);
    if (code == pdlc::kExitConfig) return code;

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "config error: cannot write " << out_path << '\n';
        return pdlc::kExitConfig;
    }
    out << csv.str();
    return code;
}
