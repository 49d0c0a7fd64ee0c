// noma_ec: batch driver for the uplink NOMA effective-capacity experiments.
//
//   noma_ec curves --scheme noma,oma --snr-db -10:30:1 --beta -1 --p1 0.2
//   noma_ec validate --user 1 --beta -1 --output fig5.csv
//   noma_ec lemma --id 2b --seed 7
//   noma_ec pairing --M 4 --snr-db -10:40:5
//   noma_ec special-selftest

#include "noma_ec/cli_runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#ifndef NOMA_EC_GIT_DESCRIBE
#define NOMA_EC_GIT_DESCRIBE "unknown"
#endif

int main(int argc, char** argv)
{
    namespace cli = noma_ec::cli;

    CLI::App app{"Effective capacity of uplink NOMA vs OMA: curves, validation, lemma checks, pairing"};
    std::string command;
    std::string config_path;
    // Flag values are kept as text and applied in one place, after the config file.
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;

    app.add_option("command", command, "curves | validate | lemma | pairing | special-selftest");
    app.add_option("--config", config_path, "flat key = value file; flags override it");
    const std::pair<const char*, const char*> spec[] = {
        {"snr-db", "SNR grid start:stop:step in dB"},
        {"scheme", "comma list of noma, oma, gap, total"},
        {"beta", "comma list of normalized QoS exponents (< 0)"},
        {"p1", "weak-user power fraction"},
        {"user", "1 or 2 (default both)"},
        {"id", "lemma id 1a..5d, 6, or all"},
        {"seed", "64-bit master seed (default NOMA_EC_SEED or 1)"},
        {"mc-samples", "Monte Carlo samples (>= 1000)"},
        {"M", "number of users for pairing"},
        {"layout", "pairing layout such as 1-2|3-4"},
        {"method", "lemma evaluation: numeric or monte_carlo"},
        {"output", "CSV path; a manifest is written next to it"},
    };
    for (const auto& [name, help] : spec) {
        options[name] = app.add_option(std::string("--") + name, flags[name], help)->allow_extra_args(false);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::exit_ok : cli::exit_config;
    }

    cli::ExperimentConfig config;
    try {
        config.seed = cli::default_seed();
        if (!config_path.empty()) {
            for (const auto& [key, value] : cli::read_config_file(config_path)) {
                cli::apply_setting(config, key, value);
            }
        }
        for (const auto& [name, opt] : options) {
            if (opt->count() > 0) {
                cli::apply_setting(config, name, flags[name]);
            }
        }
        if (!command.empty()) {
            config.command = command;
        }
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::exit_config;
    }
    return cli::run(config, std::cout, std::cerr, NOMA_EC_GIT_DESCRIBE);
}
