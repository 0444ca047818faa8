#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "xlsim/experiments.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& preset, int trials, long long seed,
           const std::string& output, const std::string& format, int threads) {
    xlsim::ScenarioConfig cfg;
    try {
        if (!preset.empty()) {
            const auto& all = xlsim::presets();
            const auto it = all.find(preset);
            if (it == all.end()) {
                std::cerr << "xlsim: unknown preset '" << preset << "' (see list-presets)\n";
                return 1;
            }
            cfg = xlsim::parse_config(it->second);
        } else {
            cfg = xlsim::load_config_file(config_path);
        }
        if (trials > 0) cfg.trials = trials;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (!output.empty()) cfg.output_path = output;
        if (format == "csv") cfg.format = xlsim::OutputFormat::Csv;
        else if (format == "json") cfg.format = xlsim::OutputFormat::Json;
        else if (!format.empty()) {
            std::cerr << "xlsim: unknown format '" << format << "'\n";
            return 1;
        }
        xlsim::validate_config(cfg);
    } catch (const xlsim::ConfigError& e) {
        std::cerr << "xlsim: " << e.what() << "\n";
        return 1;
    }

    try {
        xlsim::RunOptions opt;
        opt.threads = threads;
        const xlsim::MetricsTable table = xlsim::run_scenario(cfg, opt);
        xlsim::emit(table, cfg.format, cfg.output_path);
        std::cerr << "xlsim: wrote " << table.rows.size() << " rows to " << cfg.output_path << "\n";
    } catch (const xlsim::ConfigError& e) {
        std::cerr << "xlsim: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "xlsim: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"XL-MIMO uplink simulator: channel statistics, MMSE estimation and combining,\n"
                 "statistics-only SINR approximations, and joint scheduling/pilot assignment."};
    app.require_subcommand(1);

    std::string config_path, preset, output, format;
    int trials = 0;
    long long seed = -1;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "Run a scenario and emit the metrics table");
    run->add_option("--config", config_path, "scenario config file (key=value)");
    run->add_option("--preset", preset, "named preset scenario");
    run->add_option("--trials", trials, "override the per-point trial count");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--output", output, "override the output path");
    run->add_option("--format", format, "csv or json");
    run->add_option("--threads", threads, "worker threads (1 forces the serial path)");

    CLI::App* list = app.add_subcommand("list-presets", "List the named preset scenarios");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a config file");
    validate->add_option("--config", validate_path, "scenario config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (run->parsed()) {
        if (config_path.empty() == preset.empty()) {
            std::cerr << "xlsim: run needs exactly one of --config or --preset\n";
            return 1;
        }
        return do_run(config_path, preset, trials, seed, output, format, threads);
    }
    if (list->parsed()) {
        for (const auto& [name, text] : xlsim::presets()) {
            std::string::size_type eol = text.find('\n');
            std::cout << name << "  " << (eol != std::string::npos && text[0] == '#' ? text.substr(2, eol - 2) : "")
                      << "\n";
        }
        return 0;
    }
    if (validate->parsed()) {
        try {
            const xlsim::ScenarioConfig cfg = xlsim::load_config_file(validate_path);
            xlsim::validate_config(cfg);
        } catch (const xlsim::ConfigError& e) {
            std::cerr << "xlsim: " << e.what() << "\n";
            return 1;
        }
        std::cout << "ok\n";
        return 0;
    }
    return 0;
}
