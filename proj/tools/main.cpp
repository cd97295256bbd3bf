#include <CLI11.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ptwell/run_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Four-well Bose-Hubbard simulator with feedback-controlled "
                 "tunnelling rates and onsite energies"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;

    auto* run_cmd = app.add_subcommand("run", "execute one experiment");
    run_cmd->add_option("config", config_path, "config file (key=value)")->required();
    run_cmd->add_option("-o,--output", out_dir, "output directory");
    std::uint64_t seed_value = 0;
    auto* seed_opt = run_cmd->add_option("--seed", seed_value, "override the config seed");

    std::string plot_dir;
    auto* plot_cmd = app.add_subcommand("plot", "emit the plotting script for a run directory");
    plot_cmd->add_option("dir", plot_dir, "run output directory")->required();

    std::string sweep_param;
    std::vector<double> sweep_values;
    int sweep_seeds = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep with seed ensembles");
    sweep_cmd->add_option("config", config_path, "base config file")->required();
    sweep_cmd->add_option("--param", sweep_param, "config key to vary")->required();
    sweep_cmd->add_option("--values", sweep_values, "parameter values")->required();
    sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per value");
    sweep_cmd->add_option("-o,--output", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        if (seed_opt->count()) seed_override = seed_value;
        return ptwell::cmd_run(config_path, out_dir, seed_override);
    }
    if (plot_cmd->parsed()) return ptwell::cmd_plot(plot_dir);
    return ptwell::cmd_sweep(config_path, sweep_param, sweep_values, sweep_seeds, out_dir);
}
