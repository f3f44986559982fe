#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "ecorisk/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"growth-environment disaster-risk models: PIDE solver, Monte Carlo "
                 "simulator and cross-verification suite"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string outdir;
    std::string sweep_param;
    std::vector<double> sweep_values;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "path to the run configuration (JSON)")
            ->required();
        sub->add_option("--threads", threads, "worker threads (results are thread-count "
                                              "invariant)");
        sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--outdir", outdir, "output directory override");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the stationary equation and write "
                                                      "value/policy fields");
    add_common(solve_cmd);
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo ensemble under the "
                                                       "configured policy");
    add_common(sim_cmd);
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the verification suite; exit 0 "
                                                        "iff all checks pass");
    add_common(verify_cmd);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "re-solve across a parameter range");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", sweep_param, "model parameter to sweep")->required();
    sweep_cmd->add_option("--values", sweep_values, "parameter values")->required();

    CLI11_PARSE(app, argc, argv);

    ecorisk::RunConfig config;
    try {
        config = ecorisk::RunConfig::from_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return ecorisk::kConfigError;
    }

    ecorisk::RunOptions opts;
    opts.threads = threads;
    if (seed_set) opts.seed_override = seed;
    if (!outdir.empty()) opts.outdir_override = outdir;

    if (solve_cmd->parsed()) return ecorisk::cmd_solve(config, opts);
    if (sim_cmd->parsed()) return ecorisk::cmd_simulate(config, opts);
    if (verify_cmd->parsed()) return ecorisk::cmd_verify(config, opts);
    if (sweep_cmd->parsed()) return ecorisk::cmd_sweep(config, opts, sweep_param, sweep_values);
    return ecorisk::kConfigError;
}
