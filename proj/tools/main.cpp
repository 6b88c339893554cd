#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "safectl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"safectl: energy-function safety indices and black-box safe-control projection"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string trace_path;
    std::string mode;
    std::string state_spec;
    bool want_k_min = false;
    int trials = 200;
    int resolution = 41;
    std::vector<int> n_dirs_list = {3, 5, 10, 20};
    safectl::cli::SimOverrides overrides;
    std::uint64_t seed_flag = 0;
    long steps_flag = -1;

    auto add_seed_steps = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_flag, "override the config seed");
        cmd->add_option("--steps", steps_flag, "override the episode length");
    };

    auto* synth = app.add_subcommand("synthesize", "run the mode-appropriate design-rule validators");
    synth->add_option("--config", config_path, "run configuration (JSON)")->required();
    synth->add_flag("--k-min", want_k_min, "also print the smallest feasible gain k");

    auto* sim = app.add_subcommand("simulate", "run a safeguarded episode and write the trace");
    sim->add_option("--config", config_path, "run configuration (JSON)")->required();
    sim->add_option("--out", out_path, "trace CSV output path")->required();
    add_seed_steps(sim);

    auto* verify = app.add_subcommand("verify", "check invariance and convergence properties of a trace");
    verify->add_option("--trace", trace_path, "trace CSV path")->required();
    verify->add_option("--config", config_path, "run configuration (JSON)")->required();

    auto* toy = app.add_subcommand("toy", "run the built-in unicycle comparison scenario");
    toy->add_option("--mode", mode, "discrete | continuous-approx")->required();
    toy->add_option("--config", config_path, "optional scenario override (toy model config)");
    toy->add_option("--out", out_path, "optional trace CSV output path");
    add_seed_steps(toy);

    auto* scan = app.add_subcommand("scan", "write the delta-phi grid over the control box at a state");
    scan->add_option("--config", config_path, "run configuration (JSON)")->required();
    scan->add_option("--state", state_spec, "state as px,py,theta[,v] (defaults to config start)");
    scan->add_option("--out", out_path, "grid CSV output path")->required();
    scan->add_option("--resolution", resolution, "grid resolution per control dimension");

    auto* bench = app.add_subcommand("bench", "phase-1 success-rate benchmark over unsafe states");
    bench->add_option("--config", config_path, "run configuration (JSON)")->required();
    bench->add_option("--trials", trials, "number of sampled unsafe invocations");
    bench->add_option("--n-dirs", n_dirs_list, "direction counts to compare");
    bench->add_option("--out", out_path, "summary CSV output path");

    CLI11_PARSE(app, argc, argv);

    if (seed_flag != 0) overrides.seed = seed_flag;
    if (steps_flag >= 0) overrides.steps = steps_flag;

    try {
        if (synth->parsed()) {
            return safectl::cli::run_synthesize(config_path, want_k_min, std::cout, std::cerr);
        }
        if (sim->parsed()) {
            return safectl::cli::run_simulate(config_path, out_path, overrides, std::cout, std::cerr);
        }
        if (verify->parsed()) {
            return safectl::cli::run_verify(trace_path, config_path, std::cout, std::cerr);
        }
        if (toy->parsed()) {
            return safectl::cli::run_toy(mode, config_path, out_path, overrides, std::cout, std::cerr);
        }
        if (scan->parsed()) {
            return safectl::cli::run_scan(config_path, state_spec, out_path, resolution, std::cout,
                                          std::cerr);
        }
        if (bench->parsed()) {
            return safectl::cli::run_bench(config_path, trials, n_dirs_list, out_path, std::cout,
                                           std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 70;
    }
    return 0;
}
