#include <CLI11.hpp>

#include <iostream>

#include "gridflow/cli.hpp"
#include "gridflow/kernels.hpp"

using namespace gridflow;

int main(int argc, char** argv) {
    CLI::App app{"gridflow: mixed-autonomy grid intersection simulator and trainer"};
    app.require_subcommand(1);

    cli::CommonOptions common;
    std::string kernels_flag = "auto";
    app.add_option("--kernels", kernels_flag, "numeric kernel backend: auto|scalar|avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    auto add_common = [&common](CLI::App* cmd, bool needs_out = true) {
        cmd->add_option("--config", common.config_path, "experiment config (JSON)")
            ->required();
        if (needs_out)
            cmd->add_option("--out", common.out_dir, "output directory")->required();
        cmd->add_option("--seeds", common.seeds, "evaluation trajectories per configuration");
        cmd->add_option("--threads", common.threads, "worker threads (0 = hardware)");
        cmd->add_option("--profile", common.profile, "override config profile: desk|paper")
            ->check(CLI::IsMember({"desk", "paper"}));
        cmd->add_option("--oracle-budget", common.oracle_budget,
                        "hill-climbing evaluation budget");
    };

    std::string checkpoint, controller_text = "all_idm", oracle_table;
    std::vector<std::string> sweep_controllers;
    int entry_lane = -1, ts_steps = 0;
    bool raw_dump = false, obs_dump = false;

    auto* train_cmd = app.add_subcommand("train", "train a policy with REINFORCE");
    add_common(train_cmd);
    train_cmd->add_option("--checkpoint", checkpoint, "initial parameters (finetune/transfer)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a controller over the configured inflows");
    add_common(eval_cmd);
    eval_cmd->add_option("--controller", controller_text,
                         "all_idm | learned[:CKPT] | oracle[:PLAN] | equal_phase[:TAU] | "
                         "max_pressure[:TAU_MIN] | priority[:AXIS]");
    eval_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint for learned");
    eval_cmd->add_option("--oracle-table", oracle_table,
                         "oracle eval CSV for percent-of-oracle normalization");

    auto* oracle_cmd = app.add_subcommand("oracle-search",
                                          "hill-climb the fixed signal plan for one scenario");
    add_common(oracle_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "inflow-table outflow matrix per controller");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--controller", sweep_controllers, "controllers (repeatable)")
        ->required();
    sweep_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint for learned");

    auto* ts_cmd = app.add_subcommand("timespace", "export per-step vehicle positions along routes");
    add_common(ts_cmd);
    ts_cmd->add_option("--controller", controller_text, "controller (as in eval)");
    ts_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint for learned");
    ts_cmd->add_option("--entry", entry_lane, "restrict to the route of this entry lane id");
    ts_cmd->add_option("--steps", ts_steps, "recorded steps (default: horizon)");
    ts_cmd->add_flag("--raw", raw_dump, "also dump per-lane positions and speeds");
    ts_cmd->add_flag("--dump-obs", obs_dump, "also dump per-AV observation vectors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (kernels_flag == "scalar") kernels::set_backend(kernels::Backend::Scalar);
        if (kernels_flag == "avx2" && !kernels::set_backend(kernels::Backend::Avx2))
            throw std::runtime_error("avx2 kernels not supported on this CPU");

        if (train_cmd->parsed()) return cli::cmd_train(common, checkpoint);
        if (eval_cmd->parsed())
            return cli::cmd_eval(common, cli::parse_controller(controller_text, checkpoint),
                                 oracle_table);
        if (oracle_cmd->parsed()) return cli::cmd_oracle_search(common);
        if (sweep_cmd->parsed()) {
            std::vector<cli::ControllerSpec> specs;
            for (const auto& c : sweep_controllers)
                specs.push_back(cli::parse_controller(c, checkpoint));
            return cli::cmd_sweep(common, specs);
        }
        if (ts_cmd->parsed())
            return cli::cmd_timespace(common, cli::parse_controller(controller_text, checkpoint),
                                      entry_lane, ts_steps, raw_dump, obs_dump);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
