#include <CLI11.hpp>
#include <iostream>

#include "labcli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"groklab: mean-field phase-transition lab for two-layer networks"};
    app.require_subcommand(1);

    groklab::cli::Overrides ov;
    std::string config;
    std::string checkpoint;
    long until_step = 0;
    std::uint64_t seed_val = 0;
    int threads_val = 0;
    std::string out_val;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("config", config, "run configuration (JSON)")->required();
        sub->add_option("--seed", seed_val, "override the master seed")
            ->each([&](const std::string&) { ov.seed = seed_val; });
        sub->add_option("--threads", threads_val, "worker pool size (0 = hardware)")
            ->each([&](const std::string&) { ov.threads = threads_val; });
        sub->add_option("--output", out_val, "override the output directory")
            ->each([&](const std::string&) { ov.output_dir = out_val; });
        sub->add_flag("--force", ov.force, "bypass the desk-scale work guard");
    };

    auto* ts = app.add_subcommand("ts-theory", "teacher-student mean-field scan");
    add_common(ts, true);
    auto* mod = app.add_subcommand("mod-theory", "modular-addition mean-field scan");
    add_common(mod, true);
    auto* scan = app.add_subcommand("scan", "model-dispatched theory scan");
    add_common(scan, true);
    auto* sample = app.add_subcommand("sample", "Langevin ensemble sampling");
    add_common(sample, true);
    auto* verify = app.add_subcommand("verify", "run the oracle verification suite");
    add_common(verify, true);
    auto* resume = app.add_subcommand("resume", "continue a member from a checkpoint");
    resume->add_option("checkpoint", checkpoint, "checkpoint JSON file")->required();
    resume->add_option("--until", until_step, "target step (default: settings.n_steps)");
    add_common(resume, false);

    CLI11_PARSE(app, argc, argv);

    using namespace groklab::cli;
    try {
        if (app.got_subcommand(ts)) return cmd_ts_theory(config, ov);
        if (app.got_subcommand(mod)) return cmd_mod_theory(config, ov);
        if (app.got_subcommand(scan)) return cmd_scan(config, ov);
        if (app.got_subcommand(sample)) return cmd_sample(config, ov);
        if (app.got_subcommand(verify)) return cmd_verify(config, ov);
        if (app.got_subcommand(resume)) return cmd_resume(checkpoint, until_step, ov);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
