// SPDX-License-Identifier: Apache-2.0
// dmce: dataset generation, training, estimation sweeps and plots.

#include "dmce/bench/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

struct CommonOptions {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::string profile = "desk";
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "key = value config file applied on top of the profile")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
    cmd->add_option("--profile", o.profile, "base settings")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
}

dmce::bench::ExperimentConfig resolve(const CommonOptions& o)
{
    auto cfg = dmce::bench::profile(o.profile);
    if (!o.config.empty()) {
        dmce::bench::apply_config_file(cfg, o.config);
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    cfg.out = o.out;
    return cfg;
}

int fail(const char* kind, const std::string& message)
{
    std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diffusion-model MIMO channel estimation benchmarks"};
    app.require_subcommand(1);

    CommonOptions gen_opt, train_opt, sure_opt, sweep_opt, plot_opt;
    std::optional<double> sigma_w_sq;
    std::string csv;

    auto* gen = app.add_subcommand("gen-data", "generate train/val/test channel datasets");
    add_common(gen, gen_opt);
    auto* trn = app.add_subcommand("train", "train the diffusion denoiser");
    add_common(trn, train_opt);
    auto* sure = app.add_subcommand("train-sure", "two-stage training from noisy channels");
    add_common(sure, sure_opt);
    sure->add_option("--sigma-w-sq", sigma_w_sq, "noise variance of the training channels");
    auto* sweep = app.add_subcommand("sweep", "estimate the test set over the configured grid");
    add_common(sweep, sweep_opt);
    auto* plot = app.add_subcommand("plot", "render NMSE-vs-SNR charts from a results CSV");
    add_common(plot, plot_opt);
    plot->add_option("--csv", csv, "results CSV (default: OUT/results.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (gen->parsed()) {
            dmce::bench::cmd_gen_data(resolve(gen_opt), std::cout);
        } else if (trn->parsed()) {
            dmce::bench::cmd_train(resolve(train_opt), std::cout);
        } else if (sure->parsed()) {
            auto cfg = resolve(sure_opt);
            if (sigma_w_sq) {
                cfg.sigma_w_sq = *sigma_w_sq;
            }
            dmce::bench::cmd_train_sure(cfg, std::cout);
        } else if (sweep->parsed()) {
            dmce::bench::cmd_sweep(resolve(sweep_opt), std::cout);
        } else if (plot->parsed()) {
            std::optional<std::filesystem::path> path;
            if (!csv.empty()) {
                path = csv;
            }
            dmce::bench::cmd_plot(resolve(plot_opt), path, std::cout);
        }
    } catch (const dmce::Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail("io", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
