// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/channel_model.hpp"
#include "dmce/measurement.hpp"
#include "dmce/posterior.hpp"
#include "dmce/sure.hpp"
#include "dmce/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dmce::bench {

/// Everything a CLI run needs. Files live under `out` unless a path key overrides them.
struct ExperimentConfig {
    SystemConfig system;   // n_pilot is ignored; the sweep sets it from alpha
    ClusterModel cluster = ClusterModel::exponential(3, 10);
    PilotKind pilot = PilotKind::Qpsk;

    Index n_train = 10000;
    Index n_val = 100;
    Index n_test = 100;

    int t_max = 100;
    int s_max = 64;
    int s_init = 64;
    TrainConfig train;
    SureConfig sure;
    double sigma_w_sq = 1.0;

    EstimatorConfig estimator;
    std::vector<double> snr_db{0.0, 10.0, 20.0, 30.0};
    std::vector<double> alpha{1.0};
    std::vector<int> bits{0};
    std::vector<std::string> methods{"dm", "ls", "lmmse"};
    std::vector<double> lasso_grid{1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
    int lasso_iters = 300;
    int threads = 0;  // sweep workers; 0 = one per hardware thread

    std::filesystem::path out = ".";
    std::filesystem::path data_dir;   // defaults to out
    std::filesystem::path checkpoint; // defaults to out/dm.ckpt
    std::uint64_t seed = 0;

    std::filesystem::path data_path() const { return data_dir.empty() ? out : data_dir; }
    std::filesystem::path dm_checkpoint() const { return checkpoint.empty() ? out / "dm.ckpt" : checkpoint; }

    void validate() const;
};

/// "desk" (16x4, D = 10,000) or "paper" (64x16, D = 100,000).
ExperimentConfig profile(const std::string& name);

/// Applies `key = value` lines ('#' starts a comment). Unknown keys and unparsable
/// values raise FormatError naming the file and line.
void apply_config_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin = "<config>");
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Sets one key; throws FormatError on unknown keys or bad values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Methods the sweep knows about.
const std::vector<std::string>& known_methods();

} // namespace dmce::bench
