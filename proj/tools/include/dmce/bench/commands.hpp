// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/bench/config.hpp"
#include "dmce/bench/results.hpp"
#include "dmce/checkpoint.hpp"

#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <optional>

namespace dmce::bench {

/// Folds `parts` into `seed` one at a time through make_stream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts);

/// Inputs of a sweep that do not come from the config.
struct SweepInputs {
    ChannelDataset train;  // for the sample covariance
    ChannelDataset val;    // for LASSO tuning
    ChannelDataset test;
    std::shared_ptr<const Denoiser<float>> dm;       // needed by dm* methods
    int dm_t_max = 0;
    std::shared_ptr<const Denoiser<float>> sure_dm;  // needed by sure-dm
    int sure_dm_t_max = 0;
};

/// Estimates every test realization for every (alpha, snr, bits, method) in the
/// config. Rows come back sorted. Progress lines go to `log` when non-null.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, const SweepInputs& in, std::ostream* log = nullptr);

/// Writes train.bin, val.bin and test.bin into the data directory.
void cmd_gen_data(const ExperimentConfig& cfg, std::ostream& log);
/// Writes dm.ckpt and train_log.csv (epoch,loss).
void cmd_train(const ExperimentConfig& cfg, std::ostream& log);
/// Writes sure_denoiser.ckpt, sure_dm.ckpt and sure_log.csv (stage,epoch,loss).
void cmd_train_sure(const ExperimentConfig& cfg, std::ostream& log);
/// Writes results.csv.
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);
/// Writes one SVG per (alpha, bits) next to the CSV (or into cfg.out).
void cmd_plot(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& csv, std::ostream& log);

} // namespace dmce::bench
