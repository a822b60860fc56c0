// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/channel_model.hpp"
#include "dmce/trainer.hpp"

#include <functional>

namespace dmce {

/// Noisy channels h~ = h + w, w ~ N(0, sigma_w^2 I), stored rescaled as
/// hbar = sqrt(ab_w) h~ with ab_w = 1 / (1 + sigma_w^2), so hbar has the law of the
/// forward diffusion at noise level ab_w.
struct NoisyDataset {
    int n_rx = 0;
    int n_tx = 0;
    Eigen::MatrixXf samples;   // hbar, one column per sample
    double sigma_w_sq = 0.0;
    double alpha_bar_w = 1.0;  // 1 / (1 + sigma_w^2)
    int t_w = 1;               // schedule step whose alpha_bar is closest to alpha_bar_w

    Index size() const { return samples.cols(); }
    /// The unscaled noisy channels h~ = hbar / sqrt(ab_w).
    Eigen::MatrixXf unscaled() const;
};

struct SureConfig {
    double mc_epsilon = 1e-5;
    int denoiser_epochs = 100;
    int dm_epochs = 500;

    void validate() const;
};

/// Sample i draws its noise from make_stream(seed, i).
NoisyDataset make_noisy_dataset(const ChannelDataset& clean, double sigma_w_sq, const NoiseSchedule& schedule,
                                std::uint64_t seed);

/// f(hbar) = (hbar - sqrt(1 - ab_w) eps(hbar, t_w)) / sqrt(ab_w).
Vec tweedie_denoiser(const NoisePredictor& eps, const Vec& hbar, int t_w, double alpha_bar_w);

template <typename Scalar>
nn::Matrix<Scalar> tweedie_denoise(const Denoiser<Scalar>& net, const nn::Matrix<Scalar>& hbar, int t_w,
                                   double alpha_bar_w);

/// Single-probe estimate v^T (f(x + eps v) - f(x)) / eps of div f(x), v ~ N(0, I).
double mc_divergence(const std::function<Vec(const Vec&)>& f, const Vec& x, double eps, Rng& rng);

/// SURE of a denoiser f acting on hbar, in the units of h~:
/// ||f(hbar) - h~||^2 + 2 sigma_w^2 div_{h~} f(sqrt(ab_w) h~).
/// Its expectation is E||f(hbar) - h||^2 + N sigma_w^2.
double sure_objective(const std::function<Vec(const Vec&)>& f, const Vec& hbar, double sigma_w_sq,
                      double alpha_bar_w, double eps, Rng& rng);

/// Batch mean of sure_objective for the Tweedie denoiser built on `net`, one probe per
/// sample. Accumulates the parameter gradient into `grad` when non-null.
double sure_loss(const Denoiser<double>& net, const Mat& hbar, const NoisyDataset& meta, double mc_epsilon,
                 Rng& rng, Vec* grad);

/// Stage 1: trains `net` on the SURE loss for sure.denoiser_epochs epochs.
std::vector<EpochReport> train_sure_denoiser(Denoiser<double>& net, const NoisyDataset& data,
                                             const TrainConfig& cfg, const SureConfig& sure,
                                             const std::function<void(const EpochReport&)>& on_epoch = {});

/// Applies the Tweedie denoiser to every sample.
Eigen::MatrixXf denoise_dataset(const Denoiser<float>& net, const NoisyDataset& data);

struct SureDmResult {
    Denoiser<float> denoiser;  // theta_1, frozen after stage 1
    Denoiser<float> dm;        // theta_2
    std::vector<EpochReport> denoiser_log;
    std::vector<EpochReport> dm_log;
};

/// Stage 1 (SURE denoiser) then stage 2 (DM trained on the denoised samples).
/// Both networks start from independent initialisations of `arch`.
SureDmResult train_sure_dm(const NoisyDataset& data, const DenoiserArch& arch, const NoiseSchedule& schedule,
                           const TrainConfig& cfg, const SureConfig& sure,
                           const std::function<void(int stage, const EpochReport&)>& on_epoch = {});

} // namespace dmce
