// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/denoiser.hpp"
#include "dmce/schedule.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dmce {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 128;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Adaptive-moment optimiser over a flat parameter vector.
template <typename Scalar>
class Adam {
public:
    using Vector = nn::Vector<Scalar>;

    Adam(Index n_params, const TrainConfig& cfg);
    void step(Vector& params, const Vector& grad);
    long long steps() const { return steps_; }

private:
    double lr_, b1_, b2_, eps_;
    long long steps_ = 0;
    Vector m_, v_;
};

/// Mean over all entries of (eps - eps_theta(sqrt(ab_t) h0 + sqrt(1 - ab_t) eps, t))^2.
/// When `grad` is non-null the parameter gradient is accumulated into it.
template <typename Scalar>
double dm_loss(const Denoiser<Scalar>& net, const NoiseSchedule& schedule, const nn::Matrix<Scalar>& h0,
               std::span<const int> t, const nn::Matrix<Scalar>& eps, nn::Vector<Scalar>* grad);

/// One optimiser step on a batch (columns of h0) with fresh t ~ U{1..T} and eps ~ N(0, I).
double train_step(Denoiser<float>& net, Adam<float>& opt, const NoiseSchedule& schedule,
                  const Eigen::MatrixXf& h0, Rng& rng);

struct EpochReport {
    int epoch = 0;      // 1-based
    double loss = 0.0;  // mean batch loss over the epoch
};

/// Trains on the columns of `data`, reshuffling every epoch. Throws NumericalError
/// (naming the epoch) on a non-finite loss. `on_epoch` is called after each epoch.
std::vector<EpochReport> train(Denoiser<float>& net, const Eigen::MatrixXf& data, const NoiseSchedule& schedule,
                               const TrainConfig& cfg,
                               const std::function<void(const EpochReport&)>& on_epoch = {});

/// Anything that predicts the diffusion noise eps(h_t, t).
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual Vec predict(const Vec& h_t, int t) const = 0;
};

/// Trained network, evaluated in single precision.
class NetworkPredictor : public NoisePredictor {
public:
    explicit NetworkPredictor(std::shared_ptr<const Denoiser<float>> net) : net_(std::move(net)) {}
    Vec predict(const Vec& h_t, int t) const override;
    const Denoiser<float>& net() const { return *net_; }

private:
    std::shared_ptr<const Denoiser<float>> net_;
};

/// eps = 0 everywhere.
class ZeroPredictor : public NoisePredictor {
public:
    Vec predict(const Vec& h_t, int) const override { return Vec::Zero(h_t.size()); }
};

/// Exact noise prediction for an i.i.d. N(m, v) prior: h_t ~ N(sqrt(ab) m, ab v + 1 - ab),
/// so eps = sqrt(1 - ab) (h_t - sqrt(ab) m) / (ab v + 1 - ab).
class GaussianPriorPredictor : public NoisePredictor {
public:
    GaussianPriorPredictor(NoiseSchedule schedule, double prior_var = 1.0, double prior_mean = 0.0);
    Vec predict(const Vec& h_t, int t) const override;

private:
    NoiseSchedule schedule_;
    double prior_var_;
    double prior_mean_;
};

/// Ancestral sampling from h_T ~ N(0, I):
/// h_{t-1} = (h_t - (1 - a_t)/sqrt(1 - ab_t) eps(h_t, t)) / sqrt(a_t) + sqrt(beta_tilde_t) z
/// with z ~ N(0, I) for t > 1 and z = 0 at the last step.
Vec reverse_sample(const NoisePredictor& eps, const NoiseSchedule& schedule, Index dim, Rng& rng);

} // namespace dmce
