// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/measurement.hpp"
#include "dmce/schedule.hpp"
#include "dmce/trainer.hpp"

namespace dmce {

/// Which likelihood the sampler uses. Auto picks the quantized score for quantized
/// observations; Linear forces the full-resolution score (even on codewords).
enum class LikelihoodKind { Auto, Linear, Quantized };

struct EstimatorConfig {
    double grad_scale = 3.0;
    bool enhanced = false;
    int enhance_rounds = 3;      // total applications of the update at a refined step
    double enhance_window = 0.5; // steps t <= T * window are refined
    LikelihoodKind likelihood = LikelihoodKind::Auto;

    void validate() const;
};

/// h_{t-1} = (h_t - (1 - a_t)/sqrt(1 - ab_t) eps(h_t, t)) / sqrt(a_t), without the
/// stochastic term.
Vec prior_update(const NoisePredictor& eps, const NoiseSchedule& schedule, const Vec& h_t, int t);

/// Score of p(y | h_t) = N(y; A h_t / sqrt(ab), c A A^T + noise_var I), c = (1 - ab)/ab,
/// by a dense Cholesky solve. Throws NumericalError if the covariance is singular.
Vec likelihood_score_direct(const Vec& y, const Mat& a, const Vec& h_t, double alpha_bar, double noise_var);

/// Same quantity through the thin SVD of A; no matrix inversion.
Vec likelihood_score_svd(const Vec& y, const LinearOperator& op, const Vec& h_t, double alpha_bar,
                         double noise_var);

/// Score of the quantized likelihood prod_m P(y_m in cell(ybar_m)), with the noisy
/// measurement A h_t / sqrt(ab) + n_m of per-row variance c ||a_m||^2 + noise_var.
/// Throws InvalidArgument if an entry of ybar is not a codeword.
Vec likelihood_score_quantized(const Vec& ybar, const LinearOperator& op, const Quantizer& q, const Vec& h_t,
                               double alpha_bar, double noise_var);

/// Per-observation cache for the full-resolution SVD score (U^T y is formed once).
class LinearScore {
public:
    LinearScore(const LinearOperator& op, const Vec& y, double noise_var);
    Vec operator()(const Vec& h_t, double alpha_bar) const;

private:
    const LinearOperator* op_;
    Vec uty_;
    double noise_var_;
};

/// Per-observation cache for the quantized score (cell bounds are looked up once).
class QuantizedScore {
public:
    QuantizedScore(const LinearOperator& op, const Quantizer& q, const Vec& ybar, double noise_var);
    Vec operator()(const Vec& h_t, double alpha_bar) const;

private:
    const LinearOperator* op_;
    Vec lo_, up_;
    double noise_var_;
};

/// Posterior sampling from h_T ~ N(0, I) down to h_0 with the prior update followed by
/// h_{t-1} += s (1 - a_t)/sqrt(a_t) * likelihood_score(h_t). In the enhanced variant
/// every step t <= T * window is applied enhance_rounds times, each extra round starting
/// from the previous result re-noised to level t. The schedule's T is the number of
/// sampling steps. Throws NumericalError naming the step if the iterate stops being finite.
Vec estimate(const Observation& obs, const MeasurementModel& model, const NoisePredictor& eps,
             const NoiseSchedule& schedule, const EstimatorConfig& cfg, Rng& rng);

/// ||h_hat - h||^2 / ||h||^2. Throws InvalidArgument for a zero-norm reference.
double nmse(const Vec& h_hat, const Vec& h_true);

/// Mean of per-realization NMSE, in dB.
double nmse_db(std::span<const Vec> h_hat, std::span<const Vec> h_true);

} // namespace dmce
