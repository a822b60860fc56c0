// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/common.hpp"

#include <vector>

namespace dmce {

/// Variance schedule of the forward diffusion. Steps are 1-based: t = 1..T.
class NoiseSchedule {
public:
    explicit NoiseSchedule(std::vector<double> beta);

    int t_max() const { return static_cast<int>(beta_.size()); }
    double beta(int t) const { return beta_[check(t)]; }
    double alpha(int t) const { return alpha_[check(t)]; }
    /// Cumulative product of alpha up to t; alpha_bar(0) = 1.
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bar_[check(t)]; }
    /// Posterior variance (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t.
    double beta_tilde(int t) const;

    const std::vector<double>& betas() const { return beta_; }

    /// argmin_t |alpha_bar(t) - target| over t = 1..T (first minimiser on ties).
    int closest_step(double alpha_bar_target) const;

private:
    std::size_t check(int t) const;

    std::vector<double> beta_;
    std::vector<double> alpha_;
    std::vector<double> alpha_bar_;
};

/// Linearly spaced betas from 0.1/T to 20/T (capped below one), i.e. [1e-4, 0.02]
/// at T = 1000 and [1e-3, 0.2] at T = 100. Both give alpha_bar_T < 1e-4.
NoiseSchedule linear_schedule(int t_max);
NoiseSchedule linear_schedule(int t_max, double beta_start, double beta_end);

/// h_t = sqrt(alpha_bar_t) h0 + sqrt(1 - alpha_bar_t) eps
Vec forward_sample(const NoiseSchedule& schedule, const Vec& h0, int t, const Vec& eps);

} // namespace dmce
