// SPDX-License-Identifier: Apache-2.0
#include "dmce/schedule.hpp"

#include <algorithm>

namespace dmce {

NoiseSchedule::NoiseSchedule(std::vector<double> beta) : beta_(std::move(beta))
{
    if (beta_.empty()) {
        throw InvalidArgument("NoiseSchedule: empty schedule");
    }
    alpha_.resize(beta_.size());
    alpha_bar_.resize(beta_.size());
    double prod = 1.0;
    for (std::size_t i = 0; i < beta_.size(); ++i) {
        if (!(beta_[i] > 0.0 && beta_[i] < 1.0)) {
            throw InvalidArgument("NoiseSchedule: every beta must lie in (0, 1)");
        }
        if (i > 0 && !(beta_[i] > beta_[i - 1])) {
            throw InvalidArgument("NoiseSchedule: betas must be strictly increasing");
        }
        alpha_[i] = 1.0 - beta_[i];
        prod *= alpha_[i];
        alpha_bar_[i] = prod;
    }
}

std::size_t NoiseSchedule::check(int t) const
{
    if (t < 1 || t > t_max()) {
        throw InvalidArgument("NoiseSchedule: step " + std::to_string(t) + " outside 1.." +
                              std::to_string(t_max()));
    }
    return static_cast<std::size_t>(t - 1);
}

double NoiseSchedule::beta_tilde(int t) const
{
    return (1.0 - alpha_bar(t - 1)) / (1.0 - alpha_bar(t)) * beta(t);
}

int NoiseSchedule::closest_step(double target) const
{
    int best = 1;
    double best_gap = std::abs(alpha_bar_[0] - target);
    for (int t = 2; t <= t_max(); ++t) {
        const double gap = std::abs(alpha_bar_[static_cast<std::size_t>(t - 1)] - target);
        if (gap < best_gap) {
            best_gap = gap;
            best = t;
        }
    }
    return best;
}

NoiseSchedule linear_schedule(int t_max, double beta_start, double beta_end)
{
    if (t_max < 1) {
        throw InvalidArgument("linear_schedule: t_max must be >= 1");
    }
    if (t_max == 1) {
        return NoiseSchedule({beta_end});
    }
    std::vector<double> beta(static_cast<std::size_t>(t_max));
    for (int i = 0; i < t_max; ++i) {
        beta[static_cast<std::size_t>(i)] = beta_start + (beta_end - beta_start) * i / (t_max - 1);
    }
    return NoiseSchedule(std::move(beta));
}

NoiseSchedule linear_schedule(int t_max)
{
    if (t_max < 1) {
        throw InvalidArgument("linear_schedule: t_max must be >= 1");
    }
    const double start = 0.1 / t_max;
    const double end = std::min(20.0 / t_max, 0.999);
    return linear_schedule(t_max, std::min(start, end / 2.0), end);
}

Vec forward_sample(const NoiseSchedule& schedule, const Vec& h0, int t, const Vec& eps)
{
    if (h0.size() != eps.size()) {
        throw InvalidArgument("forward_sample: h0 and eps lengths differ");
    }
    const double ab = schedule.alpha_bar(t);
    return std::sqrt(ab) * h0 + std::sqrt(1.0 - ab) * eps;
}

} // namespace dmce
