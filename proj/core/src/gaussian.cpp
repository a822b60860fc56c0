// SPDX-License-Identifier: Apache-2.0
#include "dmce/gaussian.hpp"

#include "dmce/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dmce {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kMinDenominator = 1e-300;

// Ratio for 0 <= lo < up (up may be +inf).
double upper_tail_score(double lo, double up)
{
    if (std::isinf(up)) {
        return 1.0 / mills_ratio(lo);
    }
    // phi(up)/phi(lo) without under/overflow.
    const double e = std::exp(-0.5 * (up - lo) * (up + lo));
    const double num = -std::expm1(-0.5 * (up - lo) * (up + lo));
    const double den = mills_ratio(lo) - mills_ratio(up) * e;
    return num / std::max(den, kMinDenominator);
}

} // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double mills_ratio(double x)
{
    if (std::isinf(x) && x > 0) {
        return 0.0;
    }
    if (x <= 25.0) {
        return std::sqrt(std::numbers::pi / 2.0) * std::erfc(x / std::numbers::sqrt2) * std::exp(0.5 * x * x);
    }
    // Continued fraction 1/(x+ 1/(x+ 2/(x+ 3/(x+ ...)))), evaluated bottom-up.
    double tail = x;
    for (int k = 40; k >= 1; --k) {
        tail = x + k / tail;
    }
    return 1.0 / tail;
}

double interval_score(double lo, double up)
{
    if (!(lo < up)) {
        throw InvalidArgument("interval_score: need lo < up");
    }
    if (lo >= 0.0) {
        return upper_tail_score(lo, up);
    }
    if (up <= 0.0) {
        return -upper_tail_score(-up, -lo);
    }
    // Straddles zero: split at 0 so neither half cancels.
    const double p = (0.5 - 0.5 * std::erfc(up / std::numbers::sqrt2)) +
                     (0.5 - 0.5 * std::erfc(-lo / std::numbers::sqrt2));
    const double phi_lo = std::isinf(lo) ? 0.0 : normal_pdf(lo);
    const double phi_up = std::isinf(up) ? 0.0 : normal_pdf(up);
    return (phi_lo - phi_up) / std::max(p, kMinDenominator);
}

} // namespace dmce
