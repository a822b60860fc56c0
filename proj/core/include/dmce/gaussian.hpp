// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace dmce {

double normal_pdf(double x);
double normal_cdf(double x);

/// Mills ratio R(x) = (1 - Phi(x)) / phi(x), accurate for large positive x.
double mills_ratio(double x);

/// (phi(lo) - phi(up)) / (Phi(up) - Phi(lo)) for lo < up, either bound possibly infinite.
///
/// This is d/dz log P(lo <= Z - z < up) at z = 0 for Z standard normal, i.e. the score of
/// an interval observation. Tail intervals are evaluated through Mills ratios so the
/// result stays finite when both bounds are many standard deviations from zero.
double interval_score(double lo, double up);

} // namespace dmce
