// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/common.hpp"

#include <span>
#include <utility>
#include <vector>

namespace dmce {

/// Uniform mid-rise scalar quantizer with 2^bits cells.
///
/// Codewords are r_k = (2k - 2^b - 1) step / 2 for k = 1..2^b. Cell k covers
/// [(k - 2^(b-1) - 1) step, (k - 2^(b-1)) step) with the two outer cells extended
/// to -inf and +inf.
class Quantizer {
public:
    Quantizer(int bits, double step);

    int bits() const { return bits_; }
    double step() const { return step_; }
    int levels() const { return 1 << bits_; }
    const std::vector<double>& codewords() const { return codewords_; }

    /// 1-based cell index containing z.
    int cell(double z) const;
    double quantize(double z) const;
    Vec quantize(const Vec& y) const;

    /// 1-based cell index of a codeword; throws InvalidArgument if not a codeword.
    int index_of(double codeword) const;
    /// (low, up) thresholds of the cell represented by `codeword`.
    std::pair<double, double> interval(double codeword) const;
    std::pair<double, double> cell_interval(int k) const;

private:
    int bits_;
    double step_;
    std::vector<double> codewords_;
};

inline constexpr int kMaxQuantizerBits = 8;

/// Step size minimising E[(z - Q(z))^2] for z ~ N(0, 1), tabulated for 1..8 bits.
double gaussian_optimal_step(int bits);

/// Mean received power per complex entry, mean_i ||y_i||^2 / (len / 2), for a batch of
/// real [Re; Im] observations.
double received_power(std::span<const Vec> ys);
double received_power(const Vec& y);

/// Received-power dependent step: step = sqrt(P_y / 2) * gaussian_optimal_step(bits).
Quantizer design_quantizer(int bits, double received_power);

} // namespace dmce
