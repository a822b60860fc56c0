// SPDX-License-Identifier: Apache-2.0
#include "dmce/quantizer.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace dmce {

namespace {

// Minimisers of the mid-rise quantization MSE for a standard Gaussian input,
// obtained by adaptive quadrature of the MSE integral and bounded 1-D minimisation
// (1e-12 step tolerance). tests/unit/test_quantizer.cpp re-derives b = 1..5.
constexpr std::array<double, kMaxQuantizerBits> kGaussianStep{
    1.595769121605731,   // 1 bit, = 2 sqrt(2/pi)
    0.9956866812182538,  // 2
    0.5860194408124376,  // 3
    0.33520061226692854, // 4
    0.18813879032702616, // 5
    0.10406300945232633, // 6
    0.05686767243668049, // 7
    0.03076238763524787, // 8
};

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

double gaussian_optimal_step(int bits)
{
    if (bits < 1 || bits > kMaxQuantizerBits) {
        throw InvalidArgument("unsupported quantizer bit depth " + std::to_string(bits) + " (1..8)");
    }
    return kGaussianStep[static_cast<std::size_t>(bits - 1)];
}

Quantizer::Quantizer(int bits, double step) : bits_(bits), step_(step)
{
    if (bits < 1 || bits > kMaxQuantizerBits) {
        throw InvalidArgument("unsupported quantizer bit depth " + std::to_string(bits) + " (1..8)");
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidArgument("Quantizer: step must be positive and finite");
    }
    const int l = levels();
    codewords_.resize(static_cast<std::size_t>(l));
    for (int k = 1; k <= l; ++k) {
        codewords_[k - 1] = (2.0 * k - l - 1.0) * step_ / 2.0;
    }
}

int Quantizer::cell(double z) const
{
    if (std::isnan(z)) {
        throw NumericalError("Quantizer: cannot quantize NaN");
    }
    const int half = levels() / 2;
    const double f = std::floor(z / step_);
    if (f < -half) {
        return 1;
    }
    if (f >= half - 1) {
        return levels();
    }
    return static_cast<int>(f) + half + 1;
}

double Quantizer::quantize(double z) const
{
    return codewords_[static_cast<std::size_t>(cell(z) - 1)];
}

Vec Quantizer::quantize(const Vec& y) const
{
    Vec out(y.size());
    for (Index i = 0; i < y.size(); ++i) {
        out[i] = quantize(y[i]);
    }
    return out;
}

int Quantizer::index_of(double codeword) const
{
    const double kf = (2.0 * codeword / step_ + levels() + 1.0) / 2.0;
    const double k = std::round(kf);
    if (!std::isfinite(kf) || std::abs(kf - k) > 1e-6 || k < 1 || k > levels()) {
        throw InvalidArgument("value " + std::to_string(codeword) + " is not a codeword of this quantizer");
    }
    return static_cast<int>(k);
}

std::pair<double, double> Quantizer::cell_interval(int k) const
{
    const int half = levels() / 2;
    const double low = k == 1 ? -kInf : (k - half - 1) * step_;
    const double up = k == levels() ? kInf : (k - half) * step_;
    return {low, up};
}

std::pair<double, double> Quantizer::interval(double codeword) const
{
    return cell_interval(index_of(codeword));
}

double received_power(std::span<const Vec> ys)
{
    if (ys.empty()) {
        throw InvalidArgument("received_power: empty batch");
    }
    double total = 0.0;
    for (const auto& y : ys) {
        if (y.size() == 0 || y.size() % 2 != 0) {
            throw InvalidArgument("received_power: observation length must be a positive even number");
        }
        total += y.squaredNorm() / (static_cast<double>(y.size()) / 2.0);
    }
    return total / static_cast<double>(ys.size());
}

double received_power(const Vec& y)
{
    return received_power(std::span<const Vec>(&y, 1));
}

Quantizer design_quantizer(int bits, double power)
{
    if (!(power > 0.0)) {
        throw InvalidArgument("design_quantizer: received power must be positive");
    }
    return Quantizer(bits, std::sqrt(power / 2.0) * gaussian_optimal_step(bits));
}

} // namespace dmce
