// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/common.hpp"
#include "dmce/conv.hpp"

#include <span>
#include <vector>

namespace dmce {

/// Sinusoidal time-step embedding: entries (2i, 2i+1) are sin/cos of t * 10000^(-2i/dim).
Vec time_embedding(double t, int dim);

/// Layer layout of the noise-prediction CNN.
///
/// Two 3x3 convolutions ramp the 2 input channels (Re/Im) up to s_max (ReLU after the
/// first only); the features are then modulated per channel as x * (1 + t_s) + t_b,
/// where [t_s; t_b] is a dense projection of the time embedding; three convolutions
/// ramp back down to 2 channels (ReLU after the first two).
struct DenoiserArch {
    int n_rx = 4;
    int n_tx = 16;
    int s_init = 64;
    int s_max = 64;
    /// Channel counts from input to output, e.g. {2, 33, 64, 43, 22, 2}.
    std::vector<int> channels{2, 33, 64, 43, 22, 2};

    /// Evenly spaced (floor-rounded) ramp 2 -> s_max in two layers and back in three.
    static DenoiserArch ramp(int n_rx, int n_tx, int s_max = 64, int s_init = 64);

    void validate() const;
    int pixels() const { return n_rx * n_tx; }
    Index input_dim() const { return 2 * static_cast<Index>(pixels()); }
    /// Number of conv layers (always 5).
    int conv_layers() const { return static_cast<int>(channels.size()) - 1; }
    bool operator==(const DenoiserArch&) const = default;
};

/// Parameter counts split by role.
struct ParameterCount {
    Index conv_weights = 0;
    Index conv_biases = 0;
    Index time_dense = 0;
    Index total() const { return conv_weights + conv_biases + time_dense; }
};

ParameterCount count_parameters(const DenoiserArch& arch);

/// Noise-prediction network eps_theta(h_t, t).
///
/// All parameters live in one flat vector, in this order: for each conv layer its
/// weights (C_out x 9 C_in, column-major, column = tap * C_in + input channel,
/// tap = ky * 3 + kx) followed by its C_out biases; then the time dense layer weights
/// (2 s_max x s_init, column-major) and its 2 s_max biases (first s_max rows give t_s,
/// the rest t_b).
///
/// Inputs and outputs are batches of real vectors, one column per sample, in the
/// [Re; Im] column-major layout produced by vectorize_real.
template <typename Scalar>
class Denoiser {
public:
    using Matrix = nn::Matrix<Scalar>;
    using Vector = nn::Vector<Scalar>;

    /// Intermediate activations kept for backpropagation.
    struct Tape {
        std::vector<Matrix> acts;    // acts[l] is the input of conv layer l (C x B*P)
        Matrix pre_modulation;       // output of the second conv layer
        Matrix time_features;        // [t_s; t_b], 2 s_max x B
        Matrix embedding;            // s_init x B
        std::vector<Matrix> cols;    // im2col of each conv layer input
        Matrix scratch;
    };

    explicit Denoiser(DenoiserArch arch);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; last conv layer zero.
    static Denoiser initialized(DenoiserArch arch, Rng& rng);

    const DenoiserArch& arch() const { return arch_; }
    Index parameter_count() const { return params_.size(); }
    const Vector& parameters() const { return params_; }
    Vector& parameters() { return params_; }

    Matrix forward(const Matrix& h, std::span<const int> t) const;
    Vector forward(const Vector& h, int t) const;
    Matrix forward(const Matrix& h, std::span<const int> t, Tape& tape) const;

    /// Accumulates d(loss)/d(theta) into `grad` given d(loss)/d(output).
    void backward(const Matrix& d_out, Tape& tape, Vector& grad) const;

    template <typename Other>
    Denoiser<Other> cast() const
    {
        Denoiser<Other> out(arch_);
        out.parameters() = params_.template cast<Other>();
        return out;
    }

private:
    struct Offsets {
        std::vector<Index> weight;
        std::vector<Index> bias;
        Index dense_weight = 0;
        Index dense_bias = 0;
    };

    Eigen::Map<const Matrix> conv_weight(const Vector& p, int layer) const;
    Eigen::Map<const Vector> conv_bias(const Vector& p, int layer) const;

    void to_feature_map(const Matrix& h, Matrix& x) const;
    void from_feature_map(const Matrix& x, Index batch, Matrix& h) const;

    DenoiserArch arch_;
    Offsets offsets_;
    std::vector<int> table_;
    Vector params_;
};

extern template class Denoiser<float>;
extern template class Denoiser<double>;

} // namespace dmce
