// SPDX-License-Identifier: Apache-2.0
#include "dmce/denoiser.hpp"

#include <cmath>

namespace dmce {

Vec time_embedding(double t, int dim)
{
    if (dim < 2 || dim % 2 != 0) {
        throw InvalidArgument("time_embedding: dimension must be a positive even number");
    }
    if (t < 0.0) {
        throw InvalidArgument("time_embedding: negative time step");
    }
    Vec e(dim);
    const int pairs = dim / 2;
    for (int i = 0; i < pairs; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / dim);
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    return e;
}

DenoiserArch DenoiserArch::ramp(int n_rx, int n_tx, int s_max, int s_init)
{
    if (s_max < 2) {
        throw InvalidArgument("DenoiserArch: s_max must be >= 2");
    }
    DenoiserArch a;
    a.n_rx = n_rx;
    a.n_tx = n_tx;
    a.s_init = s_init;
    a.s_max = s_max;
    const int span = s_max - 2;
    auto down = [&](int k) { return static_cast<int>(std::floor(s_max - span * k / 3.0)); };
    a.channels = {2, 2 + span / 2, s_max, down(1), down(2), 2};
    a.validate();
    return a;
}

void DenoiserArch::validate() const
{
    if (n_rx < 1 || n_tx < 1) {
        throw InvalidArgument("DenoiserArch: image dimensions must be >= 1");
    }
    if (s_init < 2 || s_init % 2 != 0) {
        throw InvalidArgument("DenoiserArch: s_init must be a positive even number");
    }
    if (channels.size() != 6) {
        throw InvalidArgument("DenoiserArch: expected 6 channel counts (5 conv layers)");
    }
    if (channels.front() != 2 || channels.back() != 2) {
        throw InvalidArgument("DenoiserArch: network must map 2 channels to 2 channels");
    }
    if (channels[2] != s_max) {
        throw InvalidArgument("DenoiserArch: second conv layer must output s_max channels");
    }
    for (int c : channels) {
        if (c < 1) {
            throw InvalidArgument("DenoiserArch: channel counts must be >= 1");
        }
    }
}

ParameterCount count_parameters(const DenoiserArch& arch)
{
    arch.validate();
    ParameterCount n;
    for (int l = 0; l < arch.conv_layers(); ++l) {
        n.conv_weights += 9 * static_cast<Index>(arch.channels[l]) * arch.channels[l + 1];
        n.conv_biases += arch.channels[l + 1];
    }
    n.time_dense = 2 * static_cast<Index>(arch.s_max) * arch.s_init + 2 * arch.s_max;
    return n;
}

template <typename Scalar>
Denoiser<Scalar>::Denoiser(DenoiserArch arch) : arch_(std::move(arch))
{
    arch_.validate();
    Index off = 0;
    for (int l = 0; l < arch_.conv_layers(); ++l) {
        offsets_.weight.push_back(off);
        off += 9 * static_cast<Index>(arch_.channels[l]) * arch_.channels[l + 1];
        offsets_.bias.push_back(off);
        off += arch_.channels[l + 1];
    }
    offsets_.dense_weight = off;
    off += 2 * static_cast<Index>(arch_.s_max) * arch_.s_init;
    offsets_.dense_bias = off;
    off += 2 * arch_.s_max;
    params_ = Vector::Zero(off);
    table_ = nn::neighbour_table(arch_.n_rx, arch_.n_tx);
}

template <typename Scalar>
Denoiser<Scalar> Denoiser<Scalar>::initialized(DenoiserArch arch, Rng& rng)
{
    Denoiser net(std::move(arch));
    const auto& a = net.arch_;
    auto fill = [&](Index begin, Index count, double fan_in) {
        const double bound = 1.0 / std::sqrt(fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Index i = 0; i < count; ++i) {
            net.params_[begin + i] = static_cast<Scalar>(u(rng));
        }
    };
    const int last = a.conv_layers() - 1;
    for (int l = 0; l < last; ++l) {
        const double fan_in = 9.0 * a.channels[l];
        fill(net.offsets_.weight[l], 9 * static_cast<Index>(a.channels[l]) * a.channels[l + 1], fan_in);
        fill(net.offsets_.bias[l], a.channels[l + 1], fan_in);
    }
    // Final layer stays zero so the untrained network predicts no noise.
    fill(net.offsets_.dense_weight, 2 * static_cast<Index>(a.s_max) * a.s_init, a.s_init);
    fill(net.offsets_.dense_bias, 2 * static_cast<Index>(a.s_max), a.s_init);
    return net;
}

template <typename Scalar>
Eigen::Map<const typename Denoiser<Scalar>::Matrix> Denoiser<Scalar>::conv_weight(const Vector& p, int l) const
{
    return {p.data() + offsets_.weight[l], arch_.channels[l + 1], 9 * static_cast<Index>(arch_.channels[l])};
}

template <typename Scalar>
Eigen::Map<const typename Denoiser<Scalar>::Vector> Denoiser<Scalar>::conv_bias(const Vector& p, int l) const
{
    return {p.data() + offsets_.bias[l], arch_.channels[l + 1]};
}

template <typename Scalar>
void Denoiser<Scalar>::to_feature_map(const Matrix& h, Matrix& x) const
{
    const int p = arch_.pixels();
    if (h.rows() != arch_.input_dim()) {
        throw InvalidArgument("Denoiser: input length " + std::to_string(h.rows()) + " does not match 2*" +
                              std::to_string(arch_.n_rx) + "*" + std::to_string(arch_.n_tx));
    }
    x.resize(2, h.cols() * p);
    for (Index b = 0; b < h.cols(); ++b) {
        x.middleCols(b * p, p) = Eigen::Map<const Matrix>(h.col(b).data(), p, 2).transpose();
    }
}

template <typename Scalar>
void Denoiser<Scalar>::from_feature_map(const Matrix& x, Index batch, Matrix& h) const
{
    const int p = arch_.pixels();
    h.resize(arch_.input_dim(), batch);
    for (Index b = 0; b < batch; ++b) {
        Eigen::Map<Matrix>(h.col(b).data(), p, 2) = x.middleCols(b * p, p).transpose();
    }
}

template <typename Scalar>
typename Denoiser<Scalar>::Matrix Denoiser<Scalar>::forward(const Matrix& h, std::span<const int> t,
                                                            Tape& tape) const
{
    const Index batch = h.cols();
    if (static_cast<Index>(t.size()) != batch) {
        throw InvalidArgument("Denoiser: need one time step per batch column");
    }
    const int p = arch_.pixels();
    const int layers = arch_.conv_layers();
    tape.acts.resize(static_cast<std::size_t>(layers) + 1);
    tape.cols.resize(static_cast<std::size_t>(layers));
    to_feature_map(h, tape.acts[0]);

    Matrix z;
    // Up-ramp.
    nn::conv3x3_forward(conv_weight(params_, 0), conv_bias(params_, 0), tape.acts[0], table_, p, tape.cols[0], z);
    tape.acts[1] = z.cwiseMax(Scalar(0));
    nn::conv3x3_forward(conv_weight(params_, 1), conv_bias(params_, 1), tape.acts[1], table_, p, tape.cols[1],
                        tape.pre_modulation);

    // Time modulation.
    const int s = arch_.s_max;
    tape.embedding.resize(arch_.s_init, batch);
    for (Index b = 0; b < batch; ++b) {
        tape.embedding.col(b) = time_embedding(t[static_cast<std::size_t>(b)], arch_.s_init).cast<Scalar>();
    }
    const Eigen::Map<const Matrix> wd(params_.data() + offsets_.dense_weight, 2 * s, arch_.s_init);
    const Eigen::Map<const Vector> bd(params_.data() + offsets_.dense_bias, 2 * s);
    tape.time_features.noalias() = wd * tape.embedding;
    tape.time_features.colwise() += bd;
    Matrix& y = tape.acts[2];
    y.resize(s, batch * p);
    for (Index b = 0; b < batch; ++b) {
        const auto scale = (Scalar(1) + tape.time_features.col(b).head(s).array()).matrix();
        y.middleCols(b * p, p) = (tape.pre_modulation.middleCols(b * p, p).array().colwise() * scale.array())
                                     .colwise() +
                                 tape.time_features.col(b).tail(s).array();
    }

    // Down-ramp.
    for (int l = 2; l < layers; ++l) {
        nn::conv3x3_forward(conv_weight(params_, l), conv_bias(params_, l), tape.acts[l], table_, p, tape.cols[l], z);
        if (l + 1 < layers) {
            tape.acts[l + 1] = z.cwiseMax(Scalar(0));
        }
    }
    Matrix out;
    from_feature_map(z, batch, out);
    return out;
}

template <typename Scalar>
typename Denoiser<Scalar>::Matrix Denoiser<Scalar>::forward(const Matrix& h, std::span<const int> t) const
{
    Tape tape;
    return forward(h, t, tape);
}

template <typename Scalar>
typename Denoiser<Scalar>::Vector Denoiser<Scalar>::forward(const Vector& h, int t) const
{
    const int ts[1] = {t};
    Matrix out = forward(Matrix(h), std::span<const int>(ts, 1));
    return out.col(0);
}

template <typename Scalar>
void Denoiser<Scalar>::backward(const Matrix& d_out, Tape& tape, Vector& grad) const
{
    if (grad.size() != params_.size()) {
        grad = Vector::Zero(params_.size());
    }
    const Index batch = d_out.cols();
    const int p = arch_.pixels();
    const int layers = arch_.conv_layers();
    const int s = arch_.s_max;
    const auto n_layers = static_cast<std::size_t>(layers);
    if (tape.acts.size() != n_layers + 1 || tape.cols.size() != n_layers || tape.embedding.cols() != batch) {
        throw InvalidArgument("Denoiser::backward: tape does not match gradient batch");
    }

    auto dw = [&](int l) {
        return Eigen::Map<Matrix>(grad.data() + offsets_.weight[l], arch_.channels[l + 1],
                                  9 * static_cast<Index>(arch_.channels[l]));
    };
    auto db = [&](int l) { return Eigen::Map<Vector>(grad.data() + offsets_.bias[l], arch_.channels[l + 1]); };

    Matrix d;
    to_feature_map(d_out, d);
    Matrix dx;
    for (int l = layers - 1; l >= 2; --l) {
        nn::conv3x3_backward(conv_weight(params_, l), tape.cols[l], d, table_, p, dw(l), db(l), &dx, tape.scratch);
        if (l > 2) {
            // ReLU after layers 2 and 3; subgradient 0 at 0.
            d = (tape.acts[l].array() > Scalar(0)).select(dx, Scalar(0));
        } else {
            d.swap(dx);
        }
    }

    // d is now d(loss)/d(modulated features).
    Matrix d_tf(2 * s, batch);
    Matrix d_pre(s, batch * p);
    for (Index b = 0; b < batch; ++b) {
        const auto dy = d.middleCols(b * p, p);
        const auto z = tape.pre_modulation.middleCols(b * p, p);
        d_tf.col(b).head(s) = (dy.array() * z.array()).rowwise().sum().matrix();
        d_tf.col(b).tail(s) = dy.rowwise().sum();
        const auto scale = (Scalar(1) + tape.time_features.col(b).head(s).array()).matrix();
        d_pre.middleCols(b * p, p) = dy.array().colwise() * scale.array();
    }
    Eigen::Map<Matrix> dwd(grad.data() + offsets_.dense_weight, 2 * s, arch_.s_init);
    Eigen::Map<Vector> dbd(grad.data() + offsets_.dense_bias, 2 * s);
    dwd.noalias() += d_tf * tape.embedding.transpose();
    dbd += d_tf.rowwise().sum();

    nn::conv3x3_backward(conv_weight(params_, 1), tape.cols[1], d_pre, table_, p, dw(1), db(1), &dx, tape.scratch);
    d = (tape.acts[1].array() > Scalar(0)).select(dx, Scalar(0));
    nn::conv3x3_backward(conv_weight(params_, 0), tape.cols[0], d, table_, p, dw(0), db(0),
                         static_cast<Matrix*>(nullptr), tape.scratch);
}

template class Denoiser<float>;
template class Denoiser<double>;

} // namespace dmce
