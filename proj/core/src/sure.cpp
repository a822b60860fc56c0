// SPDX-License-Identifier: Apache-2.0
#include "dmce/sure.hpp"

#include <algorithm>
#include <numeric>

namespace dmce {

Eigen::MatrixXf NoisyDataset::unscaled() const
{
    return samples / static_cast<float>(std::sqrt(alpha_bar_w));
}

void SureConfig::validate() const
{
    if (!(mc_epsilon > 0.0)) {
        throw InvalidArgument("SureConfig: mc_epsilon must be positive");
    }
    if (denoiser_epochs < 1 || dm_epochs < 1) {
        throw InvalidArgument("SureConfig: epoch counts must be >= 1");
    }
}

NoisyDataset make_noisy_dataset(const ChannelDataset& clean, double sigma_w_sq, const NoiseSchedule& schedule,
                                std::uint64_t seed)
{
    if (!(sigma_w_sq >= 0.0)) {
        throw InvalidArgument("make_noisy_dataset: sigma_w^2 must be >= 0");
    }
    NoisyDataset out;
    out.n_rx = clean.n_rx;
    out.n_tx = clean.n_tx;
    out.sigma_w_sq = sigma_w_sq;
    out.alpha_bar_w = 1.0 / (1.0 + sigma_w_sq);
    out.t_w = schedule.closest_step(out.alpha_bar_w);
    out.samples.resize(clean.dim(), clean.size());
    const double sab = std::sqrt(out.alpha_bar_w);
    const double sw = std::sqrt(sigma_w_sq);
    for (Index i = 0; i < clean.size(); ++i) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
        const Vec noisy = clean.sample(i) + sw * standard_normal(clean.dim(), rng);
        out.samples.col(i) = (sab * noisy).cast<float>();
    }
    return out;
}

Vec tweedie_denoiser(const NoisePredictor& eps, const Vec& hbar, int t_w, double alpha_bar_w)
{
    if (!(alpha_bar_w > 0.0 && alpha_bar_w <= 1.0)) {
        throw InvalidArgument("tweedie_denoiser: alpha_bar must lie in (0, 1]");
    }
    return (hbar - std::sqrt(1.0 - alpha_bar_w) * eps.predict(hbar, t_w)) / std::sqrt(alpha_bar_w);
}

template <typename Scalar>
nn::Matrix<Scalar> tweedie_denoise(const Denoiser<Scalar>& net, const nn::Matrix<Scalar>& hbar, int t_w,
                                   double alpha_bar_w)
{
    const std::vector<int> t(static_cast<std::size_t>(hbar.cols()), t_w);
    const auto k = static_cast<Scalar>(std::sqrt(1.0 - alpha_bar_w));
    const auto inv = static_cast<Scalar>(1.0 / std::sqrt(alpha_bar_w));
    return (hbar - k * net.forward(hbar, t)) * inv;
}

template nn::Matrix<float> tweedie_denoise(const Denoiser<float>&, const nn::Matrix<float>&, int, double);
template nn::Matrix<double> tweedie_denoise(const Denoiser<double>&, const nn::Matrix<double>&, int, double);

double mc_divergence(const std::function<Vec(const Vec&)>& f, const Vec& x, double eps, Rng& rng)
{
    if (!(eps > 0.0)) {
        throw InvalidArgument("mc_divergence: eps must be positive");
    }
    const Vec v = standard_normal(x.size(), rng);
    return v.dot(f(x + eps * v) - f(x)) / eps;
}

double sure_objective(const std::function<Vec(const Vec&)>& f, const Vec& hbar, double sigma_w_sq,
                      double alpha_bar_w, double eps, Rng& rng)
{
    const double sab = std::sqrt(alpha_bar_w);
    const Vec h_tilde = hbar / sab;
    const double fit = (f(hbar) - h_tilde).squaredNorm();
    if (sigma_w_sq == 0.0) {
        return fit;
    }
    auto g = [&](const Vec& x) { return f(sab * x); };
    return fit + 2.0 * sigma_w_sq * mc_divergence(g, h_tilde, eps, rng);
}

double sure_loss(const Denoiser<double>& net, const Mat& hbar, const NoisyDataset& meta, double mc_epsilon,
                 Rng& rng, Vec* grad)
{
    const Index b = hbar.cols();
    const Index n = hbar.rows();
    if (b == 0) {
        throw InvalidArgument("sure_loss: empty batch");
    }
    if (!(mc_epsilon > 0.0)) {
        throw InvalidArgument("sure_loss: mc_epsilon must be positive");
    }
    const double ab = meta.alpha_bar_w;
    const double sab = std::sqrt(ab);
    const double k = std::sqrt(1.0 - ab);
    const double s2 = meta.sigma_w_sq;

    // With f(x) = (x - k e(x)) / sqrt(ab), per sample
    //   ||f(hbar) - hbar/sqrt(ab)||^2 = (k^2/ab) ||e0||^2
    //   probe term = ||v||^2 - k/(sqrt(ab) eps) v^T (e1 - e0)
    // where e0 = e(hbar) and e1 = e(hbar + sqrt(ab) eps v).
    Mat v(n, b);
    for (Index j = 0; j < b; ++j) {
        v.col(j) = standard_normal(n, rng);
    }
    Mat input(n, 2 * b);
    input.leftCols(b) = hbar;
    input.rightCols(b) = hbar + (sab * mc_epsilon) * v;
    const std::vector<int> t(static_cast<std::size_t>(2 * b), meta.t_w);
    Denoiser<double>::Tape tape;
    const Mat e = net.forward(input, t, tape);
    const auto e0 = e.leftCols(b);
    const auto e1 = e.rightCols(b);
    const double kk = k / (sab * mc_epsilon);

    double total = (k * k / ab) * e0.squaredNorm();
    if (s2 != 0.0) {
        total += 2.0 * s2 * (v.squaredNorm() - kk * (v.array() * (e1 - e0).array()).sum());
    }
    const double loss = total / static_cast<double>(b);
    if (grad != nullptr) {
        Mat d(n, 2 * b);
        d.leftCols(b) = (2.0 * k * k / ab) * e0 + (2.0 * s2 * kk) * v;
        d.rightCols(b) = (-2.0 * s2 * kk) * v;
        d /= static_cast<double>(b);
        net.backward(d, tape, *grad);
    }
    return loss;
}

std::vector<EpochReport> train_sure_denoiser(Denoiser<double>& net, const NoisyDataset& data,
                                             const TrainConfig& cfg, const SureConfig& sure,
                                             const std::function<void(const EpochReport&)>& on_epoch)
{
    cfg.validate();
    sure.validate();
    if (data.size() == 0) {
        throw InvalidArgument("train_sure_denoiser: empty dataset");
    }
    if (data.samples.rows() != net.arch().input_dim()) {
        throw InvalidArgument("train_sure_denoiser: sample length does not match the network");
    }
    Rng rng = make_stream(cfg.seed, 0x73757265ULL);
    Adam<double> opt(net.parameter_count(), cfg);
    std::vector<Index> order(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::vector<EpochReport> log;
    Mat batch;
    Vec grad;
    for (int epoch = 1; epoch <= sure.denoiser_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.resize(data.samples.rows(), static_cast<Index>(stop - start));
            for (std::size_t i = start; i < stop; ++i) {
                batch.col(static_cast<Index>(i - start)) = data.samples.col(order[i]).cast<double>();
            }
            grad.setZero(net.parameter_count());
            const double loss = sure_loss(net, batch, data, sure.mc_epsilon, rng, &grad);
            if (!std::isfinite(loss)) {
                throw NumericalError("train_sure_denoiser: non-finite loss in epoch " + std::to_string(epoch));
            }
            opt.step(net.parameters(), grad);
            total += loss;
            ++batches;
        }
        log.push_back({epoch, total / batches});
        if (on_epoch) {
            on_epoch(log.back());
        }
    }
    return log;
}

Eigen::MatrixXf denoise_dataset(const Denoiser<float>& net, const NoisyDataset& data)
{
    Eigen::MatrixXf out(data.samples.rows(), data.samples.cols());
    constexpr Index kChunk = 256;
    for (Index start = 0; start < data.size(); start += kChunk) {
        const Index len = std::min(kChunk, data.size() - start);
        const Eigen::MatrixXf chunk = data.samples.middleCols(start, len);
        out.middleCols(start, len) = tweedie_denoise(net, chunk, data.t_w, data.alpha_bar_w);
    }
    return out;
}

SureDmResult train_sure_dm(const NoisyDataset& data, const DenoiserArch& arch, const NoiseSchedule& schedule,
                           const TrainConfig& cfg, const SureConfig& sure,
                           const std::function<void(int stage, const EpochReport&)>& on_epoch)
{
    sure.validate();
    Rng init1 = make_stream(cfg.seed, 1);
    Rng init2 = make_stream(cfg.seed, 2);
    auto denoiser = Denoiser<double>::initialized(arch, init1);
    auto stage1 = train_sure_denoiser(denoiser, data, cfg, sure, [&](const EpochReport& r) {
        if (on_epoch) {
            on_epoch(1, r);
        }
    });
    Denoiser<float> frozen = denoiser.cast<float>();
    const Eigen::MatrixXf targets = denoise_dataset(frozen, data);

    auto dm = Denoiser<float>::initialized(arch, init2);
    TrainConfig dm_cfg = cfg;
    dm_cfg.epochs = sure.dm_epochs;
    auto stage2 = train(dm, targets, schedule, dm_cfg, [&](const EpochReport& r) {
        if (on_epoch) {
            on_epoch(2, r);
        }
    });
    return SureDmResult{std::move(frozen), std::move(dm), std::move(stage1), std::move(stage2)};
}

} // namespace dmce
