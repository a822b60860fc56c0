// SPDX-License-Identifier: Apache-2.0
#include "dmce/trainer.hpp"

#include <algorithm>
#include <numeric>

namespace dmce {

void TrainConfig::validate() const
{
    if (epochs < 1 || batch_size < 1) {
        throw InvalidArgument("TrainConfig: epochs and batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0) || !(adam_eps > 0.0)) {
        throw InvalidArgument("TrainConfig: learning_rate and adam_eps must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidArgument("TrainConfig: moment decay rates must lie in [0, 1)");
    }
}

template <typename Scalar>
Adam<Scalar>::Adam(Index n_params, const TrainConfig& cfg)
    : lr_(cfg.learning_rate), b1_(cfg.beta1), b2_(cfg.beta2), eps_(cfg.adam_eps), m_(Vector::Zero(n_params)),
      v_(Vector::Zero(n_params))
{
    cfg.validate();
}

template <typename Scalar>
void Adam<Scalar>::step(Vector& params, const Vector& grad)
{
    if (grad.size() != params.size() || params.size() != m_.size()) {
        throw InvalidArgument("Adam: parameter/gradient size mismatch");
    }
    ++steps_;
    const auto b1 = static_cast<Scalar>(b1_);
    const auto b2 = static_cast<Scalar>(b2_);
    m_ = b1 * m_ + (Scalar(1) - b1) * grad;
    v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(steps_));
    const auto step = static_cast<Scalar>(lr_ / c1);
    const auto inv_c2 = static_cast<Scalar>(1.0 / c2);
    const auto eps = static_cast<Scalar>(eps_);
    params.array() -= step * m_.array() / ((v_.array() * inv_c2).sqrt() + eps);
}

template class Adam<float>;
template class Adam<double>;

template <typename Scalar>
double dm_loss(const Denoiser<Scalar>& net, const NoiseSchedule& schedule, const nn::Matrix<Scalar>& h0,
               std::span<const int> t, const nn::Matrix<Scalar>& eps, nn::Vector<Scalar>* grad)
{
    if (h0.rows() != eps.rows() || h0.cols() != eps.cols()) {
        throw InvalidArgument("dm_loss: h0 and eps shapes differ");
    }
    if (static_cast<Index>(t.size()) != h0.cols()) {
        throw InvalidArgument("dm_loss: need one time step per sample");
    }
    nn::Matrix<Scalar> h_t(h0.rows(), h0.cols());
    for (Index b = 0; b < h0.cols(); ++b) {
        const double ab = schedule.alpha_bar(t[static_cast<std::size_t>(b)]);
        h_t.col(b) = static_cast<Scalar>(std::sqrt(ab)) * h0.col(b) +
                     static_cast<Scalar>(std::sqrt(1.0 - ab)) * eps.col(b);
    }
    typename Denoiser<Scalar>::Tape tape;
    const nn::Matrix<Scalar> pred = net.forward(h_t, t, tape);
    const nn::Matrix<Scalar> diff = pred - eps;
    const double n = static_cast<double>(diff.size());
    const double loss = static_cast<double>(diff.squaredNorm()) / n;
    if (grad != nullptr) {
        net.backward(static_cast<Scalar>(2.0 / n) * diff, tape, *grad);
    }
    return loss;
}

template double dm_loss<float>(const Denoiser<float>&, const NoiseSchedule&, const nn::Matrix<float>&,
                               std::span<const int>, const nn::Matrix<float>&, nn::Vector<float>*);
template double dm_loss<double>(const Denoiser<double>&, const NoiseSchedule&, const nn::Matrix<double>&,
                                std::span<const int>, const nn::Matrix<double>&, nn::Vector<double>*);

double train_step(Denoiser<float>& net, Adam<float>& opt, const NoiseSchedule& schedule, const Eigen::MatrixXf& h0,
                  Rng& rng)
{
    std::uniform_int_distribution<int> pick(1, schedule.t_max());
    std::vector<int> t(static_cast<std::size_t>(h0.cols()));
    for (auto& ti : t) {
        ti = pick(rng);
    }
    std::normal_distribution<double> normal;
    Eigen::MatrixXf eps(h0.rows(), h0.cols());
    for (Index j = 0; j < eps.cols(); ++j) {
        for (Index i = 0; i < eps.rows(); ++i) {
            eps(i, j) = static_cast<float>(normal(rng));
        }
    }
    Eigen::VectorXf grad = Eigen::VectorXf::Zero(net.parameter_count());
    const double loss = dm_loss(net, schedule, h0, t, eps, &grad);
    if (!std::isfinite(loss)) {
        return loss;
    }
    opt.step(net.parameters(), grad);
    return loss;
}

std::vector<EpochReport> train(Denoiser<float>& net, const Eigen::MatrixXf& data, const NoiseSchedule& schedule,
                               const TrainConfig& cfg, const std::function<void(const EpochReport&)>& on_epoch)
{
    cfg.validate();
    if (data.cols() == 0) {
        throw InvalidArgument("train: empty dataset");
    }
    if (data.rows() != net.arch().input_dim()) {
        throw InvalidArgument("train: sample length does not match the network");
    }
    Rng rng = make_stream(cfg.seed, 0x7261696eULL);
    Adam<float> opt(net.parameter_count(), cfg);
    std::vector<Index> order(static_cast<std::size_t>(data.cols()));
    std::iota(order.begin(), order.end(), Index{0});
    std::vector<EpochReport> log;
    Eigen::MatrixXf batch;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.resize(data.rows(), static_cast<Index>(stop - start));
            for (std::size_t k = start; k < stop; ++k) {
                batch.col(static_cast<Index>(k - start)) = data.col(order[k]);
            }
            const double loss = train_step(net, opt, schedule, batch, rng);
            if (!std::isfinite(loss)) {
                throw NumericalError("train: non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batches + 1));
            }
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

Vec NetworkPredictor::predict(const Vec& h_t, int t) const
{
    const Eigen::VectorXf x = h_t.cast<float>();
    return net_->forward(x, t).cast<double>();
}

GaussianPriorPredictor::GaussianPriorPredictor(NoiseSchedule schedule, double prior_var, double prior_mean)
    : schedule_(std::move(schedule)), prior_var_(prior_var), prior_mean_(prior_mean)
{
    if (!(prior_var > 0.0)) {
        throw InvalidArgument("GaussianPriorPredictor: prior variance must be positive");
    }
}

Vec GaussianPriorPredictor::predict(const Vec& h_t, int t) const
{
    const double ab = schedule_.alpha_bar(t);
    return std::sqrt(1.0 - ab) / (ab * prior_var_ + 1.0 - ab) *
           (h_t.array() - std::sqrt(ab) * prior_mean_).matrix();
}

Vec reverse_sample(const NoisePredictor& eps, const NoiseSchedule& schedule, Index dim, Rng& rng)
{
    Vec h = standard_normal(dim, rng);
    for (int t = schedule.t_max(); t >= 1; --t) {
        const double a = schedule.alpha(t);
        const double ab = schedule.alpha_bar(t);
        h = (h - (1.0 - a) / std::sqrt(1.0 - ab) * eps.predict(h, t)) / std::sqrt(a);
        if (t > 1) {
            h += std::sqrt(schedule.beta_tilde(t)) * standard_normal(dim, rng);
        }
    }
    return h;
}

} // namespace dmce
