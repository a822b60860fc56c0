// SPDX-License-Identifier: Apache-2.0
// Microbenchmarks for the hot paths: likelihood scores, the denoiser, a training
// step and a full estimate() call.

#include "dmce/channel_model.hpp"
#include "dmce/measurement.hpp"
#include "dmce/posterior.hpp"
#include "dmce/trainer.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

using namespace dmce;

namespace {

Mat gaussian_matrix(Index rows, Index cols, Rng& rng)
{
    Mat m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        m.col(j) = standard_normal(rows, rng);
    }
    return m / std::sqrt(static_cast<double>(cols));
}

// Square system of size n, shared between the two score benchmarks.
struct ScoreFixture {
    Mat a;
    std::unique_ptr<LinearOperator> op;
    Vec y, h;

    explicit ScoreFixture(Index n)
    {
        Rng rng = make_stream(1, static_cast<std::uint64_t>(n));
        a = gaussian_matrix(n, n, rng);
        op = std::make_unique<LinearOperator>(a);
        y = standard_normal(n, rng);
        h = standard_normal(n, rng);
    }

    static ScoreFixture& get(Index n)
    {
        static std::map<Index, std::unique_ptr<ScoreFixture>> cache;
        auto& slot = cache[n];
        if (!slot) {
            slot = std::make_unique<ScoreFixture>(n);
        }
        return *slot;
    }
};

void BM_ScoreDirect(benchmark::State& state)
{
    auto& f = ScoreFixture::get(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(likelihood_score_direct(f.y, f.a, f.h, 0.5, 0.01));
    }
}
BENCHMARK(BM_ScoreDirect)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_ScoreSvd(benchmark::State& state)
{
    auto& f = ScoreFixture::get(state.range(0));
    const LinearScore score(*f.op, f.y, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(score(f.h, 0.5));
    }
}
BENCHMARK(BM_ScoreSvd)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

Denoiser<float> dense_net(int n_rx, int n_tx)
{
    Rng rng = make_stream(2, 0);
    auto net = Denoiser<float>::initialized(DenoiserArch::ramp(n_rx, n_tx), rng);
    std::normal_distribution<float> small(0.0f, 0.01f);
    for (Index i = 0; i < net.parameter_count(); ++i) {
        if (net.parameters()[i] == 0.0f) {
            net.parameters()[i] = small(rng);
        }
    }
    return net;
}

// args: n_rx, n_tx
void BM_DenoiserForward(benchmark::State& state)
{
    const auto net = dense_net(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    Rng rng = make_stream(3, 0);
    const Eigen::VectorXf h = standard_normal(net.arch().input_dim(), rng).cast<float>();
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.forward(h, 50));
    }
}
BENCHMARK(BM_DenoiserForward)->Args({4, 16})->Args({16, 64})->Unit(benchmark::kMicrosecond);

void BM_TrainStep(benchmark::State& state)
{
    auto net = dense_net(4, 16);
    const int batch = static_cast<int>(state.range(0));
    Rng rng = make_stream(4, 0);
    Eigen::MatrixXf data(net.arch().input_dim(), batch);
    for (int j = 0; j < batch; ++j) {
        data.col(j) = standard_normal(data.rows(), rng).cast<float>();
    }
    TrainConfig cfg;
    Adam<float> opt(net.parameter_count(), cfg);
    const auto schedule = linear_schedule(100);
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_step(net, opt, schedule, data, rng));
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TrainStep)->Arg(128)->Unit(benchmark::kMillisecond);

// args: n_rx, n_tx, T
void BM_Estimate(benchmark::State& state)
{
    const int n_rx = static_cast<int>(state.range(0));
    const int n_tx = static_cast<int>(state.range(1));
    const NetworkPredictor eps(std::make_shared<const Denoiser<float>>(dense_net(n_rx, n_tx)));
    Rng rng = make_stream(5, 0);
    SystemConfig sys;
    sys.n_rx = n_rx;
    sys.n_tx = n_tx;
    sys.n_pilot = n_tx;
    const auto pilots = make_pilots(PilotKind::Qpsk, n_tx, n_tx, rng);
    const MeasurementModel model = build_measurement(pilots, n_rx, noise_variance_from_snr(20.0, n_tx));
    const auto schedule = linear_schedule(static_cast<int>(state.range(2)));
    const auto channel = generate_channel(sys, ClusterModel::exponential(3, 10), rng);
    const Observation obs = observe(model, channel.real_vec, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate(obs, model, eps, schedule, EstimatorConfig{}, rng));
    }
}
BENCHMARK(BM_Estimate)->Args({4, 16, 100})->Args({16, 64, 100})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
