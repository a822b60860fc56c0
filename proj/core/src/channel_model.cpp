// SPDX-License-Identifier: Apache-2.0
#include "dmce/channel_model.hpp"

#include <numbers>
#include <numeric>

namespace dmce {

void SystemConfig::validate() const
{
    if (n_tx < 1 || n_rx < 1 || n_pilot < 1) {
        throw InvalidArgument("SystemConfig: n_tx, n_rx and n_pilot must be >= 1");
    }
}

ClusterModel ClusterModel::exponential(int n_clusters, int paths_per_cluster, double angle_spread_deg,
                                       double decay)
{
    ClusterModel m;
    m.n_clusters = n_clusters;
    m.paths_per_cluster = paths_per_cluster;
    m.angle_spread_deg = angle_spread_deg;
    m.gain_profile.resize(static_cast<std::size_t>(std::max(n_clusters, 0)));
    for (int c = 0; c < n_clusters; ++c) {
        m.gain_profile[c] = std::exp(-decay * c);
    }
    const double total = std::accumulate(m.gain_profile.begin(), m.gain_profile.end(), 0.0);
    for (auto& g : m.gain_profile) {
        g /= total;
    }
    return m;
}

void ClusterModel::validate() const
{
    if (n_clusters < 1 || paths_per_cluster < 1) {
        throw InvalidArgument("ClusterModel: cluster and path counts must be >= 1");
    }
    if (angle_spread_deg < 0.0) {
        throw InvalidArgument("ClusterModel: negative angular spread");
    }
    if (gain_profile.size() != static_cast<std::size_t>(n_clusters)) {
        throw InvalidArgument("ClusterModel: gain_profile must have one weight per cluster");
    }
    double total = 0.0;
    for (double g : gain_profile) {
        if (!(g >= 0.0)) {
            throw InvalidArgument("ClusterModel: gain weights must be nonnegative");
        }
        total += g;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidArgument("ClusterModel: gain weights must sum to one");
    }
}

CMat dft_matrix(int n)
{
    if (n < 1) {
        throw InvalidArgument("dft_matrix: n must be >= 1");
    }
    CMat f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            // Reduce k*l mod n first so large n keeps full phase accuracy.
            const auto kl = static_cast<long long>(k) * l % n;
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(kl) / n;
            f(k, l) = std::polar(scale, phase);
        }
    }
    return f;
}

CVec steering_vector(int n, double angle_rad)
{
    CVec a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double s = std::sin(angle_rad);
    for (int l = 0; l < n; ++l) {
        a[l] = std::polar(scale, -std::numbers::pi * l * s);
    }
    return a;
}

CMat to_angular(const CMat& spatial)
{
    const CMat a_r = dft_matrix(static_cast<int>(spatial.rows()));
    const CMat a_t = dft_matrix(static_cast<int>(spatial.cols()));
    return a_r.adjoint() * spatial * a_t;
}

CMat from_angular(const CMat& angular)
{
    const CMat a_r = dft_matrix(static_cast<int>(angular.rows()));
    const CMat a_t = dft_matrix(static_cast<int>(angular.cols()));
    return a_r * angular * a_t.adjoint();
}

Vec vectorize_real(const CMat& m)
{
    const Index n = m.size();
    Vec v(2 * n);
    const Eigen::Map<const CVec> flat(m.data(), n);
    v.head(n) = flat.real();
    v.tail(n) = flat.imag();
    return v;
}

CMat devectorize_real(const Vec& v, int rows, int cols)
{
    const Index n = static_cast<Index>(rows) * cols;
    if (v.size() != 2 * n) {
        throw InvalidArgument("devectorize_real: vector length does not match 2*rows*cols");
    }
    CMat m(rows, cols);
    Eigen::Map<CVec> flat(m.data(), n);
    flat.real() = v.head(n);
    flat.imag() = v.tail(n);
    return m;
}

ChannelSample make_sample(CMat spatial)
{
    ChannelSample s;
    s.angular = to_angular(spatial);
    s.real_vec = vectorize_real(s.angular);
    s.spatial = std::move(spatial);
    return s;
}

ChannelSample generate_channel(const SystemConfig& cfg, const ClusterModel& cluster, Rng& rng)
{
    cfg.validate();
    cluster.validate();

    constexpr double deg = std::numbers::pi / 180.0;
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Laplacian with standard deviation equal to the angular spread.
    const double lap_scale = cluster.angle_spread_deg * deg / std::numbers::sqrt2;
    auto laplace = [&] {
        double u = unit(rng);
        while (u == -0.5) {  // the one value with an infinite tail
            u = unit(rng);
        }
        if (lap_scale == 0.0) {
            return 0.0;
        }
        const double mag = -lap_scale * std::log1p(-2.0 * std::abs(u));
        return u < 0.0 ? -mag : mag;
    };

    CMat h = CMat::Zero(cfg.n_rx, cfg.n_tx);
    for (int c = 0; c < cluster.n_clusters; ++c) {
        const double aod_center = unit(rng) * cluster.tx_sector_deg * deg;
        const double aoa_center = unit(rng) * cluster.rx_sector_deg * deg;
        const double path_std = std::sqrt(cluster.gain_profile[c] / cluster.paths_per_cluster / 2.0);
        for (int p = 0; p < cluster.paths_per_cluster; ++p) {
            const double aod = aod_center + laplace();
            const double aoa = aoa_center + laplace();
            const double gr = normal(rng);
            const double gi = normal(rng);
            const Complex g(path_std * gr, path_std * gi);
            h.noalias() += g * steering_vector(cfg.n_rx, aoa) * steering_vector(cfg.n_tx, aod).adjoint();
        }
    }
    // Unit-norm steering vectors give E|h_ij|^2 = 1 / (n_rx n_tx) before this scaling.
    h *= std::sqrt(static_cast<double>(cfg.n_rx) * cfg.n_tx);
    return make_sample(std::move(h));
}

ChannelDataset generate_dataset(const SystemConfig& cfg, const ClusterModel& cluster, Index n_samples,
                                std::uint64_t seed)
{
    cfg.validate();
    cluster.validate();
    if (n_samples < 0) {
        throw InvalidArgument("generate_dataset: negative sample count");
    }
    ChannelDataset ds;
    ds.n_rx = cfg.n_rx;
    ds.n_tx = cfg.n_tx;
    ds.samples.resize(cfg.real_dim(), n_samples);
    for (Index i = 0; i < n_samples; ++i) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
        ds.samples.col(i) = generate_channel(cfg, cluster, rng).real_vec.cast<float>();
    }
    return ds;
}

double mean_entry_power(const ChannelDataset& ds)
{
    if (ds.samples.size() == 0) {
        return 0.0;
    }
    // Each complex entry contributes Re^2 + Im^2, i.e. two real coordinates.
    const double total = ds.samples.cast<double>().squaredNorm();
    return total / (static_cast<double>(ds.samples.size()) / 2.0);
}

} // namespace dmce
