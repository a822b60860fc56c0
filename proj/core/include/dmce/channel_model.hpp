// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/common.hpp"

#include <filesystem>
#include <vector>

namespace dmce {

/// Antenna/pilot dimensions of a point-to-point narrowband MIMO link.
///
/// SNR follows the convention SNR = n_tx / (2 sigma_n^2), so the per-real-component
/// noise variance depends on the transmit antenna count.
struct SystemConfig {
    int n_tx = 16;
    int n_rx = 4;
    int n_pilot = 16;
    double snr_db = 20.0;
    std::uint64_t seed = 0;

    void validate() const;
    /// alpha = n_pilot / n_tx; values below one are under-determined.
    double pilot_density() const { return static_cast<double>(n_pilot) / n_tx; }
    /// N = 2 n_rx n_tx
    Index real_dim() const { return 2 * static_cast<Index>(n_rx) * n_tx; }
    /// M = 2 n_rx n_pilot
    Index measurement_dim() const { return 2 * static_cast<Index>(n_rx) * n_pilot; }
};

/// Clustered geometric propagation model used to synthesise structured channels.
///
/// Every cluster has a centre angle of departure (uniform over the transmit sector)
/// and arrival (uniform over the receive sector); its paths scatter around the
/// centre with a Laplacian distribution whose standard deviation is the angular
/// spread. Path gains are circular Gaussian with per-cluster power `gain_profile[c]`
/// shared evenly among the cluster's paths.
struct ClusterModel {
    int n_clusters = 3;
    int paths_per_cluster = 10;
    double angle_spread_deg = 5.0;
    double tx_sector_deg = 120.0;
    double rx_sector_deg = 180.0;
    std::vector<double> gain_profile{};

    /// Cluster powers proportional to exp(-decay * c), normalised to sum to one.
    static ClusterModel exponential(int n_clusters = 3, int paths_per_cluster = 10,
                                    double angle_spread_deg = 5.0, double decay = 1.0);

    void validate() const;
};

/// One channel realisation in its three equivalent views.
struct ChannelSample {
    CMat spatial;  // H, n_rx x n_tx
    CMat angular;  // H_ad, n_rx x n_tx
    Vec real_vec;  // vectorize_real(H_ad), length 2 n_rx n_tx
};

/// Unitary DFT matrix, F(k, l) = exp(-j 2 pi k l / n) / sqrt(n).
CMat dft_matrix(int n);

/// Half-wavelength ULA response with unit norm: a_l = exp(-j pi l sin(angle)) / sqrt(n).
CVec steering_vector(int n, double angle_rad);

/// H_ad = A_R^H H A_T, the matrix form of vec(H) = (conj(A_T) kron A_R) vec(H_ad).
CMat to_angular(const CMat& spatial);
CMat from_angular(const CMat& angular);

/// Column-major vectorisation followed by [Re; Im] stacking.
Vec vectorize_real(const CMat& m);
CMat devectorize_real(const Vec& v, int rows, int cols);

ChannelSample make_sample(CMat spatial);

/// Draws one realisation. The output is scaled so that E|h_ij|^2 = 1 over the ensemble.
ChannelSample generate_channel(const SystemConfig& cfg, const ClusterModel& cluster, Rng& rng);

/// A set of angular-domain channels stored column-wise as float32 real vectors.
struct ChannelDataset {
    int n_rx = 0;
    int n_tx = 0;
    Eigen::MatrixXf samples;  // (2 n_rx n_tx) x n_samples

    Index size() const { return samples.cols(); }
    Index dim() const { return samples.rows(); }
    Vec sample(Index i) const { return samples.col(i).cast<double>(); }
};

/// Sample i is drawn from make_stream(seed, i), so the result does not depend on
/// how generation is split across workers.
ChannelDataset generate_dataset(const SystemConfig& cfg, const ClusterModel& cluster,
                                Index n_samples, std::uint64_t seed);

/// Mean |h_ij|^2 over all samples and entries.
double mean_entry_power(const ChannelDataset& ds);

// Binary container: "DMCE0001", then little-endian u32 {n_rx, n_tx, n_samples, dtype=0},
// then n_samples float32 vectors of length 2 n_rx n_tx.
void write_dataset(const std::filesystem::path& path, const ChannelDataset& ds);
ChannelDataset read_dataset(const std::filesystem::path& path);

} // namespace dmce
