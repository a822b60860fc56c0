// SPDX-License-Identifier: Apache-2.0
#include "dmce/measurement.hpp"

#include "dmce/channel_model.hpp"

#include <numbers>

namespace dmce {

PilotMatrix make_pilots(PilotKind kind, int n_tx, int n_pilot, Rng& rng)
{
    if (n_tx < 1 || n_pilot < 1) {
        throw InvalidArgument("make_pilots: n_tx and n_pilot must be >= 1");
    }
    PilotMatrix p;
    p.kind = kind;
    p.symbols.resize(n_tx, n_pilot);
    if (kind == PilotKind::Qpsk) {
        std::uniform_int_distribution<int> bit(0, 1);
        const double a = 1.0 / std::numbers::sqrt2;
        for (int k = 0; k < n_pilot; ++k) {
            for (int n = 0; n < n_tx; ++n) {
                const double re = bit(rng) ? a : -a;
                const double im = bit(rng) ? a : -a;
                p.symbols(n, k) = Complex(re, im);
            }
        }
        return p;
    }

    if (n_pilot > n_tx) {
        throw InvalidArgument("make_pilots: Zadoff-Chu pilots need n_pilot <= n_tx (cyclic shifts exhausted)");
    }
    const int len = n_tx;
    const int root = 1;
    const int cf = len % 2;
    CVec seq(len);
    for (int n = 0; n < len; ++n) {
        // n (n + cf) stays exact in integer arithmetic; reduce mod 2*len before scaling.
        const long long q = static_cast<long long>(root) * n * (n + cf) % (2LL * len);
        seq[n] = std::polar(1.0, -std::numbers::pi * static_cast<double>(q) / len);
    }
    for (int k = 0; k < n_pilot; ++k) {
        for (int n = 0; n < n_tx; ++n) {
            p.symbols(n, k) = seq[(n + k) % len];
        }
    }
    return p;
}

double noise_variance_from_snr(double snr_db, int n_tx)
{
    return static_cast<double>(n_tx) / (2.0 * db_to_linear(snr_db));
}

LinearOperator::LinearOperator(Mat a) : a_(std::move(a))
{
    Eigen::BDCSVD<Mat> svd(a_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u_ = svd.matrixU();
    s_ = svd.singularValues();
    v_ = svd.matrixV();
    row_norms_sq_ = a_.rowwise().squaredNorm();
}

MeasurementModel::MeasurementModel(std::shared_ptr<const LinearOperator> op, PilotMatrix pilot, int n_rx,
                                   double noise_var)
    : op_(std::move(op)), pilot_(std::move(pilot)), n_rx_(n_rx), noise_var_(noise_var)
{
    if (!op_) {
        throw InvalidArgument("MeasurementModel: null operator");
    }
    if (noise_var_ < 0.0) {
        throw InvalidArgument("MeasurementModel: negative noise variance");
    }
}

MeasurementModel MeasurementModel::with_noise_var(double noise_var) const
{
    return MeasurementModel(op_, pilot_, n_rx_, noise_var);
}

MeasurementModel MeasurementModel::with_snr_db(double snr_db) const
{
    return with_noise_var(noise_variance_from_snr(snr_db, n_tx()));
}

Mat complex_to_real(const CMat& m)
{
    const Index r = m.rows();
    const Index c = m.cols();
    Mat out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = m.real();
    out.topRightCorner(r, c) = -m.imag();
    out.bottomLeftCorner(r, c) = m.imag();
    out.bottomRightCorner(r, c) = m.real();
    return out;
}

MeasurementModel build_measurement(const PilotMatrix& pilot, int n_rx, double noise_var)
{
    if (n_rx < 1) {
        throw InvalidArgument("build_measurement: n_rx must be >= 1");
    }
    const int n_tx = pilot.n_tx();
    const int n_p = pilot.n_pilot();
    // (P^T kron I)(conj(A_T) kron A_R) = (P^T conj(A_T)) kron A_R
    const CMat left = pilot.symbols.transpose() * dft_matrix(n_tx).conjugate();
    const CMat a_r = dft_matrix(n_rx);
    CMat a_ad(static_cast<Index>(n_p) * n_rx, static_cast<Index>(n_tx) * n_rx);
    for (int i = 0; i < n_p; ++i) {
        for (int j = 0; j < n_tx; ++j) {
            a_ad.block(static_cast<Index>(i) * n_rx, static_cast<Index>(j) * n_rx, n_rx, n_rx) = left(i, j) * a_r;
        }
    }
    auto op = std::make_shared<const LinearOperator>(complex_to_real(a_ad));
    return MeasurementModel(std::move(op), pilot, n_rx, noise_var);
}

Observation observe(const MeasurementModel& model, const Vec& h, Rng& rng)
{
    if (h.size() != model.channel_dim()) {
        throw InvalidArgument("observe: channel vector has wrong length");
    }
    Observation obs;
    obs.noise_var = model.noise_var();
    obs.y = model.a() * h;
    if (model.noise_var() > 0.0) {
        obs.y += std::sqrt(model.noise_var()) * standard_normal(obs.y.size(), rng);
    }
    return obs;
}

Observation quantize_observation(const Observation& obs, const Quantizer& q)
{
    if (obs.quantized()) {
        throw InvalidArgument("quantize_observation: observation is already quantized");
    }
    Observation out;
    out.noise_var = obs.noise_var;
    out.y = q.quantize(obs.y);
    out.quantizer = q;
    return out;
}

} // namespace dmce
