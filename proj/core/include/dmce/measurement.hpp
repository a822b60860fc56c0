// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/common.hpp"
#include "dmce/quantizer.hpp"

#include <memory>
#include <optional>

namespace dmce {

enum class PilotKind { Qpsk, ZadoffChu };

/// n_tx x n_pilot matrix of unit-modulus pilot symbols.
struct PilotMatrix {
    CMat symbols;
    PilotKind kind = PilotKind::Qpsk;

    int n_tx() const { return static_cast<int>(symbols.rows()); }
    int n_pilot() const { return static_cast<int>(symbols.cols()); }
};

/// QPSK pilots are i.i.d. over {(+-1 +- j)/sqrt(2)}. Zadoff-Chu pilots use root 1
/// with length n_tx; column k is the sequence cyclically shifted by k, which makes
/// the columns orthogonal. ZC needs n_pilot <= n_tx.
PilotMatrix make_pilots(PilotKind kind, int n_tx, int n_pilot, Rng& rng);

/// Per-real-component noise variance for a given SNR: sigma_n^2 = n_tx / (2 * SNR).
double noise_variance_from_snr(double snr_db, int n_tx);

/// Real measurement matrix A together with its thin SVD A = U diag(s) V^T.
///
/// The matrix only depends on the pilots and the receive antenna count, so one
/// instance is shared (read-only) by every SNR point and worker thread.
class LinearOperator {
public:
    explicit LinearOperator(Mat a);

    const Mat& a() const { return a_; }
    const Mat& u() const { return u_; }
    const Vec& singular_values() const { return s_; }
    const Mat& v() const { return v_; }
    /// ||a_m||^2 for every row m.
    const Vec& row_norms_sq() const { return row_norms_sq_; }

    Index rows() const { return a_.rows(); }
    Index cols() const { return a_.cols(); }

private:
    Mat a_;
    Mat u_;
    Vec s_;
    Mat v_;
    Vec row_norms_sq_;
};

class MeasurementModel {
public:
    MeasurementModel(std::shared_ptr<const LinearOperator> op, PilotMatrix pilot, int n_rx, double noise_var);

    const Mat& a() const { return op_->a(); }
    const LinearOperator& op() const { return *op_; }
    std::shared_ptr<const LinearOperator> shared_op() const { return op_; }
    const PilotMatrix& pilot() const { return pilot_; }
    int n_rx() const { return n_rx_; }
    int n_tx() const { return pilot_.n_tx(); }
    double noise_var() const { return noise_var_; }

    Index measurement_dim() const { return op_->rows(); }
    Index channel_dim() const { return op_->cols(); }

    /// Same operator and pilots, different noise level.
    MeasurementModel with_noise_var(double noise_var) const;
    MeasurementModel with_snr_db(double snr_db) const;

private:
    std::shared_ptr<const LinearOperator> op_;
    PilotMatrix pilot_;
    int n_rx_;
    double noise_var_;
};

/// Builds A = real form of (P^T kron I_{n_rx}) (conj(A_T) kron A_R), mapping the
/// [Re; Im] angular-domain vector onto the [Re; Im] received pilot vector.
MeasurementModel build_measurement(const PilotMatrix& pilot, int n_rx, double noise_var = 0.0);

/// Real 2x2 block form [[Re, -Im], [Im, Re]] of a complex matrix.
Mat complex_to_real(const CMat& m);

/// Received pilots. When `quantizer` is set, `y` holds codewords rather than raw samples.
struct Observation {
    Vec y;
    double noise_var = 0.0;
    std::optional<Quantizer> quantizer;

    bool quantized() const { return quantizer.has_value(); }
};

/// y = A h + n with n ~ N(0, noise_var I).
Observation observe(const MeasurementModel& model, const Vec& h, Rng& rng);

/// Passes the raw observation through the ADC.
Observation quantize_observation(const Observation& obs, const Quantizer& q);

} // namespace dmce
