// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmce/measurement.hpp"

#include <Eigen/Cholesky>

namespace dmce {

/// Minimum-norm least squares A^+ y through the cached SVD; singular values below
/// 1e-10 * s_max are treated as zero.
Vec ls_estimate(const Vec& y, const LinearOperator& op);

/// C_h = (1/D) sum_i h_i h_i^T over the columns of `samples`.
struct SampleCovariance {
    Mat c_h;
    Index n_samples = 0;

    static SampleCovariance from_samples(const Eigen::MatrixXf& samples);
    static SampleCovariance from_samples(const Mat& samples);
};

/// Linear MMSE filter h = C_h A^T (A C_h A^T + noise_var I)^{-1} y for a fixed
/// (A, C_h, noise_var); the filter matrix is formed once.
class LmmseFilter {
public:
    LmmseFilter(const Mat& a, const Mat& c_h, double noise_var);
    Vec apply(const Vec& y) const;
    const Mat& matrix() const { return w_; }

private:
    Mat w_;
};

Vec lmmse_estimate(const Vec& y, const Mat& a, const Mat& c_h, double noise_var);

struct LassoResult {
    Vec h;
    int iterations = 0;
    std::vector<double> objective;  // after each iteration
};

/// min ||y - A h||^2 / 2 + lambda ||h||_1 by monotone FISTA with step 1/L, L = s_max^2.
/// Stops after `max_iters` or once a proximal step moves the iterate by <= 1e-6 relative.
LassoResult lasso_solve(const Vec& y, const LinearOperator& op, double lambda, int max_iters);
Vec lasso_estimate(const Vec& y, const LinearOperator& op, double lambda, int max_iters);

double lasso_objective(const Vec& y, const Mat& a, const Vec& h, double lambda);

/// sign(x) max(|x| - tau, 0), element-wise.
Vec soft_threshold(const Vec& x, double tau);

} // namespace dmce
