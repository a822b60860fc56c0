// SPDX-License-Identifier: Apache-2.0
#include "dmce/baselines.hpp"

namespace dmce {

Vec ls_estimate(const Vec& y, const LinearOperator& op)
{
    if (y.size() != op.rows()) {
        throw InvalidArgument("ls_estimate: observation length does not match the measurement matrix");
    }
    const Vec& s = op.singular_values();
    if (s.size() == 0) {
        return Vec::Zero(op.cols());
    }
    const double cut = 1e-10 * s[0];
    Vec w = op.u().transpose() * y;
    for (Index i = 0; i < s.size(); ++i) {
        w[i] = s[i] > cut ? w[i] / s[i] : 0.0;
    }
    return op.v() * w;
}

SampleCovariance SampleCovariance::from_samples(const Mat& samples)
{
    if (samples.cols() == 0) {
        throw InvalidArgument("SampleCovariance: no samples");
    }
    SampleCovariance c;
    c.n_samples = samples.cols();
    c.c_h = Mat::Zero(samples.rows(), samples.rows());
    c.c_h.selfadjointView<Eigen::Lower>().rankUpdate(samples, 1.0 / static_cast<double>(samples.cols()));
    c.c_h = c.c_h.selfadjointView<Eigen::Lower>();
    return c;
}

SampleCovariance SampleCovariance::from_samples(const Eigen::MatrixXf& samples)
{
    return from_samples(Mat(samples.cast<double>()));
}

LmmseFilter::LmmseFilter(const Mat& a, const Mat& c_h, double noise_var)
{
    if (c_h.rows() != a.cols() || c_h.cols() != a.cols()) {
        throw InvalidArgument("LmmseFilter: covariance size does not match the measurement matrix");
    }
    if (noise_var < 0.0) {
        throw InvalidArgument("LmmseFilter: negative noise variance");
    }
    const Mat cat = c_h * a.transpose();  // N x M
    Mat inner = a * cat;
    inner.diagonal().array() += noise_var;
    Eigen::LDLT<Mat> ldlt(inner);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
        throw NumericalError("LmmseFilter: A C_h A^T + noise_var I is singular");
    }
    // W = C_h A^T inner^{-1} = (inner^{-1} A C_h)^T
    w_ = ldlt.solve(cat.transpose()).transpose();
    if (!w_.allFinite()) {
        throw NumericalError("LmmseFilter: non-finite filter");
    }
}

Vec LmmseFilter::apply(const Vec& y) const
{
    if (y.size() != w_.cols()) {
        throw InvalidArgument("LmmseFilter: observation length mismatch");
    }
    return w_ * y;
}

Vec lmmse_estimate(const Vec& y, const Mat& a, const Mat& c_h, double noise_var)
{
    return LmmseFilter(a, c_h, noise_var).apply(y);
}

Vec soft_threshold(const Vec& x, double tau)
{
    return x.unaryExpr([tau](double v) {
        const double m = std::abs(v) - tau;
        return m > 0.0 ? std::copysign(m, v) : 0.0;
    });
}

double lasso_objective(const Vec& y, const Mat& a, const Vec& h, double lambda)
{
    return 0.5 * (y - a * h).squaredNorm() + lambda * h.lpNorm<1>();
}

LassoResult lasso_solve(const Vec& y, const LinearOperator& op, double lambda, int max_iters)
{
    if (lambda < 0.0) {
        throw InvalidArgument("lasso_estimate: lambda must be >= 0");
    }
    if (max_iters < 1) {
        throw InvalidArgument("lasso_estimate: max_iters must be >= 1");
    }
    if (y.size() != op.rows()) {
        throw InvalidArgument("lasso_estimate: observation length does not match the measurement matrix");
    }
    const Mat& a = op.a();
    LassoResult res;
    const double smax = op.singular_values().size() > 0 ? op.singular_values()[0] : 0.0;
    if (!(smax > 0.0)) {
        res.h = Vec::Zero(op.cols());
        return res;
    }
    const double step = 1.0 / (smax * smax);
    const Vec aty = a.transpose() * y;
    const Mat gram = a.transpose() * a;

    Vec x = Vec::Zero(op.cols());
    Vec z = x;
    double tk = 1.0;
    double fx = lasso_objective(y, a, x, lambda);
    for (int k = 1; k <= max_iters; ++k) {
        // Proximal gradient step from the extrapolated point z.
        const Vec u = soft_threshold(z - step * (gram * z - aty), step * lambda);
        const double fu = lasso_objective(y, a, u, lambda);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        Vec x_new = x;
        double f_new = fx;
        if (fu <= fx) {
            x_new = u;
            f_new = fu;
        }
        z = x_new + (tk / tn) * (u - x_new) + ((tk - 1.0) / tn) * (x_new - x);
        // A rejected step leaves x in place, so measure progress by the trial point.
        const double change = (u - x).norm();
        const double ref = x.norm();
        x.swap(x_new);
        fx = f_new;
        tk = tn;
        res.objective.push_back(fx);
        res.iterations = k;
        if (ref > 0.0 && change <= 1e-6 * ref) {
            break;
        }
    }
    res.h = std::move(x);
    return res;
}

Vec lasso_estimate(const Vec& y, const LinearOperator& op, double lambda, int max_iters)
{
    return lasso_solve(y, op, lambda, max_iters).h;
}

} // namespace dmce
