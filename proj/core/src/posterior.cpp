// SPDX-License-Identifier: Apache-2.0
#include "dmce/posterior.hpp"

#include "dmce/gaussian.hpp"

#include <Eigen/Cholesky>

namespace dmce {

namespace {

void check_alpha_bar(double alpha_bar)
{
    if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
        throw InvalidArgument("likelihood score: alpha_bar must lie in (0, 1]");
    }
}

void check_dims(const LinearOperator& op, Index y_len, Index h_len)
{
    if (y_len != op.rows() || h_len != op.cols()) {
        throw InvalidArgument("likelihood score: dimensions do not match the measurement matrix");
    }
}

} // namespace

void EstimatorConfig::validate() const
{
    if (!(grad_scale > 0.0)) {
        throw InvalidArgument("EstimatorConfig: grad_scale must be positive");
    }
    if (enhance_rounds < 1) {
        throw InvalidArgument("EstimatorConfig: enhance_rounds must be >= 1");
    }
    if (!(enhance_window >= 0.0 && enhance_window <= 1.0)) {
        throw InvalidArgument("EstimatorConfig: enhance_window must lie in [0, 1]");
    }
}

Vec prior_update(const NoisePredictor& eps, const NoiseSchedule& schedule, const Vec& h_t, int t)
{
    const double a = schedule.alpha(t);
    const double ab = schedule.alpha_bar(t);
    return (h_t - (1.0 - a) / std::sqrt(1.0 - ab) * eps.predict(h_t, t)) / std::sqrt(a);
}

Vec likelihood_score_direct(const Vec& y, const Mat& a, const Vec& h_t, double alpha_bar, double noise_var)
{
    check_alpha_bar(alpha_bar);
    if (y.size() != a.rows() || h_t.size() != a.cols()) {
        throw InvalidArgument("likelihood_score_direct: dimensions do not match the measurement matrix");
    }
    const double sab = std::sqrt(alpha_bar);
    const double c = (1.0 - alpha_bar) / alpha_bar;
    Mat cov = c * (a * a.transpose());
    cov.diagonal().array() += noise_var;
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("likelihood_score_direct: measurement covariance is singular");
    }
    const Vec r = llt.solve(y - a * h_t / sab);
    if (!r.allFinite()) {
        throw NumericalError("likelihood_score_direct: solve produced non-finite values");
    }
    return a.transpose() * r / sab;
}

LinearScore::LinearScore(const LinearOperator& op, const Vec& y, double noise_var)
    : op_(&op), uty_(op.u().transpose() * y), noise_var_(noise_var)
{
    if (y.size() != op.rows()) {
        throw InvalidArgument("LinearScore: observation length does not match the measurement matrix");
    }
    if (noise_var < 0.0) {
        throw InvalidArgument("LinearScore: negative noise variance");
    }
}

Vec LinearScore::operator()(const Vec& h_t, double alpha_bar) const
{
    check_alpha_bar(alpha_bar);
    const Vec& s = op_->singular_values();
    const double sab = std::sqrt(alpha_bar);
    const double c = (1.0 - alpha_bar) / alpha_bar;
    Vec w = uty_ - (s.array() * (op_->v().transpose() * h_t).array() / sab).matrix();
    for (Index i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0) {
            w[i] = 0.0;
            continue;
        }
        const double den = c * s[i] * s[i] + noise_var_;
        if (!(den > 0.0)) {
            throw NumericalError("likelihood score: measurement covariance is singular");
        }
        w[i] *= s[i] / den;
    }
    return op_->v() * w / sab;
}

Vec likelihood_score_svd(const Vec& y, const LinearOperator& op, const Vec& h_t, double alpha_bar,
                         double noise_var)
{
    check_dims(op, y.size(), h_t.size());
    return LinearScore(op, y, noise_var)(h_t, alpha_bar);
}

QuantizedScore::QuantizedScore(const LinearOperator& op, const Quantizer& q, const Vec& ybar, double noise_var)
    : op_(&op), lo_(ybar.size()), up_(ybar.size()), noise_var_(noise_var)
{
    if (ybar.size() != op.rows()) {
        throw InvalidArgument("QuantizedScore: observation length does not match the measurement matrix");
    }
    if (noise_var < 0.0) {
        throw InvalidArgument("QuantizedScore: negative noise variance");
    }
    for (Index m = 0; m < ybar.size(); ++m) {
        const auto [lo, up] = q.interval(ybar[m]);
        lo_[m] = lo;
        up_[m] = up;
    }
}

Vec QuantizedScore::operator()(const Vec& h_t, double alpha_bar) const
{
    check_alpha_bar(alpha_bar);
    if (h_t.size() != op_->cols()) {
        throw InvalidArgument("likelihood score: channel length does not match the measurement matrix");
    }
    const double sab = std::sqrt(alpha_bar);
    const double c = (1.0 - alpha_bar) / alpha_bar;
    const Vec z = op_->a() * h_t / sab;
    const Vec& row_sq = op_->row_norms_sq();
    Vec g(z.size());
    for (Index m = 0; m < z.size(); ++m) {
        const double sd = std::sqrt(c * row_sq[m] + noise_var_);
        if (!(sd > 0.0)) {
            throw NumericalError("quantized likelihood score: zero effective noise on row " + std::to_string(m));
        }
        g[m] = interval_score((lo_[m] - z[m]) / sd, (up_[m] - z[m]) / sd) / sd;
    }
    return op_->a().transpose() * g / sab;
}

Vec likelihood_score_quantized(const Vec& ybar, const LinearOperator& op, const Quantizer& q, const Vec& h_t,
                               double alpha_bar, double noise_var)
{
    check_dims(op, ybar.size(), h_t.size());
    return QuantizedScore(op, q, ybar, noise_var)(h_t, alpha_bar);
}

Vec estimate(const Observation& obs, const MeasurementModel& model, const NoisePredictor& eps,
             const NoiseSchedule& schedule, const EstimatorConfig& cfg, Rng& rng)
{
    cfg.validate();
    const LinearOperator& op = model.op();
    if (obs.y.size() != op.rows()) {
        throw InvalidArgument("estimate: observation length does not match the measurement model");
    }
    bool quantized = obs.quantized();
    if (cfg.likelihood == LikelihoodKind::Linear) {
        quantized = false;
    } else if (cfg.likelihood == LikelihoodKind::Quantized && !obs.quantized()) {
        throw InvalidArgument("estimate: quantized likelihood requested for an unquantized observation");
    }
    std::function<Vec(const Vec&, double)> score;
    if (quantized) {
        score = QuantizedScore(op, *obs.quantizer, obs.y, obs.noise_var);
    } else {
        score = LinearScore(op, obs.y, obs.noise_var);
    }

    const Index n = op.cols();
    const int t_max = schedule.t_max();
    const double window = cfg.enhance_window * t_max;
    Vec h = standard_normal(n, rng);
    Vec next;
    for (int t = t_max; t >= 1; --t) {
        const double a = schedule.alpha(t);
        const double ab = schedule.alpha_bar(t);
        const double weight = cfg.grad_scale * (1.0 - a) / std::sqrt(a);
        const int rounds = (cfg.enhanced && t <= window) ? cfg.enhance_rounds : 1;
        for (int r = 0; r < rounds; ++r) {
            next = prior_update(eps, schedule, h, t) + weight * score(h, ab);
            if (r + 1 < rounds) {
                // Back to level t with one forward step from t-1.
                h = std::sqrt(a) * next + std::sqrt(1.0 - a) * standard_normal(n, rng);
            }
        }
        h.swap(next);
        if (!h.allFinite()) {
            throw NumericalError("estimate: non-finite iterate at step " + std::to_string(t));
        }
    }
    return h;
}

double nmse(const Vec& h_hat, const Vec& h_true)
{
    if (h_hat.size() != h_true.size()) {
        throw InvalidArgument("nmse: length mismatch");
    }
    const double ref = h_true.squaredNorm();
    if (!(ref > 0.0)) {
        throw InvalidArgument("nmse: reference channel has zero norm");
    }
    return (h_hat - h_true).squaredNorm() / ref;
}

double nmse_db(std::span<const Vec> h_hat, std::span<const Vec> h_true)
{
    if (h_hat.size() != h_true.size() || h_hat.empty()) {
        throw InvalidArgument("nmse_db: need equally many (>= 1) estimates and references");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < h_hat.size(); ++i) {
        total += nmse(h_hat[i], h_true[i]);
    }
    return linear_to_db(total / static_cast<double>(h_hat.size()));
}

} // namespace dmce
