#include "dmce/baselines.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace dmce;

namespace {

Mat random_matrix(Index rows, Index cols, Rng& rng)
{
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    return m;
}

// Random covariance with a decaying spectrum.
Mat random_covariance(Index n, Rng& rng)
{
    const Eigen::HouseholderQR<Mat> qr(random_matrix(n, n, rng));
    const Mat q = qr.householderQ();
    Vec d(n);
    for (Index i = 0; i < n; ++i) {
        d[i] = 2.0 * std::exp(-0.5 * static_cast<double>(i));
    }
    return q * d.asDiagonal() * q.transpose();
}

} // namespace

TEST_CASE("least squares")
{
    Rng rng = make_stream(1, 0);
    const LinearOperator square(random_matrix(10, 10, rng));
    const Vec h = standard_normal(10, rng);
    CHECK((ls_estimate(square.a() * h, square) - h).norm() <= 1e-9);

    const LinearOperator twice(2.0 * Mat::Identity(6, 6));
    const Vec y = standard_normal(6, rng);
    CHECK((ls_estimate(y, twice) - y / 2).norm() <= 1e-14);

    // Under-determined: consistent and in the row space (minimum norm).
    const Mat a = random_matrix(6, 12, rng);
    const LinearOperator wide(a);
    const Vec est = ls_estimate(y, wide);
    CHECK((a * est - y).norm() <= 1e-9);
    const Vec min_norm = a.transpose() * (a * a.transpose()).ldlt().solve(y);
    CHECK((est - min_norm).norm() <= 1e-9);

    // Rank deficiency: a duplicated row is ignored, not inverted.
    Mat dup = random_matrix(6, 6, rng);
    dup.row(5) = dup.row(4);
    const LinearOperator deficient(dup);
    const Vec yd = dup * standard_normal(6, rng);
    const Vec ed = ls_estimate(yd, deficient);
    CHECK(ed.allFinite());
    CHECK((dup * ed - yd).norm() <= 1e-8 * yd.norm());
    CHECK_THROWS_AS(ls_estimate(Vec::Zero(5), deficient), InvalidArgument);
}

TEST_CASE("sample covariance")
{
    Rng rng = make_stream(2, 0);
    const Index n = 6;
    const Mat c = random_covariance(n, rng);
    const Eigen::LLT<Mat> chol(c);
    const Mat l = chol.matrixL();
    double previous = std::numeric_limits<double>::infinity();
    for (Index d : {100, 1000, 10000, 100000}) {
        Mat samples(n, d);
        for (Index i = 0; i < d; ++i) {
            samples.col(i) = l * standard_normal(n, rng);
        }
        const auto cov = SampleCovariance::from_samples(samples);
        CHECK(cov.n_samples == d);
        CHECK((cov.c_h - cov.c_h.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(Eigen::SelfAdjointEigenSolver<Mat>(cov.c_h).eigenvalues().minCoeff() >= -1e-10);
        CHECK(cov.c_h.isApprox(samples * samples.transpose() / static_cast<double>(d), 1e-12));
        const double err = (cov.c_h - c).norm();
        CHECK(err < previous);
        previous = err;
        if (d == 1000) {
            const auto single = SampleCovariance::from_samples(Eigen::MatrixXf(samples.cast<float>()));
            CHECK(single.c_h.isApprox(cov.c_h, 1e-5));
        }
    }
    CHECK(previous < 0.05 * c.norm());
    CHECK_THROWS_AS(SampleCovariance::from_samples(Mat(3, 0)), InvalidArgument);
}

TEST_CASE("LMMSE")
{
    Rng rng = make_stream(3, 0);
    const Vec y = standard_normal(5, rng);
    CHECK((lmmse_estimate(y, Mat::Identity(5, 5), Mat::Identity(5, 5), 0.25) - y / 1.25).norm() < 1e-14);
    CHECK(lmmse_estimate(y, Mat::Identity(5, 5), Mat::Identity(5, 5), 1e14).norm() < 1e-12);
    CHECK_THROWS_AS(LmmseFilter(Mat::Identity(5, 5), Mat::Zero(5, 5), 0.0), NumericalError);
    CHECK_THROWS_AS(LmmseFilter(Mat::Identity(5, 5), Mat::Zero(4, 4), 0.1), InvalidArgument);

    // Known-covariance Gaussian channels: mean squared error against the information-form
    // trace tr((C^-1 + A^T A / nv)^-1).
    const Index n = 8;
    const Mat c = random_covariance(n, rng);
    const Mat l = Eigen::LLT<Mat>(c).matrixL();
    const Mat a = random_matrix(6, n, rng);
    for (double nv : {0.01, 0.1, 1.0}) {
        const Mat info = c.inverse() + a.transpose() * a / nv;
        const double mmse = info.inverse().trace();
        const LmmseFilter filter(a, c, nv);
        double total = 0.0;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i) {
            const Vec h = l * standard_normal(n, rng);
            const Vec obs = a * h + std::sqrt(nv) * standard_normal(6, rng);
            total += (filter.apply(obs) - h).squaredNorm();
        }
        CHECK(total / draws == doctest::Approx(mmse).epsilon(0.03));
    }
}

TEST_CASE("LMMSE beats LS on Gaussian data")
{
    Rng rng = make_stream(4, 0);
    const Index n = 10;
    const Mat c = random_covariance(n, rng);
    const Mat l = Eigen::LLT<Mat>(c).matrixL();
    const LinearOperator op(random_matrix(12, n, rng));
    for (double nv : {1.0, 0.1, 0.01}) {
        const LmmseFilter filter(op.a(), c, nv);
        double e_ls = 0.0, e_lmmse = 0.0;
        for (int i = 0; i < 200; ++i) {
            const Vec h = l * standard_normal(n, rng);
            const Vec y = op.a() * h + std::sqrt(nv) * standard_normal(12, rng);
            e_ls += (ls_estimate(y, op) - h).squaredNorm();
            e_lmmse += (filter.apply(y) - h).squaredNorm();
        }
        CHECK(e_lmmse < e_ls);
    }
}

TEST_CASE("soft threshold")
{
    Vec x(5);
    x << -2.0, -0.5, 0.0, 0.3, 1.5;
    Vec want(5);
    want << -1.0, 0.0, 0.0, 0.0, 0.5;
    CHECK(soft_threshold(x, 1.0) == want);
    CHECK(soft_threshold(x, 0.0) == x);
    Rng rng = make_stream(5, 0);
    for (int i = 0; i < 100; ++i) {
        const Vec a = standard_normal(7, rng), b = standard_normal(7, rng);
        CHECK((soft_threshold(a, 0.4) - soft_threshold(b, 0.4)).norm() <= (a - b).norm() + 1e-15);
    }
}

TEST_CASE("LASSO")
{
    Rng rng = make_stream(6, 0);
    // lambda = 0 on a well-conditioned square system reaches the LS solution.
    const Eigen::HouseholderQR<Mat> qr(random_matrix(8, 8, rng));
    Vec sv(8);
    sv << 1.0, 0.9, 0.8, 0.7, 0.6, 0.55, 0.5, 0.45;
    const LinearOperator square(Mat(Mat(qr.householderQ()) * sv.asDiagonal()));
    const Vec y = standard_normal(8, rng);
    CHECK((lasso_estimate(y, square, 0.0, 5000) - ls_estimate(y, square)).norm() <= 1e-4);

    const LinearOperator op(random_matrix(12, 20, rng));
    const Vec y2 = op.a() * soft_threshold(standard_normal(20, rng), 1.0) + 0.05 * standard_normal(12, rng);
    const double lam_max = (op.a().transpose() * y2).cwiseAbs().maxCoeff();
    CHECK(lasso_estimate(y2, op, lam_max, 100).cwiseAbs().maxCoeff() == 0.0);
    CHECK(lasso_estimate(y2, op, 2 * lam_max, 100).cwiseAbs().maxCoeff() == 0.0);
    CHECK(lasso_estimate(y2, op, 0.9 * lam_max, 500).cwiseAbs().maxCoeff() > 0.0);

    for (double frac : {0.01, 0.1, 0.5}) {
        const double lam = frac * lam_max;
        const auto r = lasso_solve(y2, op, lam, 3000);
        REQUIRE(!r.objective.empty());
        CHECK(static_cast<int>(r.objective.size()) == r.iterations);
        CHECK(r.objective.front() <= lasso_objective(y2, op.a(), Vec::Zero(20), lam));
        for (std::size_t i = 1; i < r.objective.size(); ++i) {
            CHECK(r.objective[i] <= r.objective[i - 1]);
        }
        CHECK(r.objective.back() == doctest::Approx(lasso_objective(y2, op.a(), r.h, lam)));
        // Optimality: A^T (y - A h) = lambda sign(h) on the support, |.| <= lambda off it.
        const Vec corr = op.a().transpose() * (y2 - op.a() * r.h);
        for (Index i = 0; i < 20; ++i) {
            if (r.h[i] != 0.0) {
                CHECK(corr[i] == doctest::Approx(lam * (r.h[i] > 0 ? 1.0 : -1.0)).epsilon(1e-3).scale(lam_max));
            } else {
                CHECK(std::abs(corr[i]) <= lam * (1 + 1e-3));
            }
        }
        CHECK(lasso_estimate(y2, op, lam, 3000) == r.h);
    }
    CHECK_THROWS_AS(lasso_solve(y2, op, -1.0, 10), InvalidArgument);
}
