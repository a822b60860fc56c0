// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference computations shared by the unit and acceptance tests. Everything here is
// written from the model definitions, independently of the library code under test.

#include "dmce/measurement.hpp"

#include <cmath>
#include <random>

namespace dmce::oracle {

// log N(y; A h / sqrt(ab), c A A^T + nv I) up to an h-independent constant.
inline double linear_loglik(const Vec& y, const Mat& a, const Vec& h, double ab, double nv)
{
    Mat cov = (1 - ab) / ab * a * a.transpose();
    cov.diagonal().array() += nv;
    const Vec r = y - a * h / std::sqrt(ab);
    return -0.5 * r.dot(cov.ldlt().solve(r));
}

inline long double phi_cdf(double x)
{
    if (std::isinf(x)) {
        return x > 0 ? 1.0L : 0.0L;
    }
    return 0.5L * std::erfc(-static_cast<long double>(x) / std::sqrt(2.0L));
}

// sum_m log(Phi(up'_m) - Phi(lo'_m)) with the normalised cell bounds.
inline double quantized_loglik(const Vec& ybar, const Mat& a, const Quantizer& q, const Vec& h, double ab,
                               double nv)
{
    const Vec z = a * h / std::sqrt(ab);
    long double total = 0;
    for (Index m = 0; m < z.size(); ++m) {
        const double sd = std::sqrt((1 - ab) / ab * a.row(m).squaredNorm() + nv);
        const auto [lo, up] = q.interval(ybar[m]);
        total += std::log(phi_cdf((up - z[m]) / sd) - phi_cdf((lo - z[m]) / sd));
    }
    return static_cast<double>(total);
}

template <typename F>
Vec central_difference(F f, const Vec& x, double step)
{
    Vec g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vec up = x, down = x;
        up[i] += step;
        down[i] -= step;
        g[i] = (f(up) - f(down)) / (2 * step);
    }
    return g;
}

inline double rel(const Vec& got, const Vec& want) { return (got - want).norm() / want.norm(); }

inline Mat random_matrix(Index rows, Index cols, Rng& rng)
{
    Mat m(rows, cols);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = n(rng);
    }
    return m;
}

} // namespace dmce::oracle
