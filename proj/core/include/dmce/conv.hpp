// SPDX-License-Identifier: Apache-2.0
#pragma once

// 3x3 "same" convolution on feature maps stored as C x (B * H * W) matrices: one
// column per pixel, pixels of a sample contiguous, pixel p = row + H * col
// (column-major within an image, matching the real-vector channel layout).

#include <Eigen/Dense>

#include <vector>

namespace dmce::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// For every pixel, the source pixel of each of the 9 taps (ky * 3 + kx), or -1
/// when the tap falls in the zero padding.
inline std::vector<int> neighbour_table(int height, int width)
{
    std::vector<int> table(static_cast<std::size_t>(height) * width * 9);
    for (int c = 0; c < width; ++c) {
        for (int r = 0; r < height; ++r) {
            const int p = r + height * c;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const int rr = r + ky - 1;
                    const int cc = c + kx - 1;
                    const bool inside = rr >= 0 && rr < height && cc >= 0 && cc < width;
                    table[static_cast<std::size_t>(p) * 9 + ky * 3 + kx] = inside ? rr + height * cc : -1;
                }
            }
        }
    }
    return table;
}

template <typename Scalar>
void im2col(const Matrix<Scalar>& x, const std::vector<int>& table, int pixels, Matrix<Scalar>& cols)
{
    const Eigen::Index c_in = x.rows();
    const Eigen::Index n = x.cols();
    cols.resize(9 * c_in, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index base = j - j % pixels;
        const int p = static_cast<int>(j % pixels);
        for (int k = 0; k < 9; ++k) {
            const int src = table[static_cast<std::size_t>(p) * 9 + k];
            if (src < 0) {
                cols.col(j).segment(k * c_in, c_in).setZero();
            } else {
                cols.col(j).segment(k * c_in, c_in) = x.col(base + src);
            }
        }
    }
}

template <typename Scalar>
void col2im(const Matrix<Scalar>& cols, const std::vector<int>& table, int pixels, Matrix<Scalar>& dx)
{
    const Eigen::Index c_in = cols.rows() / 9;
    const Eigen::Index n = cols.cols();
    dx.setZero(c_in, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index base = j - j % pixels;
        const int p = static_cast<int>(j % pixels);
        for (int k = 0; k < 9; ++k) {
            const int src = table[static_cast<std::size_t>(p) * 9 + k];
            if (src >= 0) {
                dx.col(base + src) += cols.col(j).segment(k * c_in, c_in);
            }
        }
    }
}

/// y = W * im2col(x) + b. W is C_out x (9 C_in) with column k * C_in + c for tap k
/// and input channel c. `cols` is scratch space.
template <typename Scalar, typename WeightT, typename BiasT>
void conv3x3_forward(const WeightT& w, const BiasT& b, const Matrix<Scalar>& x, const std::vector<int>& table,
                     int pixels, Matrix<Scalar>& cols, Matrix<Scalar>& y)
{
    im2col(x, table, pixels, cols);
    y.noalias() = w * cols;
    y.colwise() += b;
}

/// Accumulates dW += dy * cols^T and db += rowsum(dy), where `cols` = im2col(x) from the
/// forward pass; writes dx if non-null. `dcols` is scratch space.
template <typename Scalar, typename WeightT, typename DWeightT, typename DBiasT>
void conv3x3_backward(const WeightT& w, const Matrix<Scalar>& cols, const Matrix<Scalar>& dy,
                      const std::vector<int>& table, int pixels, DWeightT&& dw, DBiasT&& db, Matrix<Scalar>* dx,
                      Matrix<Scalar>& dcols)
{
    dw.noalias() += dy * cols.transpose();
    db += dy.rowwise().sum();
    if (dx != nullptr) {
        dcols.noalias() = w.transpose() * dy;
        col2im(dcols, table, pixels, *dx);
    }
}

} // namespace dmce::nn
