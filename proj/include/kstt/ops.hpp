#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "kstt/tensor.hpp"

// Differentiable tensor operations. Every op records its backward rule on
// the active GradTape when any input requires a gradient.
namespace kstt {

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

// Adds a length-n vector (shape [n] or [1 x n]) to every row of an m x n matrix.
Tensor add_row(const Tensor& a, const Tensor& row);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
// log(1 + exp(x)), stable for large |x|. -log(sigmoid(z)) == softplus(-z).
Tensor softplus(const Tensor& x);
// log(max(x, floor)); the gradient is zero where the floor is active.
Tensor log(const Tensor& x, double floor = 0.0);

// Softmax over a rank-1 tensor, with max subtraction.
Tensor softmax(const Tensor& x);
// Softmax applied independently to every row of a matrix.
Tensor softmax_rows(const Tensor& x);

// Each row divided by max(||row||_2, eps).
Tensor row_l2_normalize(const Tensor& x, double eps = 1e-12);

// Per-row standardization followed by an elementwise affine map.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

// Reductions to a scalar.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_squares(const Tensor& x);

// Picks element i of a tensor as a scalar.
Tensor element(const Tensor& x, std::size_t i);

// Rows of `table` selected by index, repeats allowed. Gradient scatters back.
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> indices);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor concat_cols(const std::vector<Tensor>& parts);
// Mean over rows: [m x n] -> [1 x n]
Tensor mean_rows(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

// Inverted dropout: zeroes entries with probability p and rescales the
// survivors by 1/(1-p). p == 0 returns x unchanged.
Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng);

}  // namespace kstt
