#pragma once

#include <cstdint>

#include "lam/prng.hpp"
#include "lam/tensor.hpp"

namespace lam {

// All ops are differentiable: when a Graph is active and an input carries
// gradients, a pull closure is recorded onto the tape. Without an active
// Graph they are plain numeric kernels.

/// Standard matrix product a[m x k] * b[k x n].
Tensor matmul(const Tensor& a, const Tensor& b);

/// Row-wise softmax, stabilized by row-max subtraction.
Tensor softmax_rows(const Tensor& x);

/// Elementwise max(0, x); the subgradient at 0 is 0.
Tensor relu(const Tensor& x);

// Elementwise arithmetic. Shapes must match, or b may be a row vector
// ([n] or [1 x n]) or column vector ([m x 1]) broadcast against matrix a.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double c);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor transpose(const Tensor& x);

/// Columns [c0, c1) of a matrix; backward scatters into a zero buffer.
Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1);
Tensor slice_rows(const Tensor& x, std::size_t r0, std::size_t r1);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Stacks 1-D tensors of equal length into a [k x n] matrix.
Tensor stack_rows(const std::vector<Tensor>& rows);

/// Row-major copy into a new shape with the same element count.
Tensor reshape(const Tensor& x, Shape shape);

/// Mean over rows: [m x n] -> [1 x n].
Tensor mean_rows(const Tensor& x);

/// Mean over the batch of -log softmax(logits)[label].
Tensor cross_entropy_logits(const Tensor& logits,
                            const std::vector<std::size_t>& labels);

/// Per-row layer normalization with learned gain/bias (both shape [n]).
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double epsilon);

// Random tensor construction. Draw order is row-major, one element at a
// time, so streams are reproducible from the Prng contract alone.
Tensor rand_uniform(Prng& prng, Shape shape, double lo, double hi);
Tensor rand_normal(Prng& prng, Shape shape, double mean, double stddev);
/// Glorot-uniform [fan_in x fan_out]: limit = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(Prng& prng, std::size_t fan_in, std::size_t fan_out,
                      bool requires_grad = true);

}  // namespace lam
