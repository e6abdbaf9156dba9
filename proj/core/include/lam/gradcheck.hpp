#pragma once

#include <functional>
#include <vector>

#include "lam/tensor.hpp"

namespace lam {

/// Central differences (f(p+h) - f(p-h)) / (2h) per parameter coordinate.
/// f must be a deterministic function of the current parameter values; each
/// coordinate is perturbed in place and restored bit-exactly afterwards.
/// Returns one gradient buffer per parameter, in order.
std::vector<std::vector<double>> finite_diff_grad(const std::function<double()>& f,
                                                  const std::vector<Tensor>& params,
                                                  double h = 1e-5);

/// max over coordinates of |a - b| / max(1, |a|, |b|).
double max_rel_error(std::span<const double> a, std::span<const double> b);

/// Runs forward_loss once under a fresh Graph, backpropagates, then compares
/// every parameter's gradient against finite_diff_grad. forward_loss must
/// rebuild the computation from scratch on each call (it is re-evaluated
/// without recording for the finite-difference probes). Returns the worst
/// relative error across all parameters.
double compare_backward_to_fd(const std::function<Tensor()>& forward_loss,
                              const std::vector<Tensor>& params, double h = 1e-5);

}  // namespace lam
