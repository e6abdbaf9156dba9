#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lam/errors.hpp"

namespace lam {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

namespace detail {

struct TensorData {
    Shape shape;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // empty until a backward pass touches it
};

using DataPtr = std::shared_ptr<TensorData>;

/// Appends a node to this thread's active graph. Callers must only record
/// when Graph::recording() is true and some input requires a gradient.
void record_node(std::function<void()> pull, std::vector<DataPtr> touched);

void ensure_grad(TensorData& t);

}  // namespace detail

/// Dense row-major tensor of 64-bit floats. A Tensor is a cheap handle:
/// copies share storage (clone() for an independent buffer). Mutating values
/// in place is reserved for construction and optimizer updates; doing it in
/// the middle of a recorded forward pass invalidates the gradients.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor ones(Shape shape);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values,
                              bool requires_grad = false);
    /// 2-D convenience: rows of equal length.
    static Tensor from_rows(const std::vector<std::vector<double>>& rows,
                            bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return d_ != nullptr; }
    const Shape& shape() const { return d_->shape; }
    std::size_t ndim() const { return d_->shape.size(); }
    std::size_t numel() const { return d_->values.size(); }
    /// 2-D accessors; throw DimensionError on other ranks.
    std::size_t rows() const;
    std::size_t cols() const;

    double at(std::size_t i) const;
    double at(std::size_t r, std::size_t c) const;
    void set(std::size_t i, double v);
    void set(std::size_t r, std::size_t c, double v);
    /// Scalar read; requires numel() == 1.
    double value() const;

    std::span<const double> values() const { return d_->values; }
    std::span<double> values_mut() { return d_->values; }
    const double* data() const { return d_->values.data(); }
    double* data_mut() { return d_->values.data(); }

    bool requires_grad() const { return d_ && d_->requires_grad; }
    void set_requires_grad(bool on) { d_->requires_grad = on; }

    /// Gradient buffer; empty span if no backward pass has reached it.
    std::span<const double> grad() const;
    double grad_at(std::size_t i) const;
    void zero_grad();

    bool all_finite() const;

    /// Deep copy with requires_grad cleared (a plain value snapshot).
    Tensor clone() const;
    bool same_storage(const Tensor& other) const { return d_ == other.d_; }

    detail::DataPtr storage() const { return d_; }

private:
    explicit Tensor(detail::DataPtr d) : d_(std::move(d)) {}
    detail::DataPtr d_;
};

/// Tape of executed differentiable operations (record-on-execute). While a
/// Graph is alive it is the active tape for the constructing thread: ops
/// whose inputs carry gradients append a pull closure. backward() zero-fills
/// the gradient buffers of every recorded tensor, seeds the loss with 1 and
/// walks the tape once in reverse, so recorded-but-unreached tensors end with
/// zero gradients. One Graph serves one forward/backward pass on one thread.
class Graph {
public:
    Graph();
    ~Graph();
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    void backward(const Tensor& loss);
    std::size_t node_count() const { return nodes_.size(); }

    /// True when some Graph is active on this thread.
    static bool recording();

private:
    std::vector<std::function<void()>> nodes_;
    std::vector<detail::DataPtr> touched_;

    friend void detail::record_node(std::function<void()> pull,
                                    std::vector<detail::DataPtr> touched);
};

namespace detail {

/// Whether an op output should participate in autodiff.
inline bool propagate(const Tensor& a) {
    return Graph::recording() && a.requires_grad();
}
inline bool propagate(const Tensor& a, const Tensor& b) {
    return Graph::recording() && (a.requires_grad() || b.requires_grad());
}

}  // namespace detail

}  // namespace lam
