#include "lam/tensor.hpp"

#include <cmath>
#include <utility>

namespace lam {

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    s += "]";
    return s;
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

static void check_shape(const Shape& shape) {
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
    }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    check_shape(shape);
    auto d = std::make_shared<detail::TensorData>();
    d->values.assign(shape_numel(shape), 0.0);
    d->shape = std::move(shape);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.d_->values) v = value;
    return t;
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape);
    if (shape_numel(shape) != values.size()) {
        throw DimensionError("value count " + std::to_string(values.size()) +
                             " does not fill shape " + shape_str(shape));
    }
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->values = std::move(values);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad) {
    if (rows.empty()) throw DimensionError("from_rows: no rows");
    const std::size_t n = rows[0].size();
    std::vector<double> flat;
    flat.reserve(rows.size() * n);
    for (const auto& r : rows) {
        if (r.size() != n) throw DimensionError("from_rows: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return from_values({rows.size(), n}, std::move(flat), requires_grad);
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

std::size_t Tensor::rows() const {
    if (ndim() != 2) throw DimensionError("expected 2-D tensor, got " + shape_str(shape()));
    return d_->shape[0];
}

std::size_t Tensor::cols() const {
    if (ndim() != 2) throw DimensionError("expected 2-D tensor, got " + shape_str(shape()));
    return d_->shape[1];
}

double Tensor::at(std::size_t i) const {
    if (i >= numel()) throw IndexError("flat index " + std::to_string(i) + " out of range");
    return d_->values[i];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    if (r >= rows() || c >= cols()) {
        throw IndexError("index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + shape_str(shape()));
    }
    return d_->values[r * cols() + c];
}

void Tensor::set(std::size_t i, double v) {
    if (i >= numel()) throw IndexError("flat index " + std::to_string(i) + " out of range");
    d_->values[i] = v;
}

void Tensor::set(std::size_t r, std::size_t c, double v) {
    if (r >= rows() || c >= cols()) {
        throw IndexError("index (" + std::to_string(r) + "," + std::to_string(c) +
                         ") out of range for " + shape_str(shape()));
    }
    d_->values[r * cols() + c] = v;
}

double Tensor::value() const {
    if (numel() != 1) throw ContractError("value(): tensor is not scalar, shape " + shape_str(shape()));
    return d_->values[0];
}

std::span<const double> Tensor::grad() const {
    if (!d_ || d_->grad.empty()) return {};
    return d_->grad;
}

double Tensor::grad_at(std::size_t i) const {
    if (d_->grad.empty()) throw ContractError("grad_at: no gradient buffer");
    if (i >= d_->grad.size()) throw IndexError("grad index out of range");
    return d_->grad[i];
}

void Tensor::zero_grad() { d_->grad.assign(d_->values.size(), 0.0); }

bool Tensor::all_finite() const {
    for (double v : d_->values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor Tensor::clone() const {
    auto d = std::make_shared<detail::TensorData>();
    d->shape = d_->shape;
    d->values = d_->values;
    d->requires_grad = false;
    return Tensor(std::move(d));
}

// ---------------------------------------------------------------------------
// Graph: thread-local stack of active tapes.

namespace {
thread_local std::vector<Graph*> g_active_graphs;
}

Graph::Graph() { g_active_graphs.push_back(this); }

Graph::~Graph() {
    if (!g_active_graphs.empty() && g_active_graphs.back() == this) {
        g_active_graphs.pop_back();
    }
}

bool Graph::recording() { return !g_active_graphs.empty(); }

void Graph::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward: loss must be a scalar tensor");
    }
    // Zero everything first, then seed; a tensor may appear several times.
    for (auto& t : touched_) t->grad.assign(t->values.size(), 0.0);
    loss.storage()->grad.assign(1, 1.0);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

namespace detail {

void ensure_grad(TensorData& t) {
    if (t.grad.size() != t.values.size()) t.grad.assign(t.values.size(), 0.0);
}

void record_node(std::function<void()> pull, std::vector<DataPtr> touched) {
    Graph* g = g_active_graphs.back();
    g->nodes_.push_back(std::move(pull));
    for (auto& t : touched) g->touched_.push_back(std::move(t));
}

}  // namespace detail

}  // namespace lam
