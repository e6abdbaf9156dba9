#include "lam/gradcheck.hpp"

#include <cmath>

namespace lam {

std::vector<std::vector<double>> finite_diff_grad(const std::function<double()>& f,
                                                  const std::vector<Tensor>& params, double h) {
    if (h <= 0.0) throw ContractError("finite_diff_grad: step h must be positive");
    std::vector<std::vector<double>> grads;
    grads.reserve(params.size());
    for (const Tensor& p : params) {
        std::vector<double> g(p.numel());
        Tensor t = p;  // shared storage; perturb in place
        std::span<double> w = t.values_mut();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double original = w[i];
            w[i] = original + h;
            const double fp = f();
            w[i] = original - h;
            const double fm = f();
            w[i] = original;
            g[i] = (fp - fm) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double max_rel_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("max_rel_error: length mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({1.0, std::fabs(a[i]), std::fabs(b[i])});
        worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
    }
    return worst;
}

double compare_backward_to_fd(const std::function<Tensor()>& forward_loss,
                              const std::vector<Tensor>& params, double h) {
    std::vector<std::vector<double>> backward_grads;
    {
        Graph graph;
        Tensor loss = forward_loss();
        graph.backward(loss);
        for (const Tensor& p : params) {
            std::span<const double> g = p.grad();
            backward_grads.emplace_back(g.begin(), g.end());
            if (backward_grads.back().empty()) {
                backward_grads.back().assign(p.numel(), 0.0);  // never reached
            }
        }
    }
    auto scalar_f = [&forward_loss]() { return forward_loss().value(); };
    const std::vector<std::vector<double>> fd = finite_diff_grad(scalar_f, params, h);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        worst = std::max(worst, max_rel_error(backward_grads[i], fd[i]));
    }
    return worst;
}

}  // namespace lam
