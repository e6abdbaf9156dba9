#include "lam/optim.hpp"

#include <cmath>

namespace lam {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    if (config_.lr <= 0.0) throw ConfigError("adam: learning rate must be positive");
    if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
        throw ConfigError("adam: betas must lie in [0, 1)");
    }
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t idx = 0; idx < params_.size(); ++idx) {
        Tensor& p = params_[idx];
        std::span<const double> g = p.grad();
        if (!g.empty() && g.size() != p.numel()) {
            throw DimensionError("adam: gradient size " + std::to_string(g.size()) +
                                 " does not match parameter " + shape_str(p.shape()));
        }
        std::vector<double>& m = m_[idx];
        std::vector<double>& v = v_[idx];
        std::span<double> w = p.values_mut();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g.empty() ? 0.0 : g[i];
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

void Adam::zero_grads() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace lam
