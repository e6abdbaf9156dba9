#pragma once

#include <cstddef>
#include <vector>

#include "lam/tensor.hpp"

namespace lam {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. Holds first/second moment buffers per
/// parameter and a shared step counter; step() reads each parameter's grad
/// buffer (a missing buffer counts as zero gradient).
class Adam {
public:
    explicit Adam(std::vector<Tensor> params, AdamConfig config = {});

    void step();
    void zero_grads();

    std::size_t step_count() const { return step_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::size_t step_ = 0;
    AdamConfig config_;
};

}  // namespace lam
