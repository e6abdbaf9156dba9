#pragma once

#include <cstdint>
#include <vector>

#include "lam/prng.hpp"
#include "lam/tensor.hpp"

namespace lam {

/// Planted-token two-modality classification task. Each sample holds L_a + L_b
/// tokens; k tokens per modality carry signal vectors drawn from a shared
/// direction pool, everything else is Gaussian noise. The label is the sign
/// of the summed dot products between paired planted tokens, so solving the
/// task requires associating planted tokens across the two modalities.
struct TaskSpec {
    std::size_t L_a = 16;
    std::size_t L_b = 16;
    std::size_t d_in = 8;
    std::size_t k = 4;
    double noise_sigma = 1.0;
    std::uint64_t seed = 1;

    std::size_t seq_len() const { return L_a + L_b; }
    void validate() const;
};

struct Sample {
    Tensor tokens;  // [L_t x d_in]
    int label = 0;  // 0 or 1
    /// Metadata only, never fed to the model: 2k indices, k per modality.
    std::vector<std::size_t> informative_positions;
};

/// Draws n samples from the spec. The shared direction pool is a pure
/// function of spec.seed, so train and eval splits generated from one
/// continuing prng see the same pool.
std::vector<Sample> gen_dataset(const TaskSpec& spec, Prng& prng, std::size_t n);

/// The pool of unit-norm signal directions for a spec: max(4, k) rows.
Tensor direction_pool(const TaskSpec& spec);

}  // namespace lam
