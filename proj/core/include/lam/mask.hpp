#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lam/ops.hpp"
#include "lam/prng.hpp"
#include "lam/tensor.hpp"

namespace lam {

enum class LamActivation { Relu, None };
enum class FinalWeightInit { Zeros, Glorot };

/// Configuration of the mask-generating FFN. depth_L layers map input_dim
/// through hidden_dims (length depth_L - 1) to max_seq_len outputs. The
/// activation applies between layers, never after the final one; depth_L == 1
/// with activation None is the single-linear-layer variant.
struct LamConfig {
    std::size_t depth_L = 2;
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t max_seq_len = 0;
    LamActivation activation = LamActivation::Relu;
    FinalWeightInit final_weight_init = FinalWeightInit::Zeros;
    double final_bias_init = 1.0;

    void validate() const;
    /// [input_dim, hidden..., max_seq_len]
    std::vector<std::size_t> dim_chain() const;
    std::size_t param_count() const;
};

enum class MaskKind { SelfAttention, Cross };

/// A real-valued mask fused into attention logits. Self-attention masks are
/// square (token t emits row t); cross masks are [L_q x L_k].
struct Mask {
    Tensor values;
    MaskKind kind = MaskKind::SelfAttention;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }
};

/// The mask-generating FFN. Each token row passes through the layer stack
/// independently; the max_seq_len-wide output is sliced to the live sequence
/// length, so token t produces mask row t.
class LamModule {
public:
    LamModule(LamConfig config, Prng& prng);

    /// tokens [L_t x input_dim] -> square mask [L_t x L_t].
    Mask forward_self(const Tensor& tokens) const;

    /// Raw attention scores [L_q x L_k] -> mask [L_q x L_k]. Rows are
    /// zero-padded to max_seq_len before the FFN (requires input_dim ==
    /// max_seq_len) and the output is sliced back to L_k columns.
    Mask forward_cross(const Tensor& scores) const;

    std::size_t param_count() const;
    std::vector<std::pair<std::string, Tensor>> named_params() const;
    const LamConfig& config() const { return config_; }

private:
    Tensor run_ffn(const Tensor& x) const;

    LamConfig config_;
    std::vector<Tensor> weights_;  // W_i [d_in_i x d_out_i]
    std::vector<Tensor> biases_;   // b_i [d_out_i]
};

/// Sequence-independent learnable mask parameter, sliced to the live length.
class StaticMask {
public:
    StaticMask(std::size_t max_seq_len, double init_value);

    Mask forward(std::size_t seq_len) const;

    std::size_t param_count() const { return values_.numel(); }
    std::vector<std::pair<std::string, Tensor>> named_params() const;
    const Tensor& values() const { return values_; }
    std::size_t max_seq_len() const { return values_.rows(); }

private:
    Tensor values_;  // [max_seq_len x max_seq_len]
};

}  // namespace lam
