#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lam/mask.hpp"
#include "lam/ops.hpp"

namespace lam {

/// How a mask enters the pre-softmax attention logits.
enum class FusionMode { None, Multiply, Add };

std::string fusion_mode_name(FusionMode mode);
FusionMode fusion_mode_from_name(const std::string& name);

/// None -> logits unchanged (mask must be absent); Multiply -> logits (*) M;
/// Add -> logits + M. Fusion is strictly pre-softmax on the scaled logits.
Tensor fuse(const Tensor& logits, const std::optional<Mask>& mask, FusionMode mode);

/// Scaled dot-product attention for one head. Q is [L_q x d], K and V are
/// [L_k x d]; the optional mask is [L_q x L_k]. Returns (output, weights);
/// differentiable end to end, including through the mask.
std::pair<Tensor, Tensor> attend(const Tensor& q, const Tensor& k, const Tensor& v,
                                 const std::optional<Mask>& mask, FusionMode mode);

struct MhaConfig {
    std::size_t d_model = 0;
    std::size_t n_heads = 1;

    std::size_t head_dim() const { return d_model / n_heads; }
    void validate() const;
};

/// Per-layer, per-head diagnostics: post-softmax weights, the fused
/// pre-softmax logits, and the mask that was applied (value snapshots).
struct AttentionRecord {
    std::vector<Tensor> weights;
    std::vector<Tensor> fused_logits;
    std::optional<Tensor> mask;
};

/// Multi-head self-attention with the mask-fusion injection point. The same
/// mask is applied to every head.
class MhaLayer {
public:
    MhaLayer(MhaConfig config, Prng& prng);

    /// x is [L_t x d_model]; mask (if any) is [L_t x L_t].
    std::pair<Tensor, AttentionRecord> forward(const Tensor& x, const std::optional<Mask>& mask,
                                               FusionMode mode, bool capture_record = true) const;

    std::size_t param_count() const;
    std::vector<std::pair<std::string, Tensor>> named_params() const;
    const MhaConfig& config() const { return config_; }

private:
    MhaConfig config_;
    Tensor w_q_, w_k_, w_v_, w_o_;
    Tensor b_q_, b_k_, b_v_, b_o_;
};

}  // namespace lam
