#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lam/attention.hpp"
#include "lam/mask.hpp"

namespace lam {

enum class StrategyKind {
    FullAttention,
    StaticLearnable,
    GlobalLam,
    MultiLayerLam,
    ParamMatchedControl,
};

std::string strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

/// Where masks come from. GlobalLam owns one LamModule whose mask is reused
/// at every layer; MultiLayerLam owns one per layer. ParamMatchedControl is
/// full attention with extra_hidden_dims appended to every feed-forward
/// chain to soak up the LAM parameter budget.
struct MaskStrategy {
    StrategyKind kind = StrategyKind::FullAttention;
    std::vector<std::size_t> extra_hidden_dims;

    bool uses_lam() const {
        return kind == StrategyKind::GlobalLam || kind == StrategyKind::MultiLayerLam;
    }
    bool uses_mask() const { return uses_lam() || kind == StrategyKind::StaticLearnable; }
};

struct EncoderConfig {
    std::size_t n_layers = 1;
    std::size_t d_model = 0;
    std::size_t n_heads = 1;
    std::size_t ffn_hidden = 0;
    std::size_t max_seq_len = 0;
    std::size_t n_classes = 2;
    std::size_t d_in = 0;  // input token width fed to the embedding projection
    MaskStrategy strategy;
    FusionMode fusion = FusionMode::None;
    std::optional<LamConfig> lam;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Pre-norm residual block: x + Attn(LN1(x)), then x + FFN(LN2(x)). The
/// feed-forward chain is d_model -> ffn_hidden (-> extras) -> d_model with
/// ReLU between links. A per-layer LamModule is attached under the
/// MultiLayerLam strategy.
struct EncoderLayer {
    MhaLayer attention;
    std::vector<Tensor> ffn_weights;
    std::vector<Tensor> ffn_biases;
    Tensor ln1_gain, ln1_bias;
    Tensor ln2_gain, ln2_bias;
    std::shared_ptr<LamModule> lam_module;  // MultiLayerLam only

    EncoderLayer(const EncoderConfig& config, Prng& prng);
};

struct EncoderForward {
    Tensor logits;             // [n_classes]
    std::vector<Mask> masks;   // one per layer; empty for no-mask strategies
    std::vector<AttentionRecord> records;  // one per layer when captured
};

/// Transformer encoder stack with per-layer mask wiring, a learned input
/// projection, learned absolute positional embeddings, and a mean-pool +
/// linear classification head.
///
/// Parameter initialization is two-pass from one Prng stream: first every
/// parameter a FullAttention model has (embedding, positional, layers, head),
/// then the strategy extras (LAM modules / static mask). Two encoders built
/// from the same seed therefore share their non-mask parameters bit for bit
/// regardless of strategy.
class Encoder {
public:
    Encoder(EncoderConfig config, Prng& prng);
    /// Convenience: draws from Prng(config.seed).
    explicit Encoder(EncoderConfig config);

    /// tokens is [L_t x d_in] with L_t <= max_seq_len.
    EncoderForward forward(const Tensor& tokens, bool capture_records = true) const;

    std::size_t param_count_total() const;
    std::vector<std::pair<std::string, Tensor>> named_params() const;
    std::vector<Tensor> params() const;
    const EncoderConfig& config() const { return config_; }

private:
    EncoderConfig config_;
    Tensor embed_w_, embed_b_;
    Tensor positional_;
    std::vector<EncoderLayer> layers_;
    Tensor head_w_, head_b_;
    std::shared_ptr<LamModule> global_lam_;
    std::shared_ptr<StaticMask> static_mask_;
};

/// Analytic parameter count for a config (no construction); cross-checked in
/// tests against Encoder::param_count_total of a built instance.
std::size_t param_count_for_config(const EncoderConfig& config);

struct MatchReport {
    EncoderConfig control;
    std::size_t base_params = 0;
    std::size_t control_params = 0;
    double relative_gap = 0.0;
    bool within_tolerance = false;
};

/// Builds the full-attention control for a LAM config: appends one extra
/// linear(+ReLU) layer inside each feed-forward block and sizes its width by
/// deterministic integer search so the total parameter count lands within
/// `tolerance` of the base model's. When no width achieves the tolerance the
/// best achievable gap is reported.
MatchReport match_params(const EncoderConfig& base, double tolerance = 0.01);

}  // namespace lam
