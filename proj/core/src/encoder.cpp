#include "lam/encoder.hpp"

#include <cmath>

namespace lam {

namespace {
constexpr double kLayerNormEpsilon = 1e-6;
}

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::FullAttention: return "full_attention";
        case StrategyKind::StaticLearnable: return "static_learnable";
        case StrategyKind::GlobalLam: return "global_lam";
        case StrategyKind::MultiLayerLam: return "multi_layer_lam";
        case StrategyKind::ParamMatchedControl: return "param_matched_control";
    }
    throw ContractError("unknown strategy");
}

StrategyKind strategy_from_name(const std::string& name) {
    if (name == "full_attention") return StrategyKind::FullAttention;
    if (name == "static_learnable") return StrategyKind::StaticLearnable;
    if (name == "global_lam") return StrategyKind::GlobalLam;
    if (name == "multi_layer_lam") return StrategyKind::MultiLayerLam;
    if (name == "param_matched_control") return StrategyKind::ParamMatchedControl;
    throw ConfigError("unknown strategy '" + name + "'");
}

void EncoderConfig::validate() const {
    if (n_layers < 1) throw ConfigError("encoder: n_layers must be >= 1");
    if (d_model < 1 || ffn_hidden < 1 || max_seq_len < 1 || n_classes < 2 || d_in < 1) {
        throw ConfigError("encoder: d_model, ffn_hidden, max_seq_len, d_in must be >= 1 "
                          "and n_classes >= 2");
    }
    MhaConfig{d_model, n_heads}.validate();
    const bool maskless = strategy.kind == StrategyKind::FullAttention ||
                          strategy.kind == StrategyKind::ParamMatchedControl;
    if (maskless != (fusion == FusionMode::None)) {
        throw ConfigError("encoder: fusion must be none exactly for full_attention and "
                          "param_matched_control strategies");
    }
    if (!strategy.extra_hidden_dims.empty() &&
        strategy.kind != StrategyKind::ParamMatchedControl) {
        throw ConfigError("encoder: extra_hidden_dims only apply to param_matched_control");
    }
    if (strategy.uses_lam()) {
        if (!lam.has_value()) throw ConfigError("encoder: LAM strategy needs a lam config");
        lam->validate();
        if (lam->input_dim != d_model) {
            throw ConfigError("encoder: lam.input_dim must equal d_model for self-attention");
        }
        if (lam->max_seq_len != max_seq_len) {
            throw ConfigError("encoder: lam.max_seq_len must equal encoder max_seq_len");
        }
    } else if (lam.has_value()) {
        throw ConfigError("encoder: lam config given but strategy " +
                          strategy_name(strategy.kind) + " does not use one");
    }
}

namespace {

std::vector<std::size_t> ffn_chain(const EncoderConfig& config) {
    std::vector<std::size_t> dims;
    dims.push_back(config.d_model);
    dims.push_back(config.ffn_hidden);
    if (config.strategy.kind == StrategyKind::ParamMatchedControl) {
        dims.insert(dims.end(), config.strategy.extra_hidden_dims.begin(),
                    config.strategy.extra_hidden_dims.end());
    }
    dims.push_back(config.d_model);
    return dims;
}

}  // namespace

EncoderLayer::EncoderLayer(const EncoderConfig& config, Prng& prng)
    : attention(MhaConfig{config.d_model, config.n_heads}, prng) {
    const auto dims = ffn_chain(config);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        ffn_weights.push_back(glorot_uniform(prng, dims[i], dims[i + 1]));
        ffn_biases.push_back(Tensor::zeros({dims[i + 1]}, true));
    }
    ln1_gain = Tensor::full({config.d_model}, 1.0, true);
    ln1_bias = Tensor::zeros({config.d_model}, true);
    ln2_gain = Tensor::full({config.d_model}, 1.0, true);
    ln2_bias = Tensor::zeros({config.d_model}, true);
}

Encoder::Encoder(EncoderConfig config, Prng& prng) : config_(std::move(config)) {
    config_.validate();
    // Pass 1: everything a FullAttention model has, in fixed order.
    embed_w_ = glorot_uniform(prng, config_.d_in, config_.d_model);
    embed_b_ = Tensor::zeros({config_.d_model}, true);
    positional_ = rand_uniform(prng, {config_.max_seq_len, config_.d_model}, -0.2, 0.2);
    positional_.set_requires_grad(true);
    layers_.reserve(config_.n_layers);
    for (std::size_t i = 0; i < config_.n_layers; ++i) layers_.emplace_back(config_, prng);
    head_w_ = glorot_uniform(prng, config_.d_model, config_.n_classes);
    head_b_ = Tensor::zeros({config_.n_classes}, true);

    // Pass 2: strategy extras, drawn after so same-seed twins share pass 1.
    switch (config_.strategy.kind) {
        case StrategyKind::GlobalLam:
            global_lam_ = std::make_shared<LamModule>(*config_.lam, prng);
            break;
        case StrategyKind::MultiLayerLam:
            for (auto& layer : layers_) {
                layer.lam_module = std::make_shared<LamModule>(*config_.lam, prng);
            }
            break;
        case StrategyKind::StaticLearnable: {
            const double identity = config_.fusion == FusionMode::Multiply ? 1.0 : 0.0;
            static_mask_ = std::make_shared<StaticMask>(config_.max_seq_len, identity);
            break;
        }
        default:
            break;
    }
}

Encoder::Encoder(EncoderConfig config) {
    Prng prng(config.seed);
    *this = Encoder(std::move(config), prng);
}

EncoderForward Encoder::forward(const Tensor& tokens, bool capture_records) const {
    if (tokens.ndim() != 2 || tokens.cols() != config_.d_in) {
        throw DimensionError("encoder: tokens " + shape_str(tokens.shape()) +
                             " do not match d_in " + std::to_string(config_.d_in));
    }
    const std::size_t seq_len = tokens.rows();
    if (seq_len > config_.max_seq_len) {
        throw SequenceLengthError("encoder: sequence length " + std::to_string(seq_len) +
                                  " exceeds max_seq_len " + std::to_string(config_.max_seq_len));
    }

    Tensor x = add(matmul(tokens, embed_w_), embed_b_);
    x = add(x, seq_len == config_.max_seq_len ? positional_
                                              : slice_rows(positional_, 0, seq_len));

    EncoderForward out;
    std::optional<Mask> shared_mask;
    if (config_.strategy.kind == StrategyKind::GlobalLam) {
        // One mask from the embedded input sequence, reused at every layer.
        shared_mask = global_lam_->forward_self(x);
    } else if (config_.strategy.kind == StrategyKind::StaticLearnable) {
        shared_mask = static_mask_->forward(seq_len);
    }

    for (const EncoderLayer& layer : layers_) {
        std::optional<Mask> mask;
        if (layer.lam_module) {
            mask = layer.lam_module->forward_self(x);
        } else if (shared_mask.has_value()) {
            mask = shared_mask;
        }
        const FusionMode mode = mask.has_value() ? config_.fusion : FusionMode::None;

        Tensor normed = layer_norm_rows(x, layer.ln1_gain, layer.ln1_bias, kLayerNormEpsilon);
        auto [attn_out, record] = layer.attention.forward(normed, mask, mode, capture_records);
        x = add(x, attn_out);

        Tensor f = layer_norm_rows(x, layer.ln2_gain, layer.ln2_bias, kLayerNormEpsilon);
        for (std::size_t i = 0; i < layer.ffn_weights.size(); ++i) {
            f = add(matmul(f, layer.ffn_weights[i]), layer.ffn_biases[i]);
            if (i + 1 < layer.ffn_weights.size()) f = relu(f);
        }
        x = add(x, f);

        if (mask.has_value()) out.masks.push_back(*mask);
        if (capture_records) out.records.push_back(std::move(record));
    }

    Tensor pooled = mean_rows(x);
    Tensor logits = add(matmul(pooled, head_w_), head_b_);
    out.logits = reshape(logits, {config_.n_classes});
    return out;
}

std::vector<std::pair<std::string, Tensor>> Encoder::named_params() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("embed.W", embed_w_);
    out.emplace_back("embed.b", embed_b_);
    out.emplace_back("positional", positional_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string prefix = "layer" + std::to_string(i) + ".";
        for (auto& [name, p] : layers_[i].attention.named_params()) {
            out.emplace_back(prefix + "attn." + name, p);
        }
        for (std::size_t j = 0; j < layers_[i].ffn_weights.size(); ++j) {
            out.emplace_back(prefix + "ffn.W" + std::to_string(j + 1), layers_[i].ffn_weights[j]);
            out.emplace_back(prefix + "ffn.b" + std::to_string(j + 1), layers_[i].ffn_biases[j]);
        }
        out.emplace_back(prefix + "ln1.gain", layers_[i].ln1_gain);
        out.emplace_back(prefix + "ln1.bias", layers_[i].ln1_bias);
        out.emplace_back(prefix + "ln2.gain", layers_[i].ln2_gain);
        out.emplace_back(prefix + "ln2.bias", layers_[i].ln2_bias);
        if (layers_[i].lam_module) {
            for (auto& [name, p] : layers_[i].lam_module->named_params()) {
                out.emplace_back(prefix + "lam." + name, p);
            }
        }
    }
    out.emplace_back("head.W", head_w_);
    out.emplace_back("head.b", head_b_);
    if (global_lam_) {
        for (auto& [name, p] : global_lam_->named_params()) {
            out.emplace_back("global_lam." + name, p);
        }
    }
    if (static_mask_) {
        for (auto& [name, p] : static_mask_->named_params()) {
            out.emplace_back("static_mask." + name, p);
        }
    }
    return out;
}

std::vector<Tensor> Encoder::params() const {
    std::vector<Tensor> out;
    for (auto& [name, p] : named_params()) out.push_back(p);
    return out;
}

std::size_t Encoder::param_count_total() const {
    std::size_t count = 0;
    for (auto& [name, p] : named_params()) count += p.numel();
    return count;
}

std::size_t param_count_for_config(const EncoderConfig& config) {
    config.validate();
    std::size_t count = config.d_in * config.d_model + config.d_model;  // embedding
    count += config.max_seq_len * config.d_model;                      // positional
    std::size_t per_layer = 4 * (config.d_model * config.d_model + config.d_model);  // attention
    per_layer += 4 * config.d_model;  // two layer norms
    const auto dims = ffn_chain(config);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        per_layer += dims[i] * dims[i + 1] + dims[i + 1];
    }
    count += config.n_layers * per_layer;
    count += config.d_model * config.n_classes + config.n_classes;  // head
    switch (config.strategy.kind) {
        case StrategyKind::GlobalLam: count += config.lam->param_count(); break;
        case StrategyKind::MultiLayerLam: count += config.n_layers * config.lam->param_count(); break;
        case StrategyKind::StaticLearnable: count += config.max_seq_len * config.max_seq_len; break;
        default: break;
    }
    return count;
}

MatchReport match_params(const EncoderConfig& base, double tolerance) {
    if (!base.strategy.uses_lam()) {
        throw ContractError("match_params: base config must use a LAM strategy");
    }
    const std::size_t base_params = param_count_for_config(base);

    EncoderConfig control = base;
    control.strategy = MaskStrategy{StrategyKind::ParamMatchedControl, {}};
    control.fusion = FusionMode::None;
    control.lam.reset();

    auto gap_of = [&](std::size_t count) {
        return std::fabs(static_cast<double>(count) - static_cast<double>(base_params)) /
               static_cast<double>(base_params);
    };

    // Candidate 0: no extra layer at all.
    MatchReport best;
    best.control = control;
    best.base_params = base_params;
    best.control_params = param_count_for_config(control);
    best.relative_gap = gap_of(best.control_params);

    // Widths are searched upward until counts pass the target; the count is
    // strictly increasing in w, so the minimum-gap w is found exactly.
    for (std::size_t w = 1;; ++w) {
        EncoderConfig candidate = control;
        candidate.strategy.extra_hidden_dims = {w};
        const std::size_t count = param_count_for_config(candidate);
        const double gap = gap_of(count);
        if (gap < best.relative_gap) {
            best.control = candidate;
            best.control_params = count;
            best.relative_gap = gap;
        }
        if (count >= base_params) break;
    }
    best.within_tolerance = best.relative_gap <= tolerance;
    return best;
}

}  // namespace lam
