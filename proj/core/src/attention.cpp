#include "lam/attention.hpp"

#include <cmath>

namespace lam {

std::string fusion_mode_name(FusionMode mode) {
    switch (mode) {
        case FusionMode::None: return "none";
        case FusionMode::Multiply: return "multiply";
        case FusionMode::Add: return "add";
    }
    throw ContractError("unknown fusion mode");
}

FusionMode fusion_mode_from_name(const std::string& name) {
    if (name == "none") return FusionMode::None;
    if (name == "multiply") return FusionMode::Multiply;
    if (name == "add") return FusionMode::Add;
    throw ConfigError("unknown fusion mode '" + name + "'");
}

Tensor fuse(const Tensor& logits, const std::optional<Mask>& mask, FusionMode mode) {
    if (mode == FusionMode::None) {
        if (mask.has_value()) {
            throw ContractError("fuse: mask supplied with fusion mode none");
        }
        return logits;
    }
    if (!mask.has_value()) {
        throw ContractError("fuse: fusion mode " + fusion_mode_name(mode) + " requires a mask");
    }
    if (mask->values.shape() != logits.shape()) {
        throw DimensionError("fuse: mask " + shape_str(mask->values.shape()) +
                             " does not match logits " + shape_str(logits.shape()));
    }
    return mode == FusionMode::Multiply ? mul(logits, mask->values) : add(logits, mask->values);
}

std::pair<Tensor, Tensor> attend(const Tensor& q, const Tensor& k, const Tensor& v,
                                 const std::optional<Mask>& mask, FusionMode mode) {
    if (q.ndim() != 2 || k.ndim() != 2 || v.ndim() != 2 || q.cols() != k.cols() ||
        k.rows() != v.rows()) {
        throw DimensionError("attend: inconsistent shapes q " + shape_str(q.shape()) + ", k " +
                             shape_str(k.shape()) + ", v " + shape_str(v.shape()));
    }
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Tensor logits = scale(matmul(q, transpose(k)), inv_sqrt_dk);
    Tensor weights = softmax_rows(fuse(logits, mask, mode));
    Tensor output = matmul(weights, v);
    return {output, weights};
}

void MhaConfig::validate() const {
    if (d_model < 1 || n_heads < 1) throw ConfigError("mha: d_model and n_heads must be >= 1");
    if (d_model % n_heads != 0) {
        throw ConfigError("mha: n_heads " + std::to_string(n_heads) + " does not divide d_model " +
                          std::to_string(d_model));
    }
}

MhaLayer::MhaLayer(MhaConfig config, Prng& prng) : config_(config) {
    config_.validate();
    const std::size_t d = config_.d_model;
    w_q_ = glorot_uniform(prng, d, d);
    w_k_ = glorot_uniform(prng, d, d);
    w_v_ = glorot_uniform(prng, d, d);
    w_o_ = glorot_uniform(prng, d, d);
    b_q_ = Tensor::zeros({d}, true);
    b_k_ = Tensor::zeros({d}, true);
    b_v_ = Tensor::zeros({d}, true);
    b_o_ = Tensor::zeros({d}, true);
}

std::pair<Tensor, AttentionRecord> MhaLayer::forward(const Tensor& x,
                                                     const std::optional<Mask>& mask,
                                                     FusionMode mode, bool capture_record) const {
    if (x.ndim() != 2 || x.cols() != config_.d_model) {
        throw DimensionError("mha: input " + shape_str(x.shape()) + " does not match d_model " +
                             std::to_string(config_.d_model));
    }
    const std::size_t seq_len = x.rows();
    if (mask.has_value() &&
        (mask->values.rows() != seq_len || mask->values.cols() != seq_len)) {
        throw DimensionError("mha: mask " + shape_str(mask->values.shape()) +
                             " does not match sequence length " + std::to_string(seq_len));
    }
    Tensor q = add(matmul(x, w_q_), b_q_);
    Tensor k = add(matmul(x, w_k_), b_k_);
    Tensor v = add(matmul(x, w_v_), b_v_);

    AttentionRecord record;
    const std::size_t hd = config_.head_dim();
    std::vector<Tensor> head_outputs;
    head_outputs.reserve(config_.n_heads);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(hd));
    for (std::size_t h = 0; h < config_.n_heads; ++h) {
        const std::size_t c0 = h * hd, c1 = (h + 1) * hd;
        Tensor qh = slice_cols(q, c0, c1);
        Tensor kh = slice_cols(k, c0, c1);
        Tensor vh = slice_cols(v, c0, c1);
        Tensor logits = scale(matmul(qh, transpose(kh)), inv_sqrt_dk);
        Tensor fused = fuse(logits, mask, mode);
        Tensor weights = softmax_rows(fused);
        head_outputs.push_back(matmul(weights, vh));
        if (capture_record) {
            record.weights.push_back(weights.clone());
            record.fused_logits.push_back(fused.clone());
        }
    }
    if (capture_record && mask.has_value()) record.mask = mask->values.clone();

    Tensor concat = config_.n_heads == 1 ? head_outputs[0] : concat_cols(head_outputs);
    Tensor y = add(matmul(concat, w_o_), b_o_);
    return {y, std::move(record)};
}

std::size_t MhaLayer::param_count() const {
    return 4 * (config_.d_model * config_.d_model + config_.d_model);
}

std::vector<std::pair<std::string, Tensor>> MhaLayer::named_params() const {
    return {{"Wq", w_q_}, {"bq", b_q_}, {"Wk", w_k_}, {"bk", b_k_},
            {"Wv", w_v_}, {"bv", b_v_}, {"Wo", w_o_}, {"bo", b_o_}};
}

}  // namespace lam
