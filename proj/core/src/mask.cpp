#include "lam/mask.hpp"

namespace lam {

void LamConfig::validate() const {
    if (depth_L < 1) throw ConfigError("lam: depth_L must be >= 1");
    if (input_dim < 1) throw ConfigError("lam: input_dim must be >= 1");
    if (max_seq_len < 1) throw ConfigError("lam: max_seq_len must be >= 1");
    if (hidden_dims.size() != depth_L - 1) {
        throw ConfigError("lam: depth_L " + std::to_string(depth_L) + " needs " +
                          std::to_string(depth_L - 1) + " hidden dims, got " +
                          std::to_string(hidden_dims.size()));
    }
    for (std::size_t h : hidden_dims) {
        if (h < 1) throw ConfigError("lam: hidden dims must be positive");
    }
}

std::vector<std::size_t> LamConfig::dim_chain() const {
    std::vector<std::size_t> dims;
    dims.reserve(depth_L + 1);
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(max_seq_len);
    return dims;
}

std::size_t LamConfig::param_count() const {
    const auto dims = dim_chain();
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        count += dims[i] * dims[i + 1] + dims[i + 1];
    }
    return count;
}

LamModule::LamModule(LamConfig config, Prng& prng) : config_(std::move(config)) {
    config_.validate();
    const auto dims = config_.dim_chain();
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const bool final_layer = i + 2 == dims.size();
        Tensor w;
        if (final_layer && config_.final_weight_init == FinalWeightInit::Zeros) {
            w = Tensor::zeros({dims[i], dims[i + 1]}, true);
        } else {
            w = glorot_uniform(prng, dims[i], dims[i + 1]);
        }
        Tensor b = final_layer ? Tensor::full({dims[i + 1]}, config_.final_bias_init, true)
                               : Tensor::zeros({dims[i + 1]}, true);
        weights_.push_back(std::move(w));
        biases_.push_back(std::move(b));
    }
}

Tensor LamModule::run_ffn(const Tensor& x) const {
    Tensor h = x;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        h = add(matmul(h, weights_[i]), biases_[i]);
        const bool final_layer = i + 1 == weights_.size();
        if (!final_layer && config_.activation == LamActivation::Relu) h = relu(h);
    }
    return h;
}

Mask LamModule::forward_self(const Tensor& tokens) const {
    if (tokens.ndim() != 2 || tokens.cols() != config_.input_dim) {
        throw DimensionError("lam forward_self: tokens " + shape_str(tokens.shape()) +
                             " do not match input_dim " + std::to_string(config_.input_dim));
    }
    const std::size_t seq_len = tokens.rows();
    if (seq_len > config_.max_seq_len) {
        throw SequenceLengthError("lam forward_self: sequence length " + std::to_string(seq_len) +
                                  " exceeds max_seq_len " + std::to_string(config_.max_seq_len));
    }
    Tensor wide = run_ffn(tokens);  // [L_t x max_seq_len]
    Tensor values = seq_len == config_.max_seq_len ? wide : slice_cols(wide, 0, seq_len);
    return Mask{values, MaskKind::SelfAttention};
}

Mask LamModule::forward_cross(const Tensor& scores) const {
    if (config_.input_dim != config_.max_seq_len) {
        throw ConfigError("lam forward_cross: requires input_dim == max_seq_len");
    }
    if (scores.ndim() != 2) {
        throw DimensionError("lam forward_cross: scores must be 2-D, got " +
                             shape_str(scores.shape()));
    }
    const std::size_t q_len = scores.rows(), k_len = scores.cols();
    if (q_len > config_.max_seq_len || k_len > config_.max_seq_len) {
        throw SequenceLengthError("lam forward_cross: scores " + shape_str(scores.shape()) +
                                  " exceed max_seq_len " + std::to_string(config_.max_seq_len));
    }
    Tensor padded = scores;
    if (k_len < config_.max_seq_len) {
        padded = concat_cols(scores, Tensor::zeros({q_len, config_.max_seq_len - k_len}));
    }
    Tensor wide = run_ffn(padded);
    Tensor values = k_len == config_.max_seq_len ? wide : slice_cols(wide, 0, k_len);
    return Mask{values, MaskKind::Cross};
}

std::size_t LamModule::param_count() const { return config_.param_count(); }

std::vector<std::pair<std::string, Tensor>> LamModule::named_params() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        out.emplace_back("W" + std::to_string(i + 1), weights_[i]);
        out.emplace_back("b" + std::to_string(i + 1), biases_[i]);
    }
    return out;
}

StaticMask::StaticMask(std::size_t max_seq_len, double init_value) {
    if (max_seq_len < 1) throw ConfigError("static mask: max_seq_len must be >= 1");
    values_ = Tensor::full({max_seq_len, max_seq_len}, init_value, true);
}

Mask StaticMask::forward(std::size_t seq_len) const {
    const std::size_t max_len = values_.rows();
    if (seq_len < 1 || seq_len > max_len) {
        throw SequenceLengthError("static mask: sequence length " + std::to_string(seq_len) +
                                  " outside [1, " + std::to_string(max_len) + "]");
    }
    if (seq_len == max_len) return Mask{values_, MaskKind::SelfAttention};
    Tensor sliced = slice_cols(slice_rows(values_, 0, seq_len), 0, seq_len);
    return Mask{sliced, MaskKind::SelfAttention};
}

std::vector<std::pair<std::string, Tensor>> StaticMask::named_params() const {
    return {{"values", values_}};
}

}  // namespace lam
