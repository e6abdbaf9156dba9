#include "lam/config.hpp"

#include <fstream>
#include <sstream>

#include "json_detail.hpp"

namespace lam {

namespace detail {

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const std::string& a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError(context + ": unknown key '" + key + "'");
    }
}

const json& require_key(const json& obj, const std::string& key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(context + ": missing key '" + key + "'");
    return *it;
}

namespace {

std::size_t get_size(const json& obj, const std::string& key, const std::string& context) {
    const json& v = require_key(obj, key, context);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError(context + ": '" + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

double get_double(const json& obj, const std::string& key, const std::string& context) {
    const json& v = require_key(obj, key, context);
    if (!v.is_number()) throw ConfigError(context + ": '" + key + "' must be a number");
    return v.get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& context) {
    const json& v = require_key(obj, key, context);
    if (!v.is_string()) throw ConfigError(context + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t get_seed(const json& obj, const std::string& context) {
    const json& v = require_key(obj, "seed", context);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw ConfigError(context + ": 'seed' must be an integer");
    }
    return v.get<std::uint64_t>();
}

}  // namespace

json task_to_json(const TaskSpec& task) {
    return json{{"L_a", task.L_a},
                {"L_b", task.L_b},
                {"d_in", task.d_in},
                {"k", task.k},
                {"noise_sigma", task.noise_sigma},
                {"seed", task.seed}};
}

TaskSpec task_from_json(const json& obj) {
    reject_unknown_keys(obj, {"L_a", "L_b", "d_in", "k", "noise_sigma", "seed"}, "task");
    TaskSpec task;
    task.L_a = get_size(obj, "L_a", "task");
    task.L_b = get_size(obj, "L_b", "task");
    task.d_in = get_size(obj, "d_in", "task");
    task.k = get_size(obj, "k", "task");
    task.noise_sigma = get_double(obj, "noise_sigma", "task");
    task.seed = get_seed(obj, "task");
    task.validate();
    return task;
}

json train_to_json(const TrainConfig& config) {
    return json{{"lr", config.lr},
                {"epochs", config.epochs},
                {"batch_size", config.batch_size},
                {"n_train", config.n_train},
                {"n_eval", config.n_eval},
                {"seed", config.seed}};
}

TrainConfig train_from_json(const json& obj) {
    reject_unknown_keys(obj, {"lr", "epochs", "batch_size", "n_train", "n_eval", "seed"}, "train");
    TrainConfig config;
    config.lr = get_double(obj, "lr", "train");
    config.epochs = get_size(obj, "epochs", "train");
    config.batch_size = get_size(obj, "batch_size", "train");
    config.n_train = get_size(obj, "n_train", "train");
    config.n_eval = get_size(obj, "n_eval", "train");
    config.seed = get_seed(obj, "train");
    config.validate();
    return config;
}

json lam_config_to_json(const LamConfig& config) {
    return json{{"depth_L", config.depth_L},
                {"input_dim", config.input_dim},
                {"hidden_dims", config.hidden_dims},
                {"max_seq_len", config.max_seq_len},
                {"activation", config.activation == LamActivation::Relu ? "relu" : "none"},
                {"final_weight_init",
                 config.final_weight_init == FinalWeightInit::Zeros ? "zeros" : "glorot"},
                {"final_bias_init", config.final_bias_init}};
}

LamConfig lam_config_from_json(const json& obj) {
    reject_unknown_keys(obj,
                        {"depth_L", "input_dim", "hidden_dims", "max_seq_len", "activation",
                         "final_weight_init", "final_bias_init"},
                        "lam");
    LamConfig config;
    config.depth_L = get_size(obj, "depth_L", "lam");
    config.input_dim = get_size(obj, "input_dim", "lam");
    const json& hidden = require_key(obj, "hidden_dims", "lam");
    if (!hidden.is_array()) throw ConfigError("lam: 'hidden_dims' must be an array");
    for (const json& h : hidden) config.hidden_dims.push_back(h.get<std::size_t>());
    config.max_seq_len = get_size(obj, "max_seq_len", "lam");
    const std::string act = get_string(obj, "activation", "lam");
    if (act == "relu") {
        config.activation = LamActivation::Relu;
    } else if (act == "none") {
        config.activation = LamActivation::None;
    } else {
        throw ConfigError("lam: unknown activation '" + act + "'");
    }
    const std::string init = get_string(obj, "final_weight_init", "lam");
    if (init == "zeros") {
        config.final_weight_init = FinalWeightInit::Zeros;
    } else if (init == "glorot") {
        config.final_weight_init = FinalWeightInit::Glorot;
    } else {
        throw ConfigError("lam: unknown final_weight_init '" + init + "'");
    }
    config.final_bias_init = get_double(obj, "final_bias_init", "lam");
    config.validate();
    return config;
}

json encoder_to_json(const EncoderConfig& config) {
    json obj{{"n_layers", config.n_layers},
             {"d_model", config.d_model},
             {"n_heads", config.n_heads},
             {"ffn_hidden", config.ffn_hidden},
             {"max_seq_len", config.max_seq_len},
             {"n_classes", config.n_classes},
             {"d_in", config.d_in},
             {"strategy", strategy_name(config.strategy.kind)},
             {"fusion", fusion_mode_name(config.fusion)},
             {"seed", config.seed}};
    if (config.strategy.kind == StrategyKind::ParamMatchedControl) {
        obj["extra_hidden_dims"] = config.strategy.extra_hidden_dims;
    }
    if (config.lam.has_value()) obj["lam"] = lam_config_to_json(*config.lam);
    return obj;
}

EncoderConfig encoder_from_json(const json& obj) {
    reject_unknown_keys(obj,
                        {"n_layers", "d_model", "n_heads", "ffn_hidden", "max_seq_len",
                         "n_classes", "d_in", "strategy", "fusion", "seed", "lam",
                         "extra_hidden_dims"},
                        "encoder");
    EncoderConfig config;
    config.n_layers = get_size(obj, "n_layers", "encoder");
    config.d_model = get_size(obj, "d_model", "encoder");
    config.n_heads = get_size(obj, "n_heads", "encoder");
    config.ffn_hidden = get_size(obj, "ffn_hidden", "encoder");
    config.max_seq_len = get_size(obj, "max_seq_len", "encoder");
    config.n_classes = get_size(obj, "n_classes", "encoder");
    config.d_in = get_size(obj, "d_in", "encoder");
    config.strategy.kind = strategy_from_name(get_string(obj, "strategy", "encoder"));
    config.fusion = fusion_mode_from_name(get_string(obj, "fusion", "encoder"));
    config.seed = get_seed(obj, "encoder");
    if (auto it = obj.find("extra_hidden_dims"); it != obj.end()) {
        if (config.strategy.kind != StrategyKind::ParamMatchedControl) {
            throw ConfigError("encoder: extra_hidden_dims only apply to param_matched_control");
        }
        for (const json& w : *it) config.strategy.extra_hidden_dims.push_back(w.get<std::size_t>());
    }
    if (auto it = obj.find("lam"); it != obj.end()) {
        config.lam = lam_config_from_json(*it);
    }
    config.validate();
    return config;
}

}  // namespace detail

RunConfig parse_run_config_json(const std::string& text) {
    detail::json root;
    try {
        root = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    detail::reject_unknown_keys(root, {"task", "train", "encoder"}, "config");
    RunConfig config;
    config.task = detail::task_from_json(detail::require_key(root, "task", "config"));
    config.train = detail::train_from_json(detail::require_key(root, "train", "config"));
    config.encoder = detail::encoder_from_json(detail::require_key(root, "encoder", "config"));
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config_json(buffer.str());
}

std::string run_config_to_json(const RunConfig& config) {
    detail::json root{{"task", detail::task_to_json(config.task)},
                      {"train", detail::train_to_json(config.train)},
                      {"encoder", detail::encoder_to_json(config.encoder)}};
    return root.dump(2) + "\n";
}

RunConfig default_run_config() {
    RunConfig config;
    config.task = TaskSpec{16, 16, 8, 4, 1.0, 1};
    config.train = TrainConfig{1e-3, 30, 32, 2000, 500, 1};
    EncoderConfig enc;
    enc.n_layers = 2;
    enc.d_model = 32;
    enc.n_heads = 4;
    enc.ffn_hidden = 64;
    enc.max_seq_len = 32;
    enc.n_classes = 2;
    enc.d_in = 8;
    enc.strategy = MaskStrategy{StrategyKind::MultiLayerLam, {}};
    enc.fusion = FusionMode::Multiply;
    LamConfig lam;
    lam.depth_L = 2;
    lam.input_dim = 32;
    lam.hidden_dims = {32};
    lam.max_seq_len = 32;
    lam.activation = LamActivation::Relu;
    lam.final_weight_init = FinalWeightInit::Zeros;
    lam.final_bias_init = 1.0;
    enc.lam = lam;
    enc.seed = 1;
    config.encoder = enc;
    return config;
}

}  // namespace lam
