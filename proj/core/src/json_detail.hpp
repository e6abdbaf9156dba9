// Internal JSON converters shared by config.cpp and io.cpp. Not installed.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "lam/encoder.hpp"
#include "lam/task.hpp"
#include "lam/train.hpp"

namespace lam::detail {

using nlohmann::json;

/// Throws ConfigError when obj holds a key outside `allowed` or is not an
/// object at all.
void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& context);

/// Fetches a required key, with a ConfigError naming the context if absent.
const json& require_key(const json& obj, const std::string& key, const std::string& context);

json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const json& obj);

json train_to_json(const TrainConfig& config);
TrainConfig train_from_json(const json& obj);

json lam_config_to_json(const LamConfig& config);
LamConfig lam_config_from_json(const json& obj);

json encoder_to_json(const EncoderConfig& config);
EncoderConfig encoder_from_json(const json& obj);

}  // namespace lam::detail
