#pragma once

#include <filesystem>
#include <string>

#include "lam/encoder.hpp"
#include "lam/task.hpp"
#include "lam/train.hpp"

namespace lam {

/// The CLI config file: three sections whose keys mirror the TaskSpec,
/// TrainConfig and EncoderConfig fields exactly. Unknown keys are rejected.
struct RunConfig {
    TaskSpec task;
    TrainConfig train;
    EncoderConfig encoder;
};

RunConfig parse_run_config_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

/// Desk-scale defaults: 16+16 tokens of width 8, k=4 planted pairs,
/// d_model=32 / 4 heads / 2 layers, multi-layer LAM with multiply fusion.
RunConfig default_run_config();

}  // namespace lam
