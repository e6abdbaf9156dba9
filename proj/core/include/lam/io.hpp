#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lam/encoder.hpp"
#include "lam/stats.hpp"
#include "lam/train.hpp"

namespace lam {

/// Shortest round-trip decimal form of a double (bit-exact on reload).
std::string format_double(double v);
double parse_double(const std::string& text);

// Tensor CSV: header row is the shape ("3,4"), then the row-major values;
// 2-D tensors take one line per matrix row, other ranks a single line.
std::string tensor_to_csv(const Tensor& t);
Tensor tensor_from_csv(const std::string& text);
void save_tensor_csv(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor_csv(const std::filesystem::path& path);

/// Plain rows x cols grid of comma-separated values, no header.
std::string mask_to_grid_csv(const Tensor& values);
/// {"rows": r, "cols": c, "values": [row-major]}
std::string mask_to_json(const Mask& mask);

// Attention records as JSON: an array over probe samples, each an array over
// layers, each an array over heads of post-softmax weight matrices
// (row-major nested arrays). records_from_json also accepts a single record
// set (the per-layer array) and returns the records flattened.
std::string records_to_json(const std::vector<std::vector<AttentionRecord>>& per_sample);
std::vector<AttentionRecord> records_from_json(const std::string& text);

std::string stats_to_json(const DistributionStats& stats);
/// Columns: bin_lo, bin_hi, count.
std::string histogram_to_csv(const DistributionStats& stats);

/// Columns: arm, seed, param_count, train_acc, eval_acc, fraction_below,
/// skewness, seconds. With include_timing false the seconds column holds 0
/// so the bytes are deterministic.
std::string ablation_to_csv(const std::vector<AblationRow>& rows, bool include_timing = true);

std::string run_result_to_json(const RunResult& result, bool include_timing = true);

/// Writes result.json, masks/layer_<i>.csv (mean over the probe batch),
/// attention_hist.csv and records.json under out_dir.
void write_run_artifacts(const RunResult& result, const std::filesystem::path& out_dir,
                         bool include_timing = true);

// Checkpointing: manifest.json (encoder config + seed + step) plus one CSV
// per named parameter under tensors/. Round-trips are exact at f64.
void save_checkpoint(const Encoder& encoder, std::uint64_t step,
                     const std::filesystem::path& dir);

struct Checkpoint {
    Encoder encoder;
    std::uint64_t step = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace lam
