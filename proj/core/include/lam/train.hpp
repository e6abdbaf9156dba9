#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lam/encoder.hpp"
#include "lam/stats.hpp"
#include "lam/task.hpp"

namespace lam {

struct TrainConfig {
    double lr = 1e-3;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::size_t n_train = 2000;
    std::size_t n_eval = 500;
    std::uint64_t seed = 1;

    void validate() const;
};

/// One training/evaluation run. Masks and attention records come from a
/// fixed probe batch (the first eval samples) after training. seconds is
/// wall clock and is the one non-deterministic field.
struct RunResult {
    double train_acc = 0.0;
    double eval_acc = 0.0;
    double initial_loss = 0.0;
    std::vector<double> loss_curve;  // mean batch loss per epoch
    std::vector<std::vector<Mask>> probe_masks;  // [probe sample][layer]
    std::vector<std::vector<std::size_t>> probe_positions;  // informative positions per probe sample
    std::vector<std::vector<AttentionRecord>> probe_records;  // [probe sample][layer]
    DistributionStats attention_stats;
    std::vector<double> informative_mass_per_layer;  // mean over probe samples; empty when maskless
    std::size_t param_count = 0;
    double seconds = 0.0;
    TaskSpec task;
    TrainConfig train_config;
    EncoderConfig encoder_config;
};

constexpr std::size_t kProbeBatchSize = 8;
constexpr double kNearZeroEpsilon = 0.01;
constexpr std::size_t kHistogramBins = 50;

/// Mini-batch Adam on cross-entropy over the planted-token task; fully
/// deterministic under the three seeds (task, encoder, train).
RunResult train(const EncoderConfig& encoder_config, const TaskSpec& task,
                const TrainConfig& train_config);

double dataset_accuracy(const Encoder& encoder, const std::vector<Sample>& samples);
double dataset_loss(const Encoder& encoder, const std::vector<Sample>& samples);

struct AblationRow {
    std::string arm;
    std::uint64_t seed = 0;
    std::size_t param_count = 0;
    double train_acc = 0.0;
    double eval_acc = 0.0;
    double fraction_below = 0.0;
    double skewness = 0.0;
    double seconds = 0.0;
};

struct AblationTable {
    std::vector<AblationRow> rows;
    std::vector<RunResult> results;  // aligned with rows
};

inline const std::vector<std::uint64_t> kDefaultSeeds = {1, 2, 3, 4, 5};

/// Mask-strategy comparison in the order: full attention, static learnable
/// mask, global LAM, multi-layer LAM. Every arm shares its seed's dataset.
AblationTable ablate_strategies(const TaskSpec& task, const TrainConfig& train_config,
                                const EncoderConfig& base,
                                const std::vector<std::uint64_t>& seeds = kDefaultSeeds);

/// LAM depth sweep x fusion mode {multiply, add}. Depth 1 uses the
/// single-linear-layer variant (no activation); deeper stacks use ReLU with
/// hidden widths equal to d_model.
AblationTable ablate_depth(const TaskSpec& task, const TrainConfig& train_config,
                           const EncoderConfig& base,
                           const std::vector<std::size_t>& depths = {1, 2, 4, 8, 16, 32},
                           const std::vector<std::uint64_t>& seeds = kDefaultSeeds);

/// Multi-layer LAM under multiply vs add fusion, each with the
/// fusion-appropriate identity initialization (final bias 1.0 / 0.0). Both
/// arms are checked against their full-attention twin before training.
AblationTable ablate_fusion(const TaskSpec& task, const TrainConfig& train_config,
                            const EncoderConfig& base,
                            const std::vector<std::uint64_t>& seeds = kDefaultSeeds);

/// Full attention vs multi-layer LAM vs the parameter-matched control.
AblationTable ablate_params(const TaskSpec& task, const TrainConfig& train_config,
                            const EncoderConfig& base,
                            const std::vector<std::uint64_t>& seeds = kDefaultSeeds);

/// Applies a strategy/fusion pair to a base config, setting the
/// fusion-appropriate LAM identity initialization (bias 1 for multiply,
/// 0 for add) and dropping the lam config for maskless strategies.
EncoderConfig apply_strategy(EncoderConfig base, StrategyKind kind, FusionMode fusion);

}  // namespace lam
