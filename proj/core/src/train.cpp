#include "lam/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lam/gradcheck.hpp"
#include "lam/optim.hpp"

namespace lam {

void TrainConfig::validate() const {
    // epochs == 0 is a legal no-training evaluation run.
    if (lr <= 0.0) throw ConfigError("train: lr must be positive");
    if (batch_size < 1 || n_train < 1 || n_eval < 1) {
        throw ConfigError("train: batch_size, n_train, n_eval must be positive");
    }
}

namespace {

std::size_t argmax_label(const Tensor& logits) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.numel(); ++j) {
        if (logits.at(j) > logits.at(best)) best = j;
    }
    return best;
}

}  // namespace

double dataset_accuracy(const Encoder& encoder, const std::vector<Sample>& samples) {
    std::size_t hits = 0;
    for (const Sample& s : samples) {
        const EncoderForward out = encoder.forward(s.tokens, /*capture_records=*/false);
        if (argmax_label(out.logits) == static_cast<std::size_t>(s.label)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double dataset_loss(const Encoder& encoder, const std::vector<Sample>& samples) {
    double total = 0.0;
    for (const Sample& s : samples) {
        const EncoderForward out = encoder.forward(s.tokens, /*capture_records=*/false);
        Tensor row = reshape(out.logits, {1, out.logits.numel()});
        total += cross_entropy_logits(row, {static_cast<std::size_t>(s.label)}).value();
    }
    return total / static_cast<double>(samples.size());
}

RunResult train(const EncoderConfig& encoder_config, const TaskSpec& task,
                const TrainConfig& train_config) {
    const auto t_start = std::chrono::steady_clock::now();
    encoder_config.validate();
    task.validate();
    train_config.validate();
    if (encoder_config.max_seq_len < task.seq_len()) {
        throw ConfigError("train: encoder max_seq_len " + std::to_string(encoder_config.max_seq_len) +
                          " is smaller than task sequence length " + std::to_string(task.seq_len()));
    }
    if (encoder_config.d_in != task.d_in) {
        throw ConfigError("train: encoder d_in " + std::to_string(encoder_config.d_in) +
                          " does not match task d_in " + std::to_string(task.d_in));
    }

    Prng data_rng(task.seed);
    const std::vector<Sample> train_set = gen_dataset(task, data_rng, train_config.n_train);
    const std::vector<Sample> eval_set = gen_dataset(task, data_rng, train_config.n_eval);

    Prng init_rng(encoder_config.seed);
    Encoder encoder(encoder_config, init_rng);

    RunResult result;
    result.task = task;
    result.train_config = train_config;
    result.encoder_config = encoder_config;
    result.param_count = encoder.param_count_total();
    result.initial_loss = dataset_loss(encoder, train_set);

    Adam optimizer(encoder.params(), AdamConfig{.lr = train_config.lr});
    Prng shuffle_rng(train_config.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_below(i));
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += train_config.batch_size) {
            const std::size_t end = std::min(order.size(), start + train_config.batch_size);
            Graph graph;
            std::vector<Tensor> logit_rows;
            std::vector<std::size_t> labels;
            logit_rows.reserve(end - start);
            labels.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const Sample& s = train_set[order[i]];
                logit_rows.push_back(encoder.forward(s.tokens, /*capture_records=*/false).logits);
                labels.push_back(static_cast<std::size_t>(s.label));
            }
            Tensor loss = cross_entropy_logits(stack_rows(logit_rows), labels);
            graph.backward(loss);
            optimizer.step();
            epoch_loss += loss.value();
            ++batches;
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(batches));
    }

    result.train_acc = dataset_accuracy(encoder, train_set);
    result.eval_acc = dataset_accuracy(encoder, eval_set);

    // Probe batch: fixed slice of the eval split.
    const std::size_t probe_n = std::min(kProbeBatchSize, eval_set.size());
    std::vector<AttentionRecord> all_records;
    std::vector<double> mass_sums;
    std::size_t mass_samples = 0;
    for (std::size_t i = 0; i < probe_n; ++i) {
        const Sample& s = eval_set[i];
        EncoderForward out = encoder.forward(s.tokens, /*capture_records=*/true);
        for (const AttentionRecord& rec : out.records) all_records.push_back(rec);
        result.probe_records.push_back(std::move(out.records));
        if (!out.masks.empty()) {
            std::vector<Mask> snapshots;
            snapshots.reserve(out.masks.size());
            for (const Mask& m : out.masks) snapshots.push_back(Mask{m.values.clone(), m.kind});
            const std::vector<double> mass = informative_mass(snapshots, s.informative_positions);
            if (mass_sums.empty()) mass_sums.assign(mass.size(), 0.0);
            for (std::size_t l = 0; l < mass.size(); ++l) mass_sums[l] += mass[l];
            ++mass_samples;
            result.probe_masks.push_back(std::move(snapshots));
            result.probe_positions.push_back(s.informative_positions);
        }
    }
    result.attention_stats = collect_attention_stats(all_records, kNearZeroEpsilon, kHistogramBins);
    if (mass_samples > 0) {
        for (double s : mass_sums) {
            result.informative_mass_per_layer.push_back(s / static_cast<double>(mass_samples));
        }
    }

    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

EncoderConfig apply_strategy(EncoderConfig base, StrategyKind kind, FusionMode fusion) {
    base.strategy = MaskStrategy{kind, {}};
    base.fusion = fusion;
    if (base.strategy.uses_lam()) {
        if (!base.lam.has_value()) {
            throw ConfigError("apply_strategy: base config carries no lam config");
        }
        base.lam->final_bias_init = fusion == FusionMode::Add ? 0.0 : 1.0;
    } else {
        base.lam.reset();
    }
    return base;
}

namespace {

AblationRow row_from_result(const std::string& arm, std::uint64_t seed, const RunResult& r) {
    return AblationRow{arm,        seed,       r.param_count,
                       r.train_acc, r.eval_acc, r.attention_stats.fraction_below,
                       r.attention_stats.skewness, r.seconds};
}

struct Arm {
    std::string name;
    EncoderConfig config;
};

AblationTable run_arms(const std::vector<Arm>& arms, const TaskSpec& task,
                       const TrainConfig& train_config, const std::vector<std::uint64_t>& seeds) {
    AblationTable table;
    for (const Arm& arm : arms) {
        for (std::uint64_t seed : seeds) {
            TaskSpec t = task;
            t.seed = seed;
            TrainConfig tc = train_config;
            tc.seed = seed;
            EncoderConfig ec = arm.config;
            ec.seed = seed;
            RunResult result = train(ec, t, tc);
            table.rows.push_back(row_from_result(arm.name, seed, result));
            table.results.push_back(std::move(result));
        }
    }
    return table;
}

}  // namespace

AblationTable ablate_strategies(const TaskSpec& task, const TrainConfig& train_config,
                                const EncoderConfig& base,
                                const std::vector<std::uint64_t>& seeds) {
    const std::vector<Arm> arms = {
        {"full_attention", apply_strategy(base, StrategyKind::FullAttention, FusionMode::None)},
        {"static_learnable", apply_strategy(base, StrategyKind::StaticLearnable, FusionMode::Multiply)},
        {"global_lam", apply_strategy(base, StrategyKind::GlobalLam, FusionMode::Multiply)},
        {"multi_layer_lam", apply_strategy(base, StrategyKind::MultiLayerLam, FusionMode::Multiply)},
    };
    return run_arms(arms, task, train_config, seeds);
}

AblationTable ablate_depth(const TaskSpec& task, const TrainConfig& train_config,
                           const EncoderConfig& base, const std::vector<std::size_t>& depths,
                           const std::vector<std::uint64_t>& seeds) {
    std::vector<Arm> arms;
    for (const FusionMode fusion : {FusionMode::Multiply, FusionMode::Add}) {
        for (std::size_t depth : depths) {
            EncoderConfig config = apply_strategy(base, StrategyKind::MultiLayerLam, fusion);
            LamConfig lam = *config.lam;
            lam.depth_L = depth;
            lam.hidden_dims.assign(depth - 1, config.d_model);
            lam.activation = depth == 1 ? LamActivation::None : LamActivation::Relu;
            config.lam = lam;
            arms.push_back({"depth" + std::to_string(depth) + "_" + fusion_mode_name(fusion),
                            std::move(config)});
        }
    }
    return run_arms(arms, task, train_config, seeds);
}

AblationTable ablate_fusion(const TaskSpec& task, const TrainConfig& train_config,
                            const EncoderConfig& base, const std::vector<std::uint64_t>& seeds) {
    std::vector<Arm> arms;
    for (const FusionMode fusion : {FusionMode::Multiply, FusionMode::Add}) {
        EncoderConfig config = apply_strategy(base, StrategyKind::MultiLayerLam, fusion);
        // Identity-at-init equivalence against the full-attention twin.
        EncoderConfig twin = apply_strategy(base, StrategyKind::FullAttention, FusionMode::None);
        config.seed = seeds.empty() ? base.seed : seeds.front();
        twin.seed = config.seed;
        Encoder masked(config);
        Encoder plain(twin);
        Prng probe_rng(config.seed ^ 0x66757365ULL);
        Tensor probe = rand_normal(probe_rng, {std::min<std::size_t>(4, config.max_seq_len),
                                               config.d_in}, 0.0, 1.0);
        const Tensor a = masked.forward(probe, false).logits;
        const Tensor b = plain.forward(probe, false).logits;
        for (std::size_t i = 0; i < a.numel(); ++i) {
            if (a.at(i) != b.at(i)) {
                throw ContractError("ablate_fusion: " + fusion_mode_name(fusion) +
                                    " arm is not identity at init");
            }
        }
        arms.push_back({fusion_mode_name(fusion), std::move(config)});
    }
    return run_arms(arms, task, train_config, seeds);
}

AblationTable ablate_params(const TaskSpec& task, const TrainConfig& train_config,
                            const EncoderConfig& base, const std::vector<std::uint64_t>& seeds) {
    const EncoderConfig lam_config =
        apply_strategy(base, StrategyKind::MultiLayerLam, FusionMode::Multiply);
    const MatchReport report = match_params(lam_config);
    const std::vector<Arm> arms = {
        {"full_attention", apply_strategy(base, StrategyKind::FullAttention, FusionMode::None)},
        {"multi_layer_lam", lam_config},
        {"param_matched_control", report.control},
    };
    return run_arms(arms, task, train_config, seeds);
}

}  // namespace lam
