// Acceptance suite: one line of PASS/FAIL per criterion, exit code equals the
// number of failed criteria. Criteria 6-9 share one set of training runs
// (full attention vs multi-layer LAM, seeds 1..5, desk-scale defaults).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lam/config.hpp"
#include "lam/gradcheck.hpp"
#include "lam/io.hpp"
#include "lam/optim.hpp"
#include "lam/train.hpp"

using namespace lam;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string name, double budget_seconds)
        : number_(number), name_(std::move(name)), budget_(budget_seconds),
          start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) problems_.push_back(detail);
        else passes_.push_back(detail);
    }

    void finish() {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (elapsed > budget_) {
            problems_.push_back("runtime " + std::to_string(elapsed) + " s exceeds budget " +
                                std::to_string(budget_) + " s");
        }
        const bool ok = problems_.empty();
        if (!ok) ++g_failures;
        std::printf("criterion %d [%s] %s (%.1f s)\n", number_, ok ? "PASS" : "FAIL",
                    name_.c_str(), elapsed);
        for (const std::string& p : passes_) std::printf("    ok: %s\n", p.c_str());
        for (const std::string& p : problems_) std::printf("    FAILED: %s\n", p.c_str());
        std::fflush(stdout);
    }

private:
    int number_;
    std::string name_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> problems_;
    std::vector<std::string> passes_;
};

bool equal_values(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        if (a.at(i) != b.at(i)) return false;
    }
    return true;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_gradient_oracle() {
    Criterion c(1, "gradient oracle on a 1-layer multi-layer-LAM encoder", 10.0);
    EncoderConfig config;
    config.n_layers = 1;
    config.d_model = 4;
    config.n_heads = 1;
    config.ffn_hidden = 4;
    config.max_seq_len = 4;
    config.n_classes = 2;
    config.d_in = 4;
    config.strategy = MaskStrategy{StrategyKind::MultiLayerLam, {}};
    config.fusion = FusionMode::Multiply;
    LamConfig lam_config;
    lam_config.depth_L = 2;
    lam_config.input_dim = 4;
    lam_config.hidden_dims = {4};
    lam_config.max_seq_len = 4;
    config.lam = lam_config;
    config.seed = 5;
    Encoder encoder(config);
    Prng data(6);
    const Tensor tokens = rand_normal(data, {3, 4}, 0.0, 1.0);
    const double worst = compare_backward_to_fd(
        [&]() {
            return cross_entropy_logits(reshape(encoder.forward(tokens, false).logits, {1, 2}),
                                        {1});
        },
        encoder.params(), 1e-5);
    c.expect(worst <= 1e-5,
             "max relative error over all parameters = " + fmt(worst) + " (tolerance 1e-5)");
    c.finish();
}

EncoderConfig identity_config(StrategyKind kind, FusionMode fusion, std::uint64_t seed) {
    EncoderConfig config;
    config.n_layers = 2;
    config.d_model = 8;
    config.n_heads = 2;
    config.ffn_hidden = 16;
    config.max_seq_len = 8;
    config.n_classes = 2;
    config.d_in = 4;
    config.strategy = MaskStrategy{kind, {}};
    config.fusion = fusion;
    if (config.strategy.uses_lam()) {
        LamConfig lam_config;
        lam_config.depth_L = 2;
        lam_config.input_dim = 8;
        lam_config.hidden_dims = {8};
        lam_config.max_seq_len = 8;
        lam_config.final_weight_init = FinalWeightInit::Zeros;
        lam_config.final_bias_init = fusion == FusionMode::Add ? 0.0 : 1.0;
        config.lam = lam_config;
    }
    config.seed = seed;
    return config;
}

void criterion_2_identity_laws() {
    Criterion c(2, "identity laws: masked twins match full attention bitwise", 5.0);
    for (const FusionMode fusion : {FusionMode::Multiply, FusionMode::Add}) {
        const Encoder masked(identity_config(StrategyKind::MultiLayerLam, fusion, 21));
        const Encoder plain(identity_config(StrategyKind::FullAttention, FusionMode::None, 21));
        Prng data(22);
        bool all_equal = true;
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t seq_len = 1 + data.next_below(8);
            const Tensor tokens = rand_normal(data, {seq_len, 4}, 0.0, 1.0);
            all_equal = all_equal && equal_values(masked.forward(tokens, false).logits,
                                                  plain.forward(tokens, false).logits);
        }
        c.expect(all_equal, std::string(fusion == FusionMode::Multiply
                                            ? "multiply fusion with all-ones mask"
                                            : "add fusion with all-zeros mask") +
                                ": 10/10 inputs bitwise equal");
    }
    c.finish();
}

void criterion_3_normalization() {
    Criterion c(3, "softmax rows normalized for 1000 random fused triples", 30.0);
    Prng prng(33);
    MhaLayer layer(MhaConfig{8, 2}, prng);
    const FusionMode modes[] = {FusionMode::None, FusionMode::Multiply, FusionMode::Add};
    double worst_gap = 0.0;
    bool in_range = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t seq_len = 1 + prng.next_below(8);
        const Tensor x = rand_normal(prng, {seq_len, 8}, 0.0, 1.5);
        const FusionMode mode = modes[trial % 3];
        std::optional<Mask> mask;
        if (mode != FusionMode::None) {
            mask = Mask{rand_uniform(prng, {seq_len, seq_len}, -5.0, 5.0),
                        MaskKind::SelfAttention};
        }
        const auto [y, record] = layer.forward(x, mask, mode);
        for (const Tensor& w : record.weights) {
            for (std::size_t i = 0; i < w.rows(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < w.cols(); ++j) {
                    in_range = in_range && w.at(i, j) >= 0.0 && w.at(i, j) <= 1.0;
                    s += w.at(i, j);
                }
                worst_gap = std::max(worst_gap, std::fabs(s - 1.0));
            }
        }
    }
    c.expect(worst_gap <= 1e-12, "worst |row sum - 1| = " + fmt(worst_gap) + " (<= 1e-12)");
    c.expect(in_range, "all weights within [0, 1]");
    c.finish();
}

void criterion_4_shape_and_strategy_contracts() {
    Criterion c(4, "shape and mask-strategy contracts", 10.0);
    {
        LamConfig config;
        config.depth_L = 2;
        config.input_dim = 6;
        config.hidden_dims = {6};
        config.max_seq_len = 16;
        config.final_weight_init = FinalWeightInit::Glorot;
        Prng prng(41);
        const LamModule module(config, prng);
        Prng data(42);
        bool shapes_ok = true;
        for (std::size_t seq_len = 1; seq_len <= 16; ++seq_len) {
            const Mask mask = module.forward_self(rand_normal(data, {seq_len, 6}, 0.0, 1.0));
            shapes_ok = shapes_ok && mask.rows() == seq_len && mask.cols() == seq_len;
        }
        c.expect(shapes_ok, "forward_self emits exactly L_t x L_t for L_t in 1..16");
    }
    {
        const Encoder enc(identity_config(StrategyKind::GlobalLam, FusionMode::Multiply, 43));
        Prng data(44);
        const EncoderForward out = enc.forward(rand_normal(data, {8, 4}, 0.0, 1.0), false);
        bool reused = out.masks.size() == 2;
        for (std::size_t i = 1; i < out.masks.size(); ++i) {
            reused = reused && out.masks[0].values.same_storage(out.masks[i].values);
        }
        c.expect(reused, "global LAM computes one mask and reuses it at every layer");
    }
    {
        EncoderConfig config = identity_config(StrategyKind::MultiLayerLam, FusionMode::Multiply, 45);
        config.n_layers = 3;
        Encoder enc(config);
        Prng data(46);
        const Tensor tokens = rand_normal(data, {6, 4}, 0.0, 1.0);
        Adam adam(enc.params(), AdamConfig{.lr = 0.05});
        {
            Graph graph;
            graph.backward(
                cross_entropy_logits(reshape(enc.forward(tokens, false).logits, {1, 2}), {0}));
            adam.step();
        }
        const EncoderForward out = enc.forward(tokens, false);
        bool distinct = out.masks.size() == 3;
        for (std::size_t i = 0; i < out.masks.size() && distinct; ++i) {
            for (std::size_t j = i + 1; j < out.masks.size(); ++j) {
                double diff = 0.0;
                for (std::size_t e = 0; e < out.masks[i].values.numel(); ++e) {
                    diff += std::fabs(out.masks[i].values.at(e) - out.masks[j].values.at(e));
                }
                distinct = distinct && diff > 0.0;
            }
        }
        c.expect(distinct, "multi-layer LAM emits n_layers distinct masks after one step");
    }
    c.finish();
}

void criterion_5_param_matching() {
    Criterion c(5, "parameter-matched control within 1% and trainable", 180.0);
    const RunConfig base = default_run_config();
    const MatchReport report = match_params(base.encoder, 0.01);
    c.expect(report.within_tolerance,
             "relative parameter gap = " + fmt(report.relative_gap) + " (<= 0.01)");
    const std::size_t recount = Encoder(report.control).param_count_total();
    c.expect(recount == report.control_params,
             "independent recount: " + std::to_string(recount) + " == " +
                 std::to_string(report.control_params));
    const RunResult run = train(report.control, base.task, base.train);
    c.expect(run.eval_acc >= 0.0 && run.eval_acc <= 1.0 &&
                 run.loss_curve.size() == base.train.epochs,
             "control trained to completion (eval_acc " + fmt(run.eval_acc) + ")");
    c.finish();
}

struct PairedRuns {
    std::vector<RunResult> full_attention;   // seeds 1..5
    std::vector<RunResult> multi_layer_lam;  // seeds 1..5
    double seconds = 0.0;
};

PairedRuns run_comparison(const RunConfig& base) {
    PairedRuns runs;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TaskSpec task = base.task;
        task.seed = seed;
        TrainConfig tc = base.train;
        tc.seed = seed;
        EncoderConfig fa = apply_strategy(base.encoder, StrategyKind::FullAttention, FusionMode::None);
        EncoderConfig ml =
            apply_strategy(base.encoder, StrategyKind::MultiLayerLam, FusionMode::Multiply);
        fa.seed = seed;
        ml.seed = seed;
        runs.full_attention.push_back(train(fa, task, tc));
        runs.multi_layer_lam.push_back(train(ml, task, tc));
    }
    runs.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return runs;
}

void criterion_6_directional_gain(const PairedRuns& runs) {
    Criterion c(6, "directional multimodal gain over 5 seeds", 900.0);
    double mean_fa = 0.0, mean_ml = 0.0;
    int wins = 0;
    std::string detail;
    for (std::size_t i = 0; i < 5; ++i) {
        const double fa = runs.full_attention[i].eval_acc;
        const double ml = runs.multi_layer_lam[i].eval_acc;
        mean_fa += fa / 5.0;
        mean_ml += ml / 5.0;
        if (ml > fa) ++wins;
        detail += "s" + std::to_string(i + 1) + ":" + fmt(ml) + "/" + fmt(fa) + " ";
    }
    c.expect(runs.seconds <= 900.0,
             "all 10 runs took " + fmt(runs.seconds) + " s (< 15 min)");
    c.expect(mean_ml >= mean_fa - 0.01, "mean eval acc: LAM " + fmt(mean_ml) + " vs full " +
                                            fmt(mean_fa) + " (LAM >= full - 0.01)");
    c.expect(wins >= 3, "LAM strictly ahead in " + std::to_string(wins) + "/5 seeds (LAM/full: " +
                            detail + ")");
    c.finish();
}

void criterion_7_sparsification(const PairedRuns& runs) {
    Criterion c(7, "attention sparsification: more near-zero weights with LAM", 60.0);
    int wins = 0;
    std::string detail;
    for (std::size_t i = 0; i < 5; ++i) {
        const double fa = runs.full_attention[i].attention_stats.fraction_below;
        const double ml = runs.multi_layer_lam[i].attention_stats.fraction_below;
        if (ml > fa) ++wins;
        detail += "s" + std::to_string(i + 1) + ":" + fmt(ml) + "/" + fmt(fa) + " ";
    }
    c.expect(wins >= 3, "fraction_below(0.01) higher with LAM in " + std::to_string(wins) +
                            "/5 seeds (LAM/full: " + detail + ")");
    c.finish();
}

void criterion_8_mask_selectivity(const PairedRuns& runs) {
    Criterion c(8, "mask selectivity: informative mass ratio above 1", 60.0);
    int wins = 0;
    std::string detail;
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& mass = runs.multi_layer_lam[i].informative_mass_per_layer;
        double avg = 0.0;
        for (double m : mass) avg += m;
        avg = mass.empty() ? 0.0 : avg / static_cast<double>(mass.size());
        if (avg > 1.0) ++wins;
        detail += "s" + std::to_string(i + 1) + ":" + fmt(avg) + " ";
    }
    c.expect(wins >= 3, "layer-averaged informative mass > 1.0 in " + std::to_string(wins) +
                            "/5 seeds (" + detail + ")");
    c.finish();
}

void write_pass_artifacts(const PairedRuns& runs, const std::filesystem::path& dir) {
    for (std::size_t i = 0; i < 5; ++i) {
        write_run_artifacts(runs.full_attention[i],
                            dir / ("full_attention_seed" + std::to_string(i + 1)),
                            /*include_timing=*/false);
        write_run_artifacts(runs.multi_layer_lam[i],
                            dir / ("multi_layer_lam_seed" + std::to_string(i + 1)),
                            /*include_timing=*/false);
    }
}

void criterion_9_determinism(const PairedRuns& first, const RunConfig& base) {
    Criterion c(9, "determinism: rerun reproduces artifacts byte for byte", 1200.0);
    const PairedRuns second = run_comparison(base);
    const std::filesystem::path root =
        std::filesystem::temp_directory_path() / "lam_acceptance_determinism";
    std::filesystem::remove_all(root);
    write_pass_artifacts(first, root / "pass1");
    write_pass_artifacts(second, root / "pass2");
    std::size_t files = 0;
    bool all_equal = true;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root / "pass1")) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const std::filesystem::path rel = std::filesystem::relative(entry.path(), root / "pass1");
        std::ifstream fa(entry.path(), std::ios::binary);
        std::ifstream fb(root / "pass2" / rel, std::ios::binary);
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (!fb || sa.str() != sb.str() || sa.str().empty()) {
            all_equal = false;
            c.expect(false, "mismatch in " + rel.string());
        }
    }
    c.expect(files > 0 && all_equal,
             std::to_string(files) + " emitted CSV/JSON files identical across reruns "
             "(timing fields excluded from serialization)");
    std::filesystem::remove_all(root);
    c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int n) { return selected.empty() || selected.count(n) > 0; };

    if (wanted(1)) criterion_1_gradient_oracle();
    if (wanted(2)) criterion_2_identity_laws();
    if (wanted(3)) criterion_3_normalization();
    if (wanted(4)) criterion_4_shape_and_strategy_contracts();
    if (wanted(5)) criterion_5_param_matching();

    if (wanted(6) || wanted(7) || wanted(8) || wanted(9)) {
        const RunConfig base = default_run_config();
        const PairedRuns runs = run_comparison(base);
        if (wanted(6)) criterion_6_directional_gain(runs);
        if (wanted(7)) criterion_7_sparsification(runs);
        if (wanted(8)) criterion_8_mask_selectivity(runs);
        if (wanted(9)) criterion_9_determinism(runs, base);
    }

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
    } else {
        std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    }
    return g_failures;
}
