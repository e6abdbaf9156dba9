#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lam/config.hpp"
#include "lam/io.hpp"
#include "lam/stats.hpp"
#include "lam/task.hpp"
#include "lam/train.hpp"

using namespace lam;

namespace {

bool equal_values(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        if (a.at(i) != b.at(i)) return false;
    }
    return true;
}

TaskSpec tiny_task(std::uint64_t seed = 1) {
    return TaskSpec{4, 4, 4, 2, 1.0, seed};
}

TrainConfig tiny_train(std::size_t epochs = 2, std::uint64_t seed = 1) {
    return TrainConfig{3e-3, epochs, 16, 64, 32, seed};
}

EncoderConfig tiny_encoder(std::uint64_t seed = 1) {
    EncoderConfig config;
    config.n_layers = 2;
    config.d_model = 8;
    config.n_heads = 2;
    config.ffn_hidden = 8;
    config.max_seq_len = 8;
    config.n_classes = 2;
    config.d_in = 4;
    config.strategy = MaskStrategy{StrategyKind::MultiLayerLam, {}};
    config.fusion = FusionMode::Multiply;
    LamConfig lam;
    lam.depth_L = 2;
    lam.input_dim = 8;
    lam.hidden_dims = {8};
    lam.max_seq_len = 8;
    config.lam = lam;
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("gen_dataset follows the planted-pair label rule for k=1") {
    TaskSpec spec{5, 5, 6, 1, 1.0, 42};
    Prng prng(spec.seed);
    const auto samples = gen_dataset(spec, prng, 200);
    for (const Sample& s : samples) {
        REQUIRE(s.informative_positions.size() == 2);
        const std::size_t pa = s.informative_positions[0];
        const std::size_t pb = s.informative_positions[1];
        REQUIRE(pa < spec.L_a);
        REQUIRE(pb >= spec.L_a);
        double dot = 0.0;
        for (std::size_t c = 0; c < spec.d_in; ++c) dot += s.tokens.at(pa, c) * s.tokens.at(pb, c);
        CHECK(s.label == (dot > 0.0 ? 1 : 0));
    }
}

TEST_CASE("gen_dataset determinism, balance and position bookkeeping") {
    const TaskSpec spec = tiny_task(7);
    Prng p1(spec.seed), p2(spec.seed);
    const auto a = gen_dataset(spec, p1, 50);
    const auto b = gen_dataset(spec, p2, 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].label == b[i].label);
        CHECK(equal_values(a[i].tokens, b[i].tokens));
        CHECK(a[i].informative_positions == b[i].informative_positions);
    }

    TaskSpec big = tiny_task(3);
    Prng prng(big.seed);
    const auto samples = gen_dataset(big, prng, 2000);
    std::size_t positives = 0;
    for (const Sample& s : samples) {
        positives += s.label;
        REQUIRE(s.informative_positions.size() == 2 * big.k);
        std::size_t in_a = 0;
        for (std::size_t p : s.informative_positions) in_a += p < big.L_a ? 1 : 0;
        CHECK(in_a == big.k);
    }
    const double balance = static_cast<double>(positives) / 2000.0;
    CHECK(std::fabs(balance - 0.5) <= 0.05);
}

TEST_CASE("gen_dataset degenerate spec executes") {
    TaskSpec spec{2, 2, 3, 2, 0.0, 5};
    Prng prng(spec.seed);
    const auto samples = gen_dataset(spec, prng, 10);
    for (const Sample& s : samples) {
        CHECK(s.informative_positions.size() == 4);  // every token informative
        CHECK(s.tokens.all_finite());
    }
    TaskSpec bad = spec;
    bad.k = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("train at epochs=0 sits at chance on balanced data") {
    TaskSpec task = tiny_task(11);
    TrainConfig train_config = tiny_train(0, 11);
    train_config.n_eval = 500;
    const RunResult result = train(tiny_encoder(11), task, train_config);
    CHECK(result.eval_acc >= 0.4);
    CHECK(result.eval_acc <= 0.6);
    CHECK(result.loss_curve.empty());
}

TEST_CASE("train is deterministic") {
    const RunResult a = train(tiny_encoder(2), tiny_task(2), tiny_train(2, 2));
    const RunResult b = train(tiny_encoder(2), tiny_task(2), tiny_train(2, 2));
    CHECK(a.train_acc == b.train_acc);
    CHECK(a.eval_acc == b.eval_acc);
    CHECK(a.initial_loss == b.initial_loss);
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(a.param_count == b.param_count);
    CHECK(a.attention_stats.fraction_below == b.attention_stats.fraction_below);
    CHECK(a.attention_stats.skewness == b.attention_stats.skewness);
    CHECK(a.attention_stats.counts == b.attention_stats.counts);
    CHECK(a.informative_mass_per_layer == b.informative_mass_per_layer);
    // Bytes must agree once timing is excluded.
    CHECK(run_result_to_json(a, false) == run_result_to_json(b, false));
}

TEST_CASE("train shows descent in the majority of seeds") {
    int descended = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const RunResult result = train(tiny_encoder(seed), tiny_task(seed), tiny_train(1, seed));
        REQUIRE(result.loss_curve.size() == 1);
        if (result.loss_curve[0] <= result.initial_loss) ++descended;
    }
    CHECK(descended >= 3);
}

TEST_CASE("train validates cross-config consistency up front") {
    TaskSpec task = tiny_task();
    task.d_in = 5;
    CHECK_THROWS_AS(train(tiny_encoder(), task, tiny_train()), ConfigError);
    TaskSpec longer = tiny_task();
    longer.L_a = 8;
    longer.L_b = 8;
    CHECK_THROWS_AS(train(tiny_encoder(), longer, tiny_train()), ConfigError);
}

TEST_CASE("ablate_strategies emits the four arms in paper order") {
    const std::vector<std::uint64_t> seeds = {1, 2};
    const AblationTable table =
        ablate_strategies(tiny_task(), tiny_train(1), tiny_encoder(), seeds);
    REQUIRE(table.rows.size() == 8);
    const std::vector<std::string> expect_arms = {"full_attention", "static_learnable",
                                                  "global_lam", "multi_layer_lam"};
    for (std::size_t arm = 0; arm < 4; ++arm) {
        for (std::size_t s = 0; s < 2; ++s) {
            const AblationRow& row = table.rows[arm * 2 + s];
            CHECK(row.arm == expect_arms[arm]);
            CHECK(row.seed == seeds[s]);
        }
    }
    // Identity-at-init: full attention and global LAM start from the same loss.
    CHECK(table.results[0].initial_loss == table.results[4].initial_loss);
    // Parameter monotonicity.
    CHECK(table.rows[6].param_count > table.rows[4].param_count);  // multi > global
    CHECK(table.rows[4].param_count > table.rows[0].param_count);  // global > full
}

TEST_CASE("ablate_depth covers the grid with the depth-1 variant") {
    const std::vector<std::uint64_t> seeds = {1};
    const AblationTable table =
        ablate_depth(tiny_task(), tiny_train(1), tiny_encoder(), {1, 2}, seeds);
    REQUIRE(table.rows.size() == 4);  // 2 depths x 2 fusions
    CHECK(table.rows[0].arm == "depth1_multiply");
    CHECK(table.rows[1].arm == "depth2_multiply");
    CHECK(table.rows[2].arm == "depth1_add");
    CHECK(table.rows[3].arm == "depth2_add");
    CHECK(table.results[0].encoder_config.lam->activation == LamActivation::None);
    CHECK(table.results[0].encoder_config.lam->depth_L == 1);
    CHECK(table.results[1].encoder_config.lam->activation == LamActivation::Relu);
    CHECK(table.rows[1].param_count > table.rows[0].param_count);
    CHECK(table.rows[3].param_count > table.rows[2].param_count);
}

TEST_CASE("ablate_fusion emits both arms from a shared identity start") {
    const std::vector<std::uint64_t> seeds = {1};
    const AblationTable table = ablate_fusion(tiny_task(), tiny_train(1), tiny_encoder(), seeds);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].arm == "multiply");
    CHECK(table.rows[1].arm == "add");
    CHECK(table.results[0].encoder_config.lam->final_bias_init == 1.0);
    CHECK(table.results[1].encoder_config.lam->final_bias_init == 0.0);
    // Same seed, both identity at init: identical datasets and initial loss.
    CHECK(table.results[0].initial_loss == table.results[1].initial_loss);
}

TEST_CASE("ablate_params matches the control to the lam model") {
    const std::vector<std::uint64_t> seeds = {1};
    const AblationTable table = ablate_params(tiny_task(), tiny_train(1), tiny_encoder(), seeds);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].arm == "full_attention");
    CHECK(table.rows[1].arm == "multi_layer_lam");
    CHECK(table.rows[2].arm == "param_matched_control");
    const double base = static_cast<double>(table.rows[1].param_count);
    const double control = static_cast<double>(table.rows[2].param_count);
    CHECK(std::fabs(control - base) / base <= 0.01);
    CHECK(table.rows[2].param_count > table.rows[0].param_count);
}

TEST_CASE("collect_attention_stats") {
    SUBCASE("counting example") {
        AttentionRecord rec;
        rec.weights.push_back(Tensor::from_values({3}, {0.0, 0.1, 0.9}));
        const DistributionStats stats = collect_attention_stats({rec}, 0.05, 10);
        CHECK(stats.fraction_below == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(stats.total_weights == 3);
    }
    SUBCASE("uniform attention is unskewed with nothing near zero") {
        AttentionRecord rec;
        rec.weights.push_back(Tensor::full({4, 4}, 0.25));
        const DistributionStats stats = collect_attention_stats({rec}, 0.01, 50);
        CHECK(stats.fraction_below == 0.0);
        CHECK(stats.skewness == 0.0);
    }
    SUBCASE("histogram conserves the weight count") {
        Prng prng(17);
        std::vector<AttentionRecord> records;
        for (int layer = 0; layer < 3; ++layer) {
            AttentionRecord rec;
            for (int head = 0; head < 2; ++head) {
                rec.weights.push_back(softmax_rows(rand_normal(prng, {5, 5}, 0.0, 2.0)));
            }
            records.push_back(std::move(rec));
        }
        const DistributionStats stats = collect_attention_stats(records, 0.01, 50);
        std::size_t total = 0;
        for (std::size_t c : stats.counts) total += c;
        CHECK(total == 3 * 2 * 5 * 5);
        CHECK(stats.total_weights == total);
    }
    SUBCASE("fraction_below is monotone in epsilon") {
        Prng prng(18);
        AttentionRecord rec;
        rec.weights.push_back(softmax_rows(rand_normal(prng, {6, 6}, 0.0, 3.0)));
        double previous = 0.0;
        for (const double eps : {0.001, 0.01, 0.1, 0.5, 0.9}) {
            const double f = collect_attention_stats({rec}, eps, 10).fraction_below;
            CHECK(f >= previous);
            previous = f;
        }
    }
    SUBCASE("contract errors") {
        CHECK_THROWS_AS(collect_attention_stats({}, 0.01, 50), ContractError);
        AttentionRecord rec;
        rec.weights.push_back(Tensor::full({2, 2}, 0.25));
        CHECK_THROWS_AS(collect_attention_stats({rec}, 0.0, 50), ContractError);
        CHECK_THROWS_AS(collect_attention_stats({rec}, 1.0, 50), ContractError);
        CHECK_THROWS_AS(collect_attention_stats({rec}, 0.01, 1), ContractError);
    }
}

TEST_CASE("informative_mass") {
    SUBCASE("constant mask gives exactly one") {
        const std::vector<Mask> masks = {{Tensor::full({4, 4}, 1.0), MaskKind::SelfAttention},
                                         {Tensor::full({4, 4}, 2.0), MaskKind::SelfAttention}};
        const auto ratios = informative_mass(masks, {0, 2});
        REQUIRE(ratios.size() == 2);
        CHECK(ratios[0] == 1.0);
        CHECK(ratios[1] == 1.0);
    }
    SUBCASE("doubled informative columns give exactly two") {
        Tensor values = Tensor::full({3, 4}, 1.0);
        for (std::size_t r = 0; r < 3; ++r) {
            values.set(r, 1, 2.0);
            values.set(r, 3, 2.0);
        }
        const auto ratios = informative_mass({{values, MaskKind::SelfAttention}}, {1, 3});
        CHECK(ratios[0] == 2.0);
    }
    SUBCASE("contract errors") {
        const std::vector<Mask> masks = {{Tensor::full({2, 2}, 1.0), MaskKind::SelfAttention}};
        CHECK_THROWS_AS(informative_mass(masks, {}), ContractError);
        CHECK_THROWS_AS(informative_mass(masks, {0, 1}), ContractError);
        CHECK_THROWS_AS(informative_mass(masks, {5}), IndexError);
    }
}

TEST_CASE("run config json round trip and strictness") {
    const RunConfig config = default_run_config();
    const std::string text = run_config_to_json(config);
    const RunConfig back = parse_run_config_json(text);
    CHECK(back.task.L_a == config.task.L_a);
    CHECK(back.train.epochs == config.train.epochs);
    CHECK(back.encoder.d_model == config.encoder.d_model);
    CHECK(back.encoder.strategy.kind == config.encoder.strategy.kind);
    CHECK(back.encoder.lam->depth_L == config.encoder.lam->depth_L);
    CHECK(run_config_to_json(back) == text);

    SUBCASE("unknown keys are rejected at every level") {
        std::string bad = text;
        bad.replace(bad.find("\"L_a\""), 5, "\"L_x\"");
        CHECK_THROWS_AS(parse_run_config_json(bad), ConfigError);
        CHECK_THROWS_WITH_AS(parse_run_config_json("{\"task\":{},\"train\":{},\"encoder\":{},\"x\":1}"),
                             "config: unknown key 'x'", ConfigError);
    }
    SUBCASE("missing keys are named") {
        CHECK_THROWS_WITH_AS(parse_run_config_json("{\"train\":{},\"encoder\":{}}"),
                             "config: missing key 'task'", ConfigError);
    }
    SUBCASE("invalid JSON is a config error") {
        CHECK_THROWS_AS(parse_run_config_json("{nope"), ConfigError);
    }
    SUBCASE("strategy/fusion consistency is enforced on parse") {
        std::string bad = text;
        bad.replace(bad.find("\"multiply\""), 10, "\"none\"");
        CHECK_THROWS_AS(parse_run_config_json(bad), ConfigError);
    }
}

TEST_CASE("ablation csv format") {
    AblationRow row{"full_attention", 3, 1234, 0.75, 0.5, 0.125, -0.25, 1.5};
    const std::string csv = ablation_to_csv({row});
    CHECK(csv ==
          "arm,seed,param_count,train_acc,eval_acc,fraction_below,skewness,seconds\n"
          "full_attention,3,1234,0.75,0.5,0.125,-0.25,1.5\n");
    const std::string no_timing = ablation_to_csv({row}, false);
    CHECK(no_timing.find(",0\n") != std::string::npos);
}

TEST_CASE("attention records round trip through json") {
    Prng prng(19);
    std::vector<std::vector<AttentionRecord>> per_sample(2);
    for (auto& layers : per_sample) {
        for (int layer = 0; layer < 2; ++layer) {
            AttentionRecord rec;
            rec.weights.push_back(softmax_rows(rand_normal(prng, {3, 3}, 0.0, 1.0)));
            rec.weights.push_back(softmax_rows(rand_normal(prng, {3, 3}, 0.0, 1.0)));
            layers.push_back(std::move(rec));
        }
    }
    const std::string text = records_to_json(per_sample);
    const std::vector<AttentionRecord> flat = records_from_json(text);
    REQUIRE(flat.size() == 4);
    CHECK(equal_values(flat[0].weights[0], per_sample[0][0].weights[0]));
    CHECK(equal_values(flat[3].weights[1], per_sample[1][1].weights[1]));
    // Parsed records feed the stats pipeline.
    const DistributionStats stats = collect_attention_stats(flat, 0.01, 20);
    CHECK(stats.total_weights == 4 * 2 * 9);
}

TEST_CASE("write_run_artifacts emits deterministic files") {
    const std::filesystem::path dir_a = std::filesystem::temp_directory_path() / "lam_run_a";
    const std::filesystem::path dir_b = std::filesystem::temp_directory_path() / "lam_run_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    const RunResult r1 = train(tiny_encoder(3), tiny_task(3), tiny_train(1, 3));
    const RunResult r2 = train(tiny_encoder(3), tiny_task(3), tiny_train(1, 3));
    write_run_artifacts(r1, dir_a, /*include_timing=*/false);
    write_run_artifacts(r2, dir_b, /*include_timing=*/false);
    for (const std::string name : {"result.json", "attention_hist.csv", "records.json",
                                   "masks/layer_0.csv", "masks/layer_1.csv"}) {
        std::ifstream fa(dir_a / name), fb(dir_b / name);
        REQUIRE(fa.good());
        REQUIRE(fb.good());
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        CHECK(sa.str() == sb.str());
        CHECK(!sa.str().empty());
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}
