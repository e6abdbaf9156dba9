// Command-line front end: grad-check, train, ablate, analyze.
//
// Exit codes: 0 success, 1 config error, 2 numeric-check failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lam/config.hpp"
#include "lam/gradcheck.hpp"
#include "lam/io.hpp"
#include "lam/optim.hpp"
#include "lam/train.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitNumericFailure = 2;
constexpr double kGradTolerance = 1e-5;

struct GradCheck {
    std::string name;
    double worst = 0.0;
};

std::vector<std::pair<std::size_t, std::size_t>> parse_dims(const std::vector<std::string>& specs) {
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    for (const std::string& s : specs) {
        const std::size_t x = s.find('x');
        if (x == std::string::npos || x == 0 || x + 1 == s.size()) {
            throw lam::ConfigError("grad-check: --dims expects RxC, got '" + s + "'");
        }
        dims.emplace_back(std::stoull(s.substr(0, x)), std::stoull(s.substr(x + 1)));
    }
    if (dims.empty()) dims = {{3, 4}, {2, 2}, {4, 3}};
    return dims;
}

std::vector<GradCheck> run_grad_checks(const std::vector<std::pair<std::size_t, std::size_t>>& dims) {
    using namespace lam;
    std::vector<GradCheck> checks;

    for (const auto& [m, n] : dims) {
        Prng prng(101 + m * 31 + n);
        Tensor a = rand_uniform(prng, {m, n}, -1.0, 1.0);
        Tensor b = rand_uniform(prng, {n, m}, -1.0, 1.0);
        Tensor c = rand_uniform(prng, {m, m}, -1.0, 1.0);
        Tensor row = rand_uniform(prng, {n}, -1.0, 1.0);
        Tensor gain = rand_uniform(prng, {n}, 0.5, 1.5);
        Tensor bias = rand_uniform(prng, {n}, -0.5, 0.5);
        for (Tensor* t : {&a, &b, &c, &row, &gain, &bias}) t->set_requires_grad(true);
        const std::string suffix = " " + std::to_string(m) + "x" + std::to_string(n);

        checks.push_back({"matmul/softmax/mul" + suffix, compare_backward_to_fd([&]() {
            return sum(mul(softmax_rows(matmul(a, b)), c));
        }, {a, b, c})});
        checks.push_back({"relu/broadcast/mean" + suffix, compare_backward_to_fd([&]() {
            return mean(relu(add(a, row)));
        }, {a, row})});
        checks.push_back({"layer_norm" + suffix, compare_backward_to_fd([&]() {
            return sum(mul(layer_norm_rows(a, gain, bias, 1e-6), a));
        }, {a, gain, bias})});
        checks.push_back({"transpose/slice/concat" + suffix, compare_backward_to_fd([&]() {
            const Tensor t = transpose(a);
            return sum(mul(concat_cols(slice_rows(t, 0, 1), slice_rows(t, n - 1, n)),
                           concat_cols(slice_rows(t, 0, 1), slice_rows(t, n - 1, n))));
        }, {a})});
        checks.push_back({"cross_entropy" + suffix, compare_backward_to_fd([&]() {
            return cross_entropy_logits(matmul(a, b), std::vector<std::size_t>(m, 0));
        }, {a, b})});
    }

    {
        Prng prng(7);
        LamConfig lam_config;
        lam_config.depth_L = 2;
        lam_config.input_dim = 3;
        lam_config.hidden_dims = {4};
        lam_config.max_seq_len = 4;
        lam_config.final_weight_init = FinalWeightInit::Glorot;
        LamModule module(lam_config, prng);
        Tensor tokens = rand_normal(prng, {3, 3}, 0.0, 1.0);
        tokens.set_requires_grad(true);
        std::vector<Tensor> params = {tokens};
        for (auto& [name, p] : module.named_params()) params.push_back(p);
        checks.push_back({"lam forward_self", compare_backward_to_fd([&]() {
            return sum(module.forward_self(tokens).values);
        }, params)});

        LamConfig cross_config = lam_config;
        cross_config.input_dim = 4;
        LamModule cross(cross_config, prng);
        Tensor scores = rand_normal(prng, {2, 3}, 0.0, 1.0);
        scores.set_requires_grad(true);
        std::vector<Tensor> cross_params = {scores};
        for (auto& [name, p] : cross.named_params()) cross_params.push_back(p);
        checks.push_back({"lam forward_cross", compare_backward_to_fd([&]() {
            return sum(cross.forward_cross(scores).values);
        }, cross_params)});
    }

    {
        Prng prng(9);
        MhaLayer layer(MhaConfig{4, 2}, prng);
        Tensor x = rand_normal(prng, {3, 4}, 0.0, 1.0);
        Tensor mask_values = rand_uniform(prng, {3, 3}, 0.5, 1.5);
        x.set_requires_grad(true);
        mask_values.set_requires_grad(true);
        std::vector<Tensor> params = {x, mask_values};
        for (auto& [name, p] : layer.named_params()) params.push_back(p);
        checks.push_back({"mha with multiply mask", compare_backward_to_fd([&]() {
            const Mask mask{mask_values, MaskKind::SelfAttention};
            return sum(layer.forward(x, mask, FusionMode::Multiply, false).first);
        }, params)});
    }

    {
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
        checks.push_back({"encoder end-to-end", compare_backward_to_fd([&]() {
            return cross_entropy_logits(reshape(encoder.forward(tokens, false).logits, {1, 2}), {1});
        }, encoder.params())});
    }
    return checks;
}

int cmd_grad_check(const std::vector<std::string>& dim_specs) {
    const auto checks = run_grad_checks(parse_dims(dim_specs));
    double worst = 0.0;
    bool failed = false;
    for (const GradCheck& check : checks) {
        const bool ok = check.worst <= kGradTolerance;
        failed = failed || !ok;
        std::printf("%-28s max_rel_err=%.3e %s\n", check.name.c_str(), check.worst,
                    ok ? "ok" : "FAIL");
        worst = std::max(worst, check.worst);
    }
    std::printf("worst relative error: %.3e (tolerance %.0e)\n", worst, kGradTolerance);
    return failed ? kExitNumericFailure : kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    const lam::RunConfig config = lam::load_run_config(config_path);
    const lam::RunResult result = lam::train(config.encoder, config.task, config.train);
    lam::write_run_artifacts(result, out_dir);
    std::printf("train_acc=%.4f eval_acc=%.4f param_count=%zu seconds=%.1f\n", result.train_acc,
                result.eval_acc, result.param_count, result.seconds);
    std::printf("artifacts written to %s\n", out_dir.c_str());
    return kExitOk;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
    if (spec.empty()) return lam::kDefaultSeeds;
    std::vector<std::uint64_t> seeds;
    std::stringstream in(spec);
    std::string part;
    while (std::getline(in, part, ',')) seeds.push_back(std::stoull(part));
    if (seeds.empty()) throw lam::ConfigError("ablate: --seeds is empty");
    return seeds;
}

int cmd_ablate(const std::string& kind, const std::string& config_path, const std::string& out_dir,
               const std::string& seed_spec) {
    const lam::RunConfig config = lam::load_run_config(config_path);
    const std::vector<std::uint64_t> seeds = parse_seeds(seed_spec);
    lam::AblationTable table;
    if (kind == "strategies") {
        table = lam::ablate_strategies(config.task, config.train, config.encoder, seeds);
    } else if (kind == "depth") {
        table = lam::ablate_depth(config.task, config.train, config.encoder, {1, 2, 4, 8, 16, 32},
                                  seeds);
    } else if (kind == "fusion") {
        table = lam::ablate_fusion(config.task, config.train, config.encoder, seeds);
    } else if (kind == "params") {
        table = lam::ablate_params(config.task, config.train, config.encoder, seeds);
    } else {
        throw lam::ConfigError("ablate: unknown kind '" + kind + "'");
    }
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "ablation.csv");
    csv << lam::ablation_to_csv(table.rows);
    csv.close();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const lam::AblationRow& row = table.rows[i];
        lam::write_run_artifacts(table.results[i],
                                 dir / (row.arm + "_seed" + std::to_string(row.seed)));
    }
    std::printf("%zu arms written to %s/ablation.csv\n", table.rows.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_analyze(const std::string& records_path, double epsilon, std::size_t bins,
                const std::string& out_path) {
    std::ifstream in(records_path);
    if (!in) throw lam::ConfigError("analyze: cannot open " + records_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::vector<lam::AttentionRecord> records = lam::records_from_json(buffer.str());
    const lam::DistributionStats stats = lam::collect_attention_stats(records, epsilon, bins);
    std::ofstream out(out_path);
    if (!out) throw lam::ConfigError("analyze: cannot write " + out_path);
    out << lam::stats_to_json(stats);
    std::printf("fraction_below(%g)=%.6f skewness=%.6f over %zu weights\n", epsilon,
                stats.fraction_below, stats.skewness, stats.total_weights);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learnable attention mask workbench"};
    app.require_subcommand(1);

    auto* grad = app.add_subcommand("grad-check", "verify autodiff against finite differences");
    std::vector<std::string> dim_specs;
    grad->add_option("--dims", dim_specs, "matrix sizes for the op battery, e.g. 3x4");

    auto* train_cmd = app.add_subcommand("train", "train one model from a JSON config");
    std::string config_path, out_dir = ".";
    train_cmd->add_option("--config", config_path, "JSON config path")->required();
    train_cmd->add_option("--out", out_dir, "output directory (default .)");

    auto* ablate = app.add_subcommand("ablate", "run an ablation grid");
    std::string kind, ablate_config, ablate_out = ".", seed_spec;
    ablate->add_option("--kind", kind, "strategies|depth|fusion|params")->required();
    ablate->add_option("--config", ablate_config, "JSON config path")->required();
    ablate->add_option("--out", ablate_out, "output directory (default .)");
    ablate->add_option("--seeds", seed_spec, "comma-separated seeds (default 1,2,3,4,5)");

    auto* analyze = app.add_subcommand("analyze", "attention-weight distribution stats");
    std::string records_path, stats_out = "stats.json";
    double epsilon = 0.01;
    std::size_t bins = 50;
    analyze->add_option("--records", records_path, "records.json path")->required();
    analyze->add_option("--epsilon", epsilon, "near-zero threshold (default 0.01)");
    analyze->add_option("--bins", bins, "histogram bins (default 50)");
    analyze->add_option("--out", stats_out, "output path (default stats.json)");

    try {
        app.parse(argc, argv);
        if (grad->parsed()) return cmd_grad_check(dim_specs);
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir);
        if (ablate->parsed()) return cmd_ablate(kind, ablate_config, ablate_out, seed_spec);
        if (analyze->parsed()) return cmd_analyze(records_path, epsilon, bins, stats_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    } catch (const lam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const lam::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
