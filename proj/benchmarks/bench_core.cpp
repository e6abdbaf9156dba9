#include <benchmark/benchmark.h>

#include "lam/config.hpp"
#include "lam/optim.hpp"
#include "lam/train.hpp"

namespace {

using namespace lam;

void BM_MatmulForward(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Prng prng(1);
    const Tensor a = rand_uniform(prng, {n, n}, -1.0, 1.0);
    const Tensor b = rand_uniform(prng, {n, n}, -1.0, 1.0);
    for (auto _ : state) {
        Tensor c = matmul(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_MatmulForward)->Arg(8)->Arg(32)->Arg(128);

void BM_MatmulBackward(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Prng prng(1);
    Tensor a = rand_uniform(prng, {n, n}, -1.0, 1.0);
    Tensor b = rand_uniform(prng, {n, n}, -1.0, 1.0);
    a.set_requires_grad(true);
    b.set_requires_grad(true);
    for (auto _ : state) {
        Graph graph;
        graph.backward(sum(matmul(a, b)));
        benchmark::DoNotOptimize(a.grad().data());
    }
    state.SetItemsProcessed(state.iterations() * 3 * n * n * n);
}
BENCHMARK(BM_MatmulBackward)->Arg(8)->Arg(32);

void BM_SoftmaxRows(benchmark::State& state) {
    Prng prng(2);
    const Tensor x = rand_uniform(prng, {32, 32}, -5.0, 5.0);
    for (auto _ : state) {
        Tensor y = softmax_rows(x);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_SoftmaxRows);

void BM_LamForwardSelf(benchmark::State& state) {
    LamConfig config;
    config.depth_L = static_cast<std::size_t>(state.range(0));
    config.input_dim = 32;
    config.hidden_dims.assign(config.depth_L - 1, 32);
    config.max_seq_len = 32;
    config.final_weight_init = FinalWeightInit::Glorot;
    Prng prng(3);
    const LamModule module(config, prng);
    const Tensor tokens = rand_uniform(prng, {32, 32}, -1.0, 1.0);
    for (auto _ : state) {
        Mask mask = module.forward_self(tokens);
        benchmark::DoNotOptimize(mask.values.data());
    }
}
BENCHMARK(BM_LamForwardSelf)->Arg(1)->Arg(2)->Arg(8);

void BM_MhaForward(benchmark::State& state) {
    Prng prng(4);
    const MhaLayer layer(MhaConfig{32, 4}, prng);
    const Tensor x = rand_uniform(prng, {32, 32}, -1.0, 1.0);
    const Mask mask{Tensor::ones({32, 32}), MaskKind::SelfAttention};
    for (auto _ : state) {
        auto out = layer.forward(x, mask, FusionMode::Multiply, false);
        benchmark::DoNotOptimize(out.first.data());
    }
}
BENCHMARK(BM_MhaForward);

void BM_EncoderForward(benchmark::State& state) {
    const RunConfig config = default_run_config();
    const Encoder encoder(config.encoder);
    Prng prng(5);
    const Tensor tokens = rand_uniform(prng, {32, 8}, -1.0, 1.0);
    for (auto _ : state) {
        EncoderForward out = encoder.forward(tokens, false);
        benchmark::DoNotOptimize(out.logits.data());
    }
}
BENCHMARK(BM_EncoderForward);

void BM_EncoderTrainStep(benchmark::State& state) {
    const RunConfig config = default_run_config();
    Encoder encoder(config.encoder);
    Adam adam(encoder.params(), AdamConfig{.lr = 1e-3});
    Prng data_rng(config.task.seed);
    const std::vector<Sample> batch = gen_dataset(config.task, data_rng, 32);
    for (auto _ : state) {
        Graph graph;
        std::vector<Tensor> rows;
        std::vector<std::size_t> labels;
        for (const Sample& s : batch) {
            rows.push_back(encoder.forward(s.tokens, false).logits);
            labels.push_back(static_cast<std::size_t>(s.label));
        }
        Tensor loss = cross_entropy_logits(stack_rows(rows), labels);
        graph.backward(loss);
        adam.step();
        benchmark::DoNotOptimize(loss.value());
    }
    state.SetItemsProcessed(state.iterations() * batch.size());
}
BENCHMARK(BM_EncoderTrainStep);

}  // namespace

BENCHMARK_MAIN();
