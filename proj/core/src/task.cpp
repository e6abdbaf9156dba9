#include "lam/task.hpp"

#include <algorithm>
#include <cmath>

#include "lam/ops.hpp"

namespace lam {

void TaskSpec::validate() const {
    if (L_a < 1 || L_b < 1) throw ConfigError("task: L_a and L_b must be >= 1");
    if (d_in < 1) throw ConfigError("task: d_in must be >= 1");
    if (k < 1 || k > std::min(L_a, L_b)) {
        throw ConfigError("task: k must lie in [1, min(L_a, L_b)], got " + std::to_string(k));
    }
    if (noise_sigma < 0.0) throw ConfigError("task: noise_sigma must be >= 0");
}

Tensor direction_pool(const TaskSpec& spec) {
    spec.validate();
    const std::size_t pool_size = std::max<std::size_t>(8, spec.k);
    Prng pool_rng(spec.seed ^ 0x706f6f6cULL);
    Tensor pool = rand_normal(pool_rng, {pool_size, spec.d_in}, 0.0, 1.0);
    for (std::size_t p = 0; p < pool_size; ++p) {
        double norm = 0.0;
        for (std::size_t j = 0; j < spec.d_in; ++j) norm += pool.at(p, j) * pool.at(p, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        for (std::size_t j = 0; j < spec.d_in; ++j) pool.set(p, j, pool.at(p, j) / norm);
    }
    return pool;
}

namespace {

// First k entries of a partial Fisher-Yates shuffle over [0, n).
std::vector<std::size_t> draw_distinct(Prng& prng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(prng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

std::vector<Sample> gen_dataset(const TaskSpec& spec, Prng& prng, std::size_t n) {
    spec.validate();
    const Tensor pool = direction_pool(spec);
    const std::size_t pool_size = pool.rows();
    const std::size_t seq_len = spec.seq_len();

    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        Sample sample;
        sample.tokens = Tensor::zeros({seq_len, spec.d_in});

        const auto pos_a = draw_distinct(prng, spec.L_a, spec.k);
        auto pos_b = draw_distinct(prng, spec.L_b, spec.k);
        for (std::size_t& p : pos_b) p += spec.L_a;
        const auto pool_pick = draw_distinct(prng, pool_size, spec.k);

        std::vector<bool> informative(seq_len, false);
        double score = 0.0;
        for (std::size_t j = 0; j < spec.k; ++j) {
            // The pair's relative orientation carries its sign; amplitude
            // magnitudes on both sides set its weight in the label sum.
            const double amp_a = prng.uniform(0.5, 1.5);
            const double amp_b =
                prng.uniform(0.5, 1.5) * (prng.next_double() < 0.5 ? -1.0 : 1.0);
            double dot = 0.0;
            for (std::size_t c = 0; c < spec.d_in; ++c) {
                const double u = pool.at(pool_pick[j], c);
                const double va = amp_a * u;
                const double vb = amp_b * u;
                sample.tokens.set(pos_a[j], c, va);
                sample.tokens.set(pos_b[j], c, vb);
                dot += va * vb;
            }
            score += dot;
            informative[pos_a[j]] = true;
            informative[pos_b[j]] = true;
        }
        sample.label = score > 0.0 ? 1 : 0;

        for (std::size_t t = 0; t < seq_len; ++t) {
            if (informative[t]) continue;
            for (std::size_t c = 0; c < spec.d_in; ++c) {
                sample.tokens.set(t, c, spec.noise_sigma * prng.normal());
            }
        }

        for (std::size_t t = 0; t < seq_len; ++t) {
            if (informative[t]) sample.informative_positions.push_back(t);
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace lam
