#include "lam/stats.hpp"

#include <cmath>

namespace lam {

DistributionStats collect_attention_stats(const std::vector<AttentionRecord>& records,
                                          double epsilon, std::size_t bins) {
    if (records.empty()) throw ContractError("collect_attention_stats: no records");
    if (epsilon <= 0.0 || epsilon >= 1.0) {
        throw ContractError("collect_attention_stats: epsilon must lie in (0, 1)");
    }
    if (bins < 2) throw ContractError("collect_attention_stats: bins must be >= 2");

    DistributionStats stats;
    stats.epsilon = epsilon;
    stats.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        stats.bin_edges[i] = static_cast<double>(i) / static_cast<double>(bins);
    }
    stats.counts.assign(bins, 0);

    // Two passes: moments need the mean first.
    double sum = 0.0;
    std::size_t total = 0;
    std::size_t below = 0;
    for (const AttentionRecord& rec : records) {
        for (const Tensor& w : rec.weights) {
            for (double v : w.values()) {
                sum += v;
                ++total;
                if (v < epsilon) ++below;
                std::size_t bin = static_cast<std::size_t>(v * static_cast<double>(bins));
                if (bin >= bins) bin = bins - 1;  // weight exactly 1.0
                ++stats.counts[bin];
            }
        }
    }
    if (total == 0) throw ContractError("collect_attention_stats: records hold no weights");
    const double mean = sum / static_cast<double>(total);
    double m2 = 0.0, m3 = 0.0;
    for (const AttentionRecord& rec : records) {
        for (const Tensor& w : rec.weights) {
            for (double v : w.values()) {
                const double c = v - mean;
                m2 += c * c;
                m3 += c * c * c;
            }
        }
    }
    m2 /= static_cast<double>(total);
    m3 /= static_cast<double>(total);
    stats.total_weights = total;
    stats.fraction_below = static_cast<double>(below) / static_cast<double>(total);
    stats.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return stats;
}

std::vector<double> informative_mass(const std::vector<Mask>& layer_masks,
                                     const std::vector<std::size_t>& positions) {
    if (positions.empty()) throw ContractError("informative_mass: empty informative set");
    std::vector<double> ratios;
    ratios.reserve(layer_masks.size());
    for (const Mask& mask : layer_masks) {
        const std::size_t rows = mask.rows(), cols = mask.cols();
        std::vector<bool> informative(cols, false);
        for (std::size_t p : positions) {
            if (p >= cols) {
                throw IndexError("informative_mass: position " + std::to_string(p) +
                                 " out of range for " + std::to_string(cols) + " columns");
            }
            informative[p] = true;
        }
        std::size_t n_info = 0;
        for (bool b : informative) n_info += b ? 1 : 0;
        if (n_info == cols) throw ContractError("informative_mass: empty non-informative set");

        double info_sum = 0.0, noise_sum = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                const double v = std::fabs(mask.values.at(i, j));
                if (informative[j]) {
                    info_sum += v;
                } else {
                    noise_sum += v;
                }
            }
        }
        const double info_mean = info_sum / static_cast<double>(n_info * rows);
        const double noise_mean = noise_sum / static_cast<double>((cols - n_info) * rows);
        ratios.push_back(noise_mean == 0.0 ? (info_mean == 0.0 ? 1.0 : HUGE_VAL)
                                           : info_mean / noise_mean);
    }
    return ratios;
}

}  // namespace lam
