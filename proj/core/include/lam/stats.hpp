#pragma once

#include <cstddef>
#include <vector>

#include "lam/attention.hpp"
#include "lam/mask.hpp"

namespace lam {

/// Histogram and summary statistics over post-softmax attention weights.
struct DistributionStats {
    std::vector<double> bin_edges;    // bins + 1 edges over [0, 1]
    std::vector<std::size_t> counts;  // sums to total_weights
    double epsilon = 0.0;
    double fraction_below = 0.0;  // fraction of weights strictly below epsilon
    double skewness = 0.0;        // m3 / m2^(3/2); 0 for a constant sample
    std::size_t total_weights = 0;
};

/// Pools every post-softmax weight across the given records (all layers and
/// heads). epsilon must lie in (0,1) and bins must be >= 2.
DistributionStats collect_attention_stats(const std::vector<AttentionRecord>& records,
                                          double epsilon, std::size_t bins);

/// Per-layer ratio of mean |mask value| over informative columns to the mean
/// over the remaining columns. Positions index into [0, cols); both column
/// groups must be non-empty.
std::vector<double> informative_mass(const std::vector<Mask>& layer_masks,
                                     const std::vector<std::size_t>& positions);

}  // namespace lam
