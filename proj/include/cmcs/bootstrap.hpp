#pragma once

#include <cstdint>
#include <vector>

#include "cmcs/core.hpp"
#include "cmcs/statsutil.hpp"

namespace cmcs {

/// Circular block bootstrap settings.
struct BootstrapPlan {
    int replications = 1000;   // B
    int block_len = 0;         // p; 0 = automatic ceil(n^{1/3}) at use time
    RandomStream stream;
};

/// ceil(n^{1/3}), the default block length.
[[nodiscard]] int default_block_len(std::size_t n);

/// Resolve the block length actually used for a sample of size n: applies the
/// automatic default, then clamps to max(1, n/2) when the sample is shorter
/// than two blocks. Returns {length, clamped?}.
[[nodiscard]] std::pair<int, bool> effective_block_len(std::size_t n, int requested);

/// B x n matrix of resampling indices (0-based). Every row is a concatenation
/// of circular blocks of fixed length, the last block truncated to fill
/// exactly n; position n + i wraps to i.
struct BootstrapIndexMatrix {
    std::size_t n_rows = 0;  // B
    std::size_t n_cols = 0;  // n
    std::vector<std::uint32_t> idx;

    [[nodiscard]] std::uint32_t operator()(std::size_t b, std::size_t t) const {
        return idx[b * n_cols + t];
    }
};

/// Per-method sample means and centered bootstrap means
/// xi*(b, i) = mean of resample b for method i - sample mean of method i.
struct BootstrapEnsemble {
    std::vector<double> sample_means;  // length m
    Matrix centered_means;             // B x m
};

/// Circular block resampling of {0..n-1}: independent uniform block starts,
/// fixed block length, truncate the last block.
/// Throws if n == 0 or the block length is outside [1, n].
[[nodiscard]] BootstrapIndexMatrix gen_block_indices(std::size_t n, const BootstrapPlan& plan);

/// Bootstrap means of every panel column under a shared index matrix.
[[nodiscard]] BootstrapEnsemble bootstrap_means(const LossPanel& panel,
                                                const BootstrapIndexMatrix& idx);

/// (1/B) sum_b (w' xi*_b)^2 for a method-weight contrast w. With
/// w = e_i - (1/m) 1 this is the variance estimator of the mean excess loss
/// d_bar_i. used by the sequential test.
[[nodiscard]] double bootstrap_variance(const BootstrapEnsemble& ensemble,
                                        const std::vector<double>& contrast);

}  // namespace cmcs
