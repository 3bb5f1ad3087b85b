#pragma once

#include <cstdint>
#include <vector>

namespace cmcs {

/// Identifies a reproducible random stream: same (seed, stream_id) yields a
/// bit-identical draw sequence on every run and every parallel schedule.
/// Streams are realized by PCG32 (64-bit LCG state, XSH-RR output), which
/// supports independent substreams through distinct odd increments.
struct RandomStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Derive the k-th child stream. Children of one parent are pairwise
    /// distinct; the mapping is a fixed splitmix64 hash, so the hierarchy is
    /// stable across runs and worker counts.
    [[nodiscard]] RandomStream child(std::uint64_t k) const;
};

/// PCG32 engine bound to a RandomStream. Value semantics; each parallel task
/// owns its own engine and never shares generator state.
class Pcg32 {
public:
    explicit Pcg32(RandomStream s);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform double strictly inside (0, 1), 53-bit resolution.
    double uniform01();

    /// Unbiased uniform draw on {lo, ..., hi}. Throws if lo > hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal variate via the inverse-CDF method (deterministic,
    /// one uniform per draw).
    double normal();

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

[[nodiscard]] std::vector<double> std_normal_draws(RandomStream stream, std::size_t count);

/// Φ(x), standard normal CDF.
[[nodiscard]] double normal_cdf(double x);

/// Φ⁻¹(prob) for prob in (0,1); absolute error below 1e-9 (AS 241).
/// Throws std::invalid_argument outside (0,1).
[[nodiscard]] double normal_quantile(double prob);

/// P(χ²_df > x) via the regularized incomplete gamma function.
/// Throws std::invalid_argument for x < 0 or df < 1.
[[nodiscard]] double chi2_upper_tail(double x, int df);

/// x such that P(χ²_df > x) = alpha_upper.
[[nodiscard]] double chi2_quantile(double alpha_upper, int df);

}  // namespace cmcs
