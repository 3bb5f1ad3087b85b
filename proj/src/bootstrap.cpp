#include "cmcs/bootstrap.hpp"

#include <cmath>
#include <stdexcept>

namespace cmcs {

int default_block_len(std::size_t n) {
    return static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n))));
}

std::pair<int, bool> effective_block_len(std::size_t n, int requested) {
    int len = requested > 0 ? requested : default_block_len(n);
    bool clamped = false;
    if (n < 2 * static_cast<std::size_t>(len)) {
        const int cap = std::max<int>(1, static_cast<int>(n / 2));
        if (len > cap) {
            len = cap;
            clamped = true;
        }
    }
    return {len, clamped};
}

BootstrapIndexMatrix gen_block_indices(std::size_t n, const BootstrapPlan& plan) {
    if (n == 0) {
        throw std::invalid_argument("gen_block_indices: empty sample");
    }
    if (plan.replications < 1) {
        throw std::invalid_argument("gen_block_indices: need at least 1 replication");
    }
    const int p = plan.block_len > 0 ? plan.block_len : default_block_len(n);
    if (static_cast<std::size_t>(p) > n) {
        throw std::invalid_argument("gen_block_indices: block length " + std::to_string(p) +
                                    " exceeds sample size " + std::to_string(n));
    }
    const auto B = static_cast<std::size_t>(plan.replications);
    BootstrapIndexMatrix out;
    out.n_rows = B;
    out.n_cols = n;
    out.idx.resize(B * n);
    Pcg32 rng(plan.stream);
    for (std::size_t b = 0; b < B; ++b) {
        std::size_t filled = 0;
        while (filled < n) {
            const auto start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
            const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(p), n - filled);
            for (std::size_t j = 0; j < take; ++j) {
                std::size_t v = start + j;
                if (v >= n) v -= n;  // circular wrap
                out.idx[b * n + filled + j] = static_cast<std::uint32_t>(v);
            }
            filled += take;
        }
    }
    return out;
}

BootstrapEnsemble bootstrap_means(const LossPanel& panel, const BootstrapIndexMatrix& idx) {
    const std::size_t n = panel.n_obs();
    const std::size_t m = panel.n_methods();
    if (idx.n_cols != n) {
        throw std::invalid_argument("bootstrap_means: index matrix built for n = " +
                                    std::to_string(idx.n_cols) + ", panel has n = " +
                                    std::to_string(n));
    }
    BootstrapEnsemble out;
    out.sample_means.assign(m, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double* row = panel.losses().row_ptr(t);
        for (std::size_t i = 0; i < m; ++i) {
            out.sample_means[i] += row[i];
        }
    }
    for (auto& v : out.sample_means) {
        v /= static_cast<double>(n);
    }
    out.centered_means = Matrix(idx.n_rows, m);
    std::vector<double> acc(m);
    for (std::size_t b = 0; b < idx.n_rows; ++b) {
        acc.assign(m, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const std::uint32_t r = idx(b, t);
            if (r >= n) {
                throw std::out_of_range("bootstrap_means: resampling index out of bounds");
            }
            const double* row = panel.losses().row_ptr(r);
            for (std::size_t i = 0; i < m; ++i) {
                acc[i] += row[i];
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            out.centered_means(b, i) = acc[i] / static_cast<double>(n) - out.sample_means[i];
        }
    }
    return out;
}

double bootstrap_variance(const BootstrapEnsemble& ensemble, const std::vector<double>& contrast) {
    const std::size_t B = ensemble.centered_means.rows();
    const std::size_t m = ensemble.centered_means.cols();
    if (contrast.size() != m) {
        throw std::invalid_argument("bootstrap_variance: contrast length " +
                                    std::to_string(contrast.size()) + " != m = " + std::to_string(m));
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const double* row = ensemble.centered_means.row_ptr(b);
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            dot += contrast[i] * row[i];
        }
        acc += dot * dot;
    }
    return acc / static_cast<double>(B);
}

}  // namespace cmcs
