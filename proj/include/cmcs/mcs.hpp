#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cmcs/bootstrap.hpp"
#include "cmcs/core.hpp"

namespace cmcs {

struct McsConfig {
    double alpha = 0.05;
    BootstrapPlan plan;
    /// Minimum statewise sample size before the test is attempted; smaller
    /// states come back as in-band "insufficient data" results.
    int min_state_obs = 10;
};

/// Max standardized excess-loss statistic over a method set.
struct TmaxResult {
    std::vector<double> t_stats;
    double t_max = 0.0;
    std::size_t argmax = 0;  // position within the supplied vectors, ties -> lowest
    bool degenerate = false; // every member has zero mean and zero variance
};

/// t_i = d_bar_i / sqrt(var_i), T_max = max_i t_i, argmax with lowest-index
/// tie-breaking. Methods with |d_bar| and variance both below 1e-12 get
/// t = 0 (identical methods satisfy the null by construction); a vanishing
/// variance against a non-vanishing mean signals broken inputs and throws.
[[nodiscard]] TmaxResult tmax_statistic(const std::vector<double>& d_bar,
                                        const std::vector<double>& variances);

/// Sequential bootstrap T_max test with the e_max elimination rule on the
/// full panel: reject and eliminate while the bootstrap p-value stays below
/// alpha, recentring means and bootstrap contrasts on the shrinking set each
/// step; one index matrix is drawn per run.
[[nodiscard]] ConfidenceSetResult mcs_run(const LossPanel& panel, const McsConfig& cfg);

/// Statewise MCS: one independent mcs_run per state on the conditional
/// sub-panel, keyed by state label. Child random streams are derived per
/// state ordinal, so adding a state never perturbs the others.
[[nodiscard]] std::map<std::string, ConfidenceSetResult> cmcs_run(const LossPanel& panel,
                                                                  const StateSeries& states,
                                                                  const McsConfig& cfg);

}  // namespace cmcs
