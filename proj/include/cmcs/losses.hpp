#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cmcs/core.hpp"

namespace cmcs {

/// Joint (VaR, ES) forecast at tail level prob; es <= var since the ES is the
/// tail mean beyond the VaR.
struct VarEsForecast {
    double var = 0.0;
    double es = 0.0;
    double prob = 0.025;
};

/// ES forecasts per liquidity horizon; the first entry is the base horizon.
struct HorizonEsSet {
    std::vector<std::pair<int, double>> horizons;  // (LH_j days, es_j), LH strictly increasing
    double base_t = 10.0;                          // scaling horizon T in days
};

/// Contiguous window of a risk-factor series (0-based start index).
struct StressWindow {
    std::size_t start = 0;
    std::size_t length = 252;
};

enum class StressSeverity { rolling_mean, rolling_max };

/// Strictly consistent joint scoring loss for (VaR, ES), in the logistic
/// specification G1(x) = x, G2(x) = e^x / (1 + e^x), xi2(x) = ln(1 + e^x),
/// a = ln 2. Stable for large |es| through softplus.
[[nodiscard]] double fz_loss(const VarEsForecast& f, double realized_return);

/// Root-sum-of-squares aggregation of stressed ES across liquidity horizons,
/// the increments past the base horizon scaled by sqrt((LH_j - LH_{j-1}) / T).
/// Returns a nonnegative risk magnitude; a single horizon gives |es_1|.
[[nodiscard]] double es_bcbs(const HorizonEsSet& h);

/// Most severe win_len-day window of the factor series: maximal rolling mean
/// (default) or rolling max, earliest start on ties.
[[nodiscard]] StressWindow find_stress_window(const std::vector<double>& factor,
                                              std::size_t win_len = 252,
                                              StressSeverity severity = StressSeverity::rolling_mean);

/// Label each time index by the first (priority order) regime whose window
/// covers it; uncovered times get the baseline label.
[[nodiscard]] StateSeries states_from_windows(
    const std::vector<std::pair<std::string, StressWindow>>& windows, std::size_t n,
    const std::string& baseline_label);

}  // namespace cmcs
