#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cmcs/core.hpp"
#include "cmcs/cpa.hpp"
#include "cmcs/mcs.hpp"
#include "cmcs/statsutil.hpp"

namespace cmcs {

/// m-method design: conditional means are equally spaced through
/// c_i = 2(i-1)/(m-1), mirrored across the two states, so every method has
/// the same unconditional expected loss and the largest conditional gap is
/// 2 mu. Noise is iid standard normal per method.
struct MultiMethodDgp {
    int m = 10;
    double mu = 0.0;          // >= 0
    double state_prob = 0.5;  // P(state 1)
    int n = 500;

    [[nodiscard]] double spacing(int i) const {  // c_i, 1-based method index
        return 2.0 * (i - 1) / static_cast<double>(m - 1);
    }
    [[nodiscard]] double mean_for(int state, int i) const {
        const double base = mu * (1.0 - spacing(i));
        return state == 1 ? -base : base;
    }
};

/// Two-method design: means (-mu, mu) in state 1 and v (mu, -mu) in state 2,
/// so the loss differential has mean delta1 = -2 mu in state 1 and
/// delta2 = 2 v mu in state 2. noise_sd scales the per-method noise; the
/// default sqrt(2) gives the differential a standard deviation of 2, the
/// calibration under which the reference rejection rates were produced.
struct TwoMethodDgp {
    double mu = 0.0;          // >= 0; delta1 = -2 mu
    double v = 0.0;           // in [0, 1]
    double state_prob = 0.5;  // P(state 1)
    int n = 500;
    double noise_sd = std::sqrt(2.0);

    [[nodiscard]] double delta1() const { return -2.0 * mu; }
    [[nodiscard]] double delta2() const { return 2.0 * v * mu; }
};

/// One estimated quantity of a study: parameter point, statistic name,
/// estimate and its Monte Carlo standard error.
struct StudyCell {
    std::vector<std::pair<std::string, std::string>> params;
    std::string statistic;
    double estimate = 0.0;
    double mc_se = 0.0;
};

struct StudyResult {
    std::vector<std::pair<std::string, std::string>> config;  // echo, incl. seed
    std::size_t replications = 0;
    std::vector<StudyCell> cells;

    [[nodiscard]] const StudyCell* find(
        const std::vector<std::pair<std::string, std::string>>& params,
        const std::string& statistic) const;
};

[[nodiscard]] std::pair<LossPanel, StateSeries> gen_multi(const MultiMethodDgp& dgp,
                                                          RandomStream stream);

[[nodiscard]] std::pair<LossPanel, StateSeries> gen_two(const TwoMethodDgp& dgp,
                                                        RandomStream stream);

struct PowerStudyConfig {
    int m = 10;
    std::vector<double> mu_grid;
    std::vector<int> n_grid;
    double state_prob = 0.5;
    double alpha = 0.05;
    int replications = 1000;
    int bootstrap_b = 200;
    int block_len = 0;  // 0 = automatic
    RandomStream seed;
    int workers = 1;
};

/// Average surviving-set size of the unconditional MCS and of the statewise
/// CMCS over a (mu, n) grid.
[[nodiscard]] StudyResult power_study(const PowerStudyConfig& cfg);

struct RejectionStudyConfig {
    std::vector<double> delta1_grid;  // <= 0; mu = -delta1 / 2
    std::vector<double> v_grid;       // in [0, 1]
    double state_prob = 0.5;
    int n = 500;
    double alpha = 0.05;
    int replications = 10000;
    double noise_sd = std::sqrt(2.0);
    RandomStream seed;
    int workers = 1;
};

/// Rejection rates of the statewise t-tests and the Wald test, plus the
/// directional error rate (Wald rejects and the state-2 sign points at the
/// wrong method), over a (delta1, v) grid.
[[nodiscard]] StudyResult rejection_study(const RejectionStudyConfig& cfg);

struct RegionGridConfig {
    TwoStateDesign design;
    double n = 500.0;
    double alpha = 0.05;
    double d1_min = -0.5, d1_max = 0.5;
    double d2_min = -0.5, d2_max = 0.5;
    int steps = 101;  // per axis, >= 2
};

/// Rejection-region codes over a grid of conditional mean differentials,
/// using the true covariance and expected state counts n p, n (1-p).
/// Bit 0: state-1 t rejects; bit 1: state-2 t rejects; bit 2: Wald rejects.
[[nodiscard]] StudyResult rejection_region_grid(const RegionGridConfig& cfg);

/// Run fn(0..count-1) on `workers` threads; work is indexed, so results are
/// independent of the schedule.
void parallel_for_indexed(std::size_t count, int workers,
                          const std::function<void(std::size_t)>& fn);

}  // namespace cmcs
