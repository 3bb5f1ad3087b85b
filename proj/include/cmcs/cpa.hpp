#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmcs/bootstrap.hpp"
#include "cmcs/core.hpp"
#include "cmcs/matrix.hpp"

namespace cmcs {

/// Instrumented loss differential z_t = h_t d_t with test functions
/// h_t = (1, state indicators)'. The last alphabet state is the omitted
/// category, so q = 1 + (d - 1); with a single state z_t = (d_t) and the
/// Wald test collapses to the squared unconditional DM statistic.
struct InstrumentSeries {
    Matrix z;                          // n x q
    std::vector<std::string> states;   // alphabet; states.size() - 1 indicators
};

enum class CovKind { sample, truncated_hac };

struct CovEstimatorSpec {
    CovKind kind = CovKind::sample;
    int lag = 0;  // truncation lag for the HAC estimator, ignored for sample
};

struct WaldOutcome {
    double statistic = 0.0;  // T^h = n zbar' Sigma^{-1} zbar
    int df = 0;              // q
    double p_value = 1.0;
};

/// Two-state design of the closed-form Wald algebra: the loss differential is
/// N(delta1, sigma2) in state 1 and N(delta2, sigma2) in state 2 with
/// delta2 = -v * delta1, P(state 1) = p.
struct TwoStateDesign {
    double delta1 = 0.0;   // <= 0
    double v = 0.0;        // in [0, 1]
    double state_prob = 0.5;
    double sigma2 = 1.0;

    [[nodiscard]] double delta2() const { return -v * delta1; }
};

/// Exact covariance of (D_t, D_t 1{S_t=1})' under a TwoStateDesign, with its
/// determinant and inverse.
struct ClosedFormCov {
    double sigma11 = 0.0;
    double sigma12 = 0.0;
    double sigma22 = 0.0;
    double det = 0.0;
    double inv11 = 0.0;
    double inv12 = 0.0;
    double inv22 = 0.0;
};

/// Result of a statewise t-test; insufficient data (fewer than 2 conditional
/// observations, or zero variance) is reported in-band.
struct StatewiseTResult {
    bool ok = false;
    double t = 0.0;
    double p_two_sided = 1.0;
    std::size_t n_obs = 0;
    std::string note;
};

/// How the statewise t-test estimates var(d_bar^l).
struct TVarianceSpec {
    bool use_bootstrap = false;     // default: iid s^2 / n^l
    BootstrapPlan plan;             // used when use_bootstrap is set
};

/// Per-state decision of the Wald-plus-sign rule.
enum class DfcChoice { method1, method2, both };

struct DfcSelection {
    DfcChoice choice = DfcChoice::both;
    double d_bar = 0.0;     // conditional mean differential, NaN when state empty
    bool flagged = false;   // exact-zero mean or empty state
};

[[nodiscard]] InstrumentSeries instrument(const std::vector<double>& d, const StateSeries& states);

/// Covariance of z_t: centered sample covariance, or the truncated-kernel
/// (uniform weight) HAC sum Gamma_0 + sum_{k<=lag} (Gamma_k + Gamma_k').
/// A non-positive-definite result gets one ridge of 1e-8 * trace / q; if it
/// is still not PD the estimator throws, carrying the minimum eigenvalue.
[[nodiscard]] Matrix covariance(const InstrumentSeries& z, const CovEstimatorSpec& spec);

/// T^h = n zbar' Sigma^{-1} zbar with p-value from chi2_q. Studentizes with
/// the raw (uncentered) second-moment matrix, the Giacomini-White
/// convention: under the null it estimates the same covariance, and with a
/// single state the statistic is exactly the squared DM t statistic built on
/// the uncentered variance.
[[nodiscard]] WaldOutcome wald_test(const InstrumentSeries& z, const CovEstimatorSpec& spec);

[[nodiscard]] StatewiseTResult statewise_t_test(const std::vector<double>& d,
                                                const StateSeries& states,
                                                const std::string& target_state,
                                                const TVarianceSpec& var_spec = {});

/// Giacomini-White/DFC decision rule for the pairwise case: keep both methods
/// unless the Wald test rejects; on rejection pick per state the method with
/// the smaller conditional average loss (sign of the mean differential).
[[nodiscard]] std::map<std::string, DfcSelection> dfc_select(const std::vector<double>& d,
                                                             const StateSeries& states,
                                                             const WaldOutcome& wald,
                                                             double alpha);

[[nodiscard]] ClosedFormCov closed_form_sigma(const TwoStateDesign& design);

/// The exact Wald statistic n [D + E + F] as a function of the conditional
/// sample means, with expected state counts n1 = p n, n2 = (1-p) n and the
/// true covariance.
[[nodiscard]] double closed_form_wald(double d_bar1, double d_bar2, double n,
                                      const TwoStateDesign& design);

}  // namespace cmcs
