#include "cmcs/mcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cmcs {

namespace {

constexpr double kDegenerateEps = 1e-12;

ConfidenceSetResult insufficient(const LossPanel& panel, const McsConfig& cfg, std::string why) {
    ConfidenceSetResult res;
    res.alpha = cfg.alpha;
    res.surviving = panel.method_ids();
    res.insufficient_data = true;
    res.note = std::move(why);
    for (const auto& id : res.surviving) {
        res.mcs_p_values.emplace(id, 1.0);
    }
    return res;
}

}  // namespace

TmaxResult tmax_statistic(const std::vector<double>& d_bar, const std::vector<double>& variances) {
    if (d_bar.size() != variances.size()) {
        throw std::invalid_argument("tmax_statistic: size mismatch");
    }
    if (d_bar.size() < 2) {
        throw std::invalid_argument("tmax_statistic: need at least 2 methods");
    }
    TmaxResult res;
    res.t_stats.resize(d_bar.size());
    res.degenerate = true;
    for (std::size_t i = 0; i < d_bar.size(); ++i) {
        if (variances[i] < 0.0) {
            throw std::invalid_argument("tmax_statistic: negative variance");
        }
        if (variances[i] < kDegenerateEps) {
            if (std::fabs(d_bar[i]) >= kDegenerateEps) {
                throw std::runtime_error(
                    "tmax_statistic: zero variance with non-zero mean excess loss (method index " +
                    std::to_string(i) + ")");
            }
            res.t_stats[i] = 0.0;
        } else {
            res.t_stats[i] = d_bar[i] / std::sqrt(variances[i]);
            res.degenerate = false;
        }
    }
    res.argmax = 0;
    res.t_max = res.t_stats[0];
    for (std::size_t i = 1; i < res.t_stats.size(); ++i) {
        if (res.t_stats[i] > res.t_max) {
            res.t_max = res.t_stats[i];
            res.argmax = i;
        }
    }
    return res;
}

ConfidenceSetResult mcs_run(const LossPanel& panel, const McsConfig& cfg) {
    if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) {
        throw std::invalid_argument("mcs_run: alpha must lie in (0,1)");
    }
    const std::size_t n = panel.n_obs();
    const std::size_t m = panel.n_methods();
    if (n < static_cast<std::size_t>(std::max(cfg.min_state_obs, 2))) {
        return insufficient(panel, cfg,
                            "insufficient data: n = " + std::to_string(n) + " < " +
                                std::to_string(std::max(cfg.min_state_obs, 2)));
    }

    ConfidenceSetResult res;
    res.alpha = cfg.alpha;

    auto [block_len, clamped] = effective_block_len(n, cfg.plan.block_len);
    if (clamped) {
        res.warnings.push_back("block length clamped to " + std::to_string(block_len) +
                               " for n = " + std::to_string(n) + "; estimates may be unreliable");
    }
    BootstrapPlan plan = cfg.plan;
    plan.block_len = block_len;

    const BootstrapIndexMatrix idx = gen_block_indices(n, plan);
    const BootstrapEnsemble ens = bootstrap_means(panel, idx);
    const auto B = static_cast<std::size_t>(plan.replications);

    std::vector<std::size_t> active(m);
    std::iota(active.begin(), active.end(), 0);

    double p_running_max = 0.0;
    double final_p = 1.0;

    std::vector<double> d_bar, var_hat, xi_dot(B);
    while (active.size() >= 2) {
        const auto k = active.size();
        const double inv_k = 1.0 / static_cast<double>(k);

        double mean_all = 0.0;
        for (const auto i : active) {
            mean_all += ens.sample_means[i];
        }
        mean_all *= inv_k;
        d_bar.assign(k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            d_bar[j] = ens.sample_means[active[j]] - mean_all;
        }

        for (std::size_t b = 0; b < B; ++b) {
            const double* row = ens.centered_means.row_ptr(b);
            double dot = 0.0;
            for (const auto i : active) {
                dot += row[i];
            }
            xi_dot[b] = dot * inv_k;
        }
        var_hat.assign(k, 0.0);
        for (std::size_t b = 0; b < B; ++b) {
            const double* row = ens.centered_means.row_ptr(b);
            for (std::size_t j = 0; j < k; ++j) {
                const double c = row[active[j]] - xi_dot[b];
                var_hat[j] += c * c;
            }
        }
        for (auto& v : var_hat) {
            v /= static_cast<double>(B);
        }

        const TmaxResult stat = tmax_statistic(d_bar, var_hat);
        if (stat.degenerate) {
            // All remaining methods are identical; the null holds by
            // construction and the test cannot reject.
            final_p = 1.0;
            break;
        }

        // Bootstrap distribution of T_max under the null.
        std::size_t exceed = 0;
        for (std::size_t b = 0; b < B; ++b) {
            const double* row = ens.centered_means.row_ptr(b);
            double t_star_max = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                if (var_hat[j] < kDegenerateEps) {
                    continue;  // identical member, contributes t* = 0 at most
                }
                const double t_star = (row[active[j]] - xi_dot[b]) / std::sqrt(var_hat[j]);
                t_star_max = std::max(t_star_max, t_star);
            }
            if (stat.t_max < t_star_max) {
                ++exceed;
            }
        }
        const double p_step = static_cast<double>(exceed) / static_cast<double>(B);

        if (p_step < cfg.alpha) {
            p_running_max = std::max(p_running_max, p_step);
            EliminationRecord rec;
            rec.eliminated = panel.method_ids()[active[stat.argmax]];
            rec.t_max = stat.t_max;
            rec.p_step = p_step;
            rec.p_mcs = p_running_max;
            res.trace.push_back(rec);
            res.mcs_p_values.emplace(rec.eliminated, rec.p_mcs);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(stat.argmax));
        } else {
            final_p = p_step;
            break;
        }
    }

    res.final_p_value = final_p;
    const double surviving_p = std::max(p_running_max, final_p);
    for (const auto i : active) {
        res.surviving.push_back(panel.method_ids()[i]);
        res.mcs_p_values.emplace(panel.method_ids()[i], surviving_p);
    }
    return res;
}

std::map<std::string, ConfidenceSetResult> cmcs_run(const LossPanel& panel,
                                                    const StateSeries& states,
                                                    const McsConfig& cfg) {
    const StatePartition part = partition_by_state(panel, states);
    std::map<std::string, ConfidenceSetResult> out;
    for (std::size_t l = 0; l < part.states.size(); ++l) {
        McsConfig state_cfg = cfg;
        state_cfg.plan.stream = cfg.plan.stream.child(l);
        const auto& rows = part.index_sets[l];
        if (rows.size() < static_cast<std::size_t>(std::max(cfg.min_state_obs, 2))) {
            ConfidenceSetResult res;
            res.alpha = cfg.alpha;
            res.surviving = panel.method_ids();
            res.insufficient_data = true;
            res.note = "insufficient data: n^l = " + std::to_string(rows.size()) + " < " +
                       std::to_string(std::max(cfg.min_state_obs, 2));
            for (const auto& id : res.surviving) {
                res.mcs_p_values.emplace(id, 1.0);
            }
            out.emplace(part.states[l], std::move(res));
            continue;
        }
        out.emplace(part.states[l], mcs_run(panel.subpanel(rows), state_cfg));
    }
    return out;
}

}  // namespace cmcs
