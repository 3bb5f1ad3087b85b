#include "cmcs/simlab.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cmcs {

namespace {

std::vector<std::string> numbered_ids(int m) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i) {
        ids.push_back("m" + std::to_string(i));
    }
    return ids;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double se_of_mean(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s2 = 0.0;
    for (const double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(v.size() - 1);
    return std::sqrt(s2 / static_cast<double>(v.size()));
}

double rate_se(double r, std::size_t reps) {
    return std::sqrt(r * (1.0 - r) / static_cast<double>(reps));
}

}  // namespace

const StudyCell* StudyResult::find(const std::vector<std::pair<std::string, std::string>>& params,
                                   const std::string& statistic) const {
    for (const auto& c : cells) {
        if (c.statistic == statistic && c.params == params) {
            return &c;
        }
    }
    return nullptr;
}

void parallel_for_indexed(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const int nw = std::max(1, workers);
    if (nw == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) {
                    error = std::current_exception();
                }
                failed.store(true);
                return;
            }
        }
    };
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back(body);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::pair<LossPanel, StateSeries> gen_multi(const MultiMethodDgp& dgp, RandomStream stream) {
    if (dgp.m < 2) {
        throw std::invalid_argument("gen_multi: need m >= 2");
    }
    if (dgp.mu < 0.0) {
        throw std::invalid_argument("gen_multi: mu must be nonnegative");
    }
    if (!(dgp.state_prob > 0.0) || !(dgp.state_prob < 1.0)) {
        throw std::invalid_argument("gen_multi: state probability must lie in (0,1)");
    }
    Pcg32 rng(stream);
    const auto n = static_cast<std::size_t>(dgp.n);
    const auto m = static_cast<std::size_t>(dgp.m);
    Matrix losses(n, m);
    std::vector<std::string> labels(n);
    for (std::size_t t = 0; t < n; ++t) {
        const int state = (rng.uniform01() < dgp.state_prob) ? 1 : 2;
        labels[t] = state == 1 ? "1" : "2";
        for (std::size_t i = 0; i < m; ++i) {
            losses(t, i) = dgp.mean_for(state, static_cast<int>(i) + 1) + rng.normal();
        }
    }
    return {LossPanel(std::move(losses), numbered_ids(dgp.m)),
            StateSeries(std::move(labels), {"1", "2"})};
}

std::pair<LossPanel, StateSeries> gen_two(const TwoMethodDgp& dgp, RandomStream stream) {
    if (dgp.mu < 0.0 || dgp.v < 0.0 || dgp.v > 1.0) {
        throw std::invalid_argument("gen_two: need mu >= 0 and v in [0,1]");
    }
    if (!(dgp.state_prob > 0.0) || !(dgp.state_prob < 1.0)) {
        throw std::invalid_argument("gen_two: state probability must lie in (0,1)");
    }
    if (!(dgp.noise_sd > 0.0)) {
        throw std::invalid_argument("gen_two: noise sd must be positive");
    }
    Pcg32 rng(stream);
    const auto n = static_cast<std::size_t>(dgp.n);
    Matrix losses(n, 2);
    std::vector<std::string> labels(n);
    for (std::size_t t = 0; t < n; ++t) {
        const bool s1 = rng.uniform01() < dgp.state_prob;
        labels[t] = s1 ? "1" : "2";
        const double m1 = s1 ? -dgp.mu : dgp.v * dgp.mu;
        const double m2 = -m1;
        losses(t, 0) = m1 + dgp.noise_sd * rng.normal();
        losses(t, 1) = m2 + dgp.noise_sd * rng.normal();
    }
    return {LossPanel(std::move(losses), numbered_ids(2)),
            StateSeries(std::move(labels), {"1", "2"})};
}

StudyResult power_study(const PowerStudyConfig& cfg) {
    if (cfg.replications < 2) {
        throw std::invalid_argument("power_study: need at least 2 replications");
    }
    StudyResult out;
    out.replications = static_cast<std::size_t>(cfg.replications);
    out.config = {{"study", "power"},
                  {"m", std::to_string(cfg.m)},
                  {"state_prob", fmt(cfg.state_prob)},
                  {"alpha", fmt(cfg.alpha)},
                  {"replications", std::to_string(cfg.replications)},
                  {"bootstrap_b", std::to_string(cfg.bootstrap_b)},
                  {"block_len", std::to_string(cfg.block_len)},
                  {"seed", std::to_string(cfg.seed.seed)},
                  {"stream", std::to_string(cfg.seed.stream_id)}};

    std::size_t point = 0;
    for (const int n : cfg.n_grid) {
        for (const double mu : cfg.mu_grid) {
            const RandomStream point_stream = cfg.seed.child(point);
            const auto reps = static_cast<std::size_t>(cfg.replications);
            std::vector<double> size_mcs(reps), size_s1(reps), size_s2(reps);

            parallel_for_indexed(reps, cfg.workers, [&](std::size_t r) {
                const RandomStream rep_stream = point_stream.child(r);
                MultiMethodDgp dgp;
                dgp.m = cfg.m;
                dgp.mu = mu;
                dgp.state_prob = cfg.state_prob;
                dgp.n = n;
                auto [panel, states] = gen_multi(dgp, rep_stream.child(0));

                McsConfig mcs_cfg;
                mcs_cfg.alpha = cfg.alpha;
                mcs_cfg.plan.replications = cfg.bootstrap_b;
                mcs_cfg.plan.block_len = cfg.block_len;
                mcs_cfg.plan.stream = rep_stream.child(1);
                size_mcs[r] = static_cast<double>(mcs_run(panel, mcs_cfg).surviving.size());

                mcs_cfg.plan.stream = rep_stream.child(2);
                const auto per_state = cmcs_run(panel, states, mcs_cfg);
                size_s1[r] = static_cast<double>(per_state.at("1").surviving.size());
                size_s2[r] = static_cast<double>(per_state.at("2").surviving.size());
            });

            const std::vector<std::pair<std::string, std::string>> params = {
                {"mu", fmt(mu)}, {"n", std::to_string(n)}};
            out.cells.push_back({params, "avg_size_mcs", mean_of(size_mcs), se_of_mean(size_mcs)});
            out.cells.push_back({params, "avg_size_cmcs_state1", mean_of(size_s1), se_of_mean(size_s1)});
            out.cells.push_back({params, "avg_size_cmcs_state2", mean_of(size_s2), se_of_mean(size_s2)});
            ++point;
        }
    }
    return out;
}

StudyResult rejection_study(const RejectionStudyConfig& cfg) {
    if (cfg.replications < 2) {
        throw std::invalid_argument("rejection_study: need at least 2 replications");
    }
    StudyResult out;
    out.replications = static_cast<std::size_t>(cfg.replications);
    out.config = {{"study", "rejection"},
                  {"state_prob", fmt(cfg.state_prob)},
                  {"n", std::to_string(cfg.n)},
                  {"alpha", fmt(cfg.alpha)},
                  {"replications", std::to_string(cfg.replications)},
                  {"noise_sd", fmt(cfg.noise_sd)},
                  {"seed", std::to_string(cfg.seed.seed)},
                  {"stream", std::to_string(cfg.seed.stream_id)}};

    const double z_crit = normal_quantile(1.0 - cfg.alpha / 2.0);

    std::size_t point = 0;
    for (const double delta1 : cfg.delta1_grid) {
        if (delta1 > 0.0) {
            throw std::invalid_argument("rejection_study: delta1 must be <= 0");
        }
        for (const double v : cfg.v_grid) {
            const RandomStream point_stream = cfg.seed.child(point);
            const auto reps = static_cast<std::size_t>(cfg.replications);
            std::vector<double> rej1(reps, 0.0), rej2(reps, 0.0), rejw(reps, 0.0), dir(reps, 0.0);

            parallel_for_indexed(reps, cfg.workers, [&](std::size_t r) {
                TwoMethodDgp dgp;
                dgp.mu = -delta1 / 2.0;
                dgp.v = v;
                dgp.state_prob = cfg.state_prob;
                dgp.n = cfg.n;
                dgp.noise_sd = cfg.noise_sd;
                auto [panel, states] = gen_two(dgp, point_stream.child(r));

                std::vector<double> d(panel.n_obs());
                for (std::size_t t = 0; t < panel.n_obs(); ++t) {
                    d[t] = panel.losses()(t, 0) - panel.losses()(t, 1);
                }

                const StatewiseTResult t1 = statewise_t_test(d, states, "1");
                const StatewiseTResult t2 = statewise_t_test(d, states, "2");
                rej1[r] = (t1.ok && std::fabs(t1.t) > z_crit) ? 1.0 : 0.0;
                rej2[r] = (t2.ok && std::fabs(t2.t) > z_crit) ? 1.0 : 0.0;

                const WaldOutcome wald = wald_test(instrument(d, states), {CovKind::sample, 0});
                rejw[r] = (wald.p_value < cfg.alpha) ? 1.0 : 0.0;

                const auto selection = dfc_select(d, states, wald, cfg.alpha);
                dir[r] = (selection.at("2").choice == DfcChoice::method1) ? 1.0 : 0.0;
            });

            const std::vector<std::pair<std::string, std::string>> params = {
                {"delta1", fmt(delta1)}, {"v", fmt(v)}};
            const double r1 = mean_of(rej1), r2 = mean_of(rej2), rw = mean_of(rejw),
                         rd = mean_of(dir);
            out.cells.push_back({params, "rej_t_state1", r1, rate_se(r1, reps)});
            out.cells.push_back({params, "rej_t_state2", r2, rate_se(r2, reps)});
            out.cells.push_back({params, "rej_wald", rw, rate_se(rw, reps)});
            out.cells.push_back({params, "dir_error_state2", rd, rate_se(rd, reps)});
            ++point;
        }
    }
    return out;
}

StudyResult rejection_region_grid(const RegionGridConfig& cfg) {
    if (cfg.steps < 2) {
        throw std::invalid_argument("rejection_region_grid: need at least 2 steps per axis");
    }
    StudyResult out;
    out.replications = 0;
    out.config = {{"study", "region"},
                  {"delta1", fmt(cfg.design.delta1)},
                  {"v", fmt(cfg.design.v)},
                  {"state_prob", fmt(cfg.design.state_prob)},
                  {"sigma2", fmt(cfg.design.sigma2)},
                  {"n", fmt(cfg.n)},
                  {"alpha", fmt(cfg.alpha)}};

    const double z_crit = normal_quantile(1.0 - cfg.alpha / 2.0);
    const double chi_crit = chi2_quantile(cfg.alpha, 2);
    const double p = cfg.design.state_prob;
    const double sigma = std::sqrt(cfg.design.sigma2);
    const double n1 = cfg.n * p;
    const double n2 = cfg.n * (1.0 - p);

    for (int a = 0; a < cfg.steps; ++a) {
        const double d1 = cfg.d1_min + (cfg.d1_max - cfg.d1_min) * a / (cfg.steps - 1.0);
        for (int b = 0; b < cfg.steps; ++b) {
            const double d2 = cfg.d2_min + (cfg.d2_max - cfg.d2_min) * b / (cfg.steps - 1.0);
            const bool rej_t1 = std::fabs(d1) * std::sqrt(n1) / sigma > z_crit;
            const bool rej_t2 = std::fabs(d2) * std::sqrt(n2) / sigma > z_crit;
            const bool rej_w = closed_form_wald(d1, d2, cfg.n, cfg.design) > chi_crit;
            const int code = (rej_t1 ? 1 : 0) | (rej_t2 ? 2 : 0) | (rej_w ? 4 : 0);
            out.cells.push_back(
                {{{"d1", fmt(d1)}, {"d2", fmt(d2)}}, "region_code", static_cast<double>(code), 0.0});
        }
    }
    return out;
}

}  // namespace cmcs
