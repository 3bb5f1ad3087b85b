#include "cmcs/cli.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmcs/bootstrap.hpp"
#include "cmcs/core.hpp"
#include "cmcs/cpa.hpp"
#include "cmcs/io.hpp"
#include "cmcs/losses.hpp"
#include "cmcs/mcs.hpp"
#include "cmcs/simlab.hpp"

namespace cmcs::cli {

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        io::write_text_file(out_path, text);
    }
}

std::string csv_text(const io::CsvTable& table,
                     const std::vector<std::pair<std::string, std::string>>& config) {
    std::ostringstream out;
    for (const auto& [k, v] : config) {
        out << "# " << k << "=" << v << "\n";
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << table.header[i];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    }
    return out.str();
}

io::CsvTable mcs_results_table(const std::vector<std::pair<std::string, ConfidenceSetResult>>& results) {
    io::CsvTable t;
    t.header = {"state", "method", "status", "T_max", "p_step", "p_mcs"};
    char buf[40];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    for (const auto& [state, res] : results) {
        for (const auto& rec : res.trace) {
            t.rows.push_back({state, rec.eliminated, "eliminated", num(rec.t_max), num(rec.p_step),
                              num(rec.p_mcs)});
        }
        for (const auto& id : res.surviving) {
            t.rows.push_back({state, id, res.insufficient_data ? "insufficient_data" : "surviving",
                              "", "", num(res.mcs_p_values.at(id))});
        }
    }
    return t;
}

struct CommonOpts {
    double alpha = 0.05;
    int boot_b = 1000;
    int block_len = 0;
    std::uint64_t seed = 42;
    std::uint64_t stream = 0;
    int workers = 1;
    std::string out_path;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_bootstrap) {
    cmd->add_option("--alpha", opts.alpha, "significance level in (0,1)")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    if (with_bootstrap) {
        cmd->add_option("--boot-b", opts.boot_b, "bootstrap replications B")->check(CLI::PositiveNumber);
        cmd->add_option("--block-len", opts.block_len, "bootstrap block length (0 = ceil(n^(1/3)))");
    }
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--stream", opts.stream, "random stream id");
    cmd->add_option("--out", opts.out_path, "output path (default stdout)");
    cmd->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "table"}));
}

int run_mcs(const std::string& losses_path, const std::string& states_path, int min_state_obs,
            const CommonOpts& opts) {
    const LossPanel panel = io::read_loss_panel_csv(losses_path);
    McsConfig cfg;
    cfg.alpha = opts.alpha;
    cfg.plan.replications = opts.boot_b;
    cfg.plan.block_len = opts.block_len;
    cfg.plan.stream = RandomStream{opts.seed, opts.stream};
    cfg.min_state_obs = min_state_obs;

    std::vector<std::pair<std::string, ConfidenceSetResult>> results;
    if (states_path.empty()) {
        results.emplace_back("unconditional", mcs_run(panel, cfg));
    } else {
        const StateSeries states = io::read_state_series_csv(states_path);
        for (auto& [state, res] : cmcs_run(panel, states, cfg)) {
            results.emplace_back(state, std::move(res));
        }
    }
    if (opts.format == "csv") {
        emit(csv_text(mcs_results_table(results),
                      {{"version", kVersion},
                       {"alpha", std::to_string(opts.alpha)},
                       {"B", std::to_string(opts.boot_b)},
                       {"block_len", std::to_string(opts.block_len)},
                       {"seed", std::to_string(opts.seed)},
                       {"stream", std::to_string(opts.stream)}}),
             opts.out_path);
    } else {
        emit(io::mcs_report_json(results, opts.alpha, opts.boot_b, opts.block_len,
                                 RandomStream{opts.seed, opts.stream}),
             opts.out_path);
    }
    return 0;
}

int run_cpa(const std::string& losses_path, const std::string& states_path,
            const std::string& cov_kind, int hac_lag, bool boot_t, const CommonOpts& opts) {
    const LossPanel panel = io::read_loss_panel_csv(losses_path);
    if (panel.n_methods() != 2) {
        throw std::invalid_argument("cpa: the pairwise test needs exactly 2 loss columns, got " +
                                    std::to_string(panel.n_methods()));
    }
    std::vector<double> d(panel.n_obs());
    for (std::size_t t = 0; t < panel.n_obs(); ++t) {
        d[t] = panel.losses()(t, 0) - panel.losses()(t, 1);
    }
    StateSeries states = states_path.empty()
                             ? StateSeries(std::vector<std::string>(panel.n_obs(), "all"), {"all"})
                             : io::read_state_series_csv(states_path);
    if (states.size() != panel.n_obs()) {
        throw std::invalid_argument("cpa: state series length does not match the loss panel");
    }

    CovEstimatorSpec cov_spec;
    cov_spec.kind = cov_kind == "hac" ? CovKind::truncated_hac : CovKind::sample;
    cov_spec.lag = cov_kind == "hac" ? hac_lag : 0;

    const InstrumentSeries z = instrument(d, states);
    const WaldOutcome wald = wald_test(z, cov_spec);

    TVarianceSpec var_spec;
    if (boot_t) {
        var_spec.use_bootstrap = true;
        var_spec.plan.replications = opts.boot_b;
        var_spec.plan.block_len = opts.block_len;
        var_spec.plan.stream = RandomStream{opts.seed, opts.stream};
    }

    nlohmann::json root;
    root["version"] = kVersion;
    root["alpha"] = opts.alpha;
    root["method_1"] = panel.method_ids()[0];
    root["method_2"] = panel.method_ids()[1];
    root["covariance"] = cov_kind;
    if (cov_spec.kind == CovKind::truncated_hac) {
        root["hac_lag"] = cov_spec.lag;
    }
    root["seed"] = opts.seed;
    root["wald"] = {{"statistic", wald.statistic}, {"df", wald.df}, {"p_value", wald.p_value}};
    if (states.alphabet().size() == 1) {
        // Single state: the Wald statistic is the squared DM t statistic.
        double d_mean = 0.0;
        for (const double v : d) {
            d_mean += v;
        }
        root["dm_t"] = std::sqrt(std::max(wald.statistic, 0.0)) * (d_mean < 0 ? -1.0 : 1.0);
    }
    root["statewise_t"] = nlohmann::json::array();
    for (const auto& state : states.alphabet()) {
        const StatewiseTResult r = statewise_t_test(d, states, state, var_spec);
        nlohmann::json s{{"state", state}, {"n_obs", r.n_obs}};
        if (r.ok) {
            s["t"] = r.t;
            s["p_two_sided"] = r.p_two_sided;
        } else {
            s["note"] = r.note;
        }
        root["statewise_t"].push_back(std::move(s));
    }
    root["selection"] = nlohmann::json::object();
    for (const auto& [state, sel] : dfc_select(d, states, wald, opts.alpha)) {
        const char* choice = sel.choice == DfcChoice::method1
                                 ? "method_1"
                                 : (sel.choice == DfcChoice::method2 ? "method_2" : "both");
        nlohmann::json s{{"choice", choice}, {"flagged", sel.flagged}};
        if (std::isfinite(sel.d_bar)) {
            s["d_bar"] = sel.d_bar;
        }
        root["selection"][state] = std::move(s);
    }
    emit(root.dump(2) + "\n", opts.out_path);
    return 0;
}

/// Emit a study: tidy CSV (the machine format), or the fixed-width summary
/// when --format table. With --out, the CSV goes to the file and the summary
/// is printed to stdout alongside it.
void emit_study(const StudyResult& study, const CommonOpts& opts) {
    auto config = study.config;
    config.insert(config.begin(), {"version", kVersion});
    if (opts.format == "table") {
        emit(io::study_to_text(study), opts.out_path);
        return;
    }
    emit(csv_text(io::study_to_csv(study), config), opts.out_path);
    if (!opts.out_path.empty()) {
        std::cout << io::study_to_text(study);
    }
}

int run_simulate_power(CLI::App* cmd, const std::string& preset, const std::string& config_path,
                       PowerStudyConfig& cfg, const CommonOpts& opts) {
    cfg.alpha = opts.alpha;
    cfg.bootstrap_b = opts.boot_b;
    cfg.block_len = opts.block_len;
    cfg.seed = RandomStream{opts.seed, opts.stream};
    cfg.workers = opts.workers;
    if (!preset.empty()) {
        if (preset != "fig1") {
            throw CLI::ValidationError("--preset", "unknown power preset '" + preset + "'");
        }
        cfg.m = 10;
        cfg.mu_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        cfg.n_grid = {150, 500, 1000};
        cfg.state_prob = 0.5;
        if (!cmd->count("--reps")) {
            cfg.replications = 1000;
        }
    }
    if (!config_path.empty()) {
        const auto j = nlohmann::json::parse(io::read_text_file(config_path));
        cfg.m = j.value("m", cfg.m);
        if (j.contains("mu")) cfg.mu_grid = j.at("mu").get<std::vector<double>>();
        if (j.contains("n")) cfg.n_grid = j.at("n").get<std::vector<int>>();
        cfg.state_prob = j.value("p", cfg.state_prob);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.replications = j.value("reps", cfg.replications);
        cfg.bootstrap_b = j.value("boot_b", cfg.bootstrap_b);
        cfg.block_len = j.value("block_len", cfg.block_len);
        cfg.seed.seed = j.value("seed", cfg.seed.seed);
        cfg.workers = j.value("workers", cfg.workers);
    }
    if (cfg.mu_grid.empty() || cfg.n_grid.empty()) {
        throw CLI::ValidationError("simulate power",
                                   "need --preset fig1, --config, or explicit --mu/--n grids");
    }
    emit_study(power_study(cfg), opts);
    return 0;
}

int run_simulate_rejection(CLI::App* cmd, int table, const std::string& config_path,
                           RejectionStudyConfig& cfg, const CommonOpts& opts) {
    cfg.alpha = opts.alpha;
    cfg.seed = RandomStream{opts.seed, opts.stream};
    cfg.workers = opts.workers;
    if (cmd->count("--table")) {
        if (table < 1 || table > 4) {
            throw CLI::ValidationError("--table", "table preset must be 1..4");
        }
        cfg.delta1_grid = {-0.1, -0.2, -0.3, -0.4, -0.5, -0.6};
        cfg.v_grid = (table == 1 || table == 3)
                         ? std::vector<double>{0.0}
                         : std::vector<double>{0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
        cfg.state_prob = (table <= 2) ? 0.5 : 0.2;
        cfg.n = 500;
        if (!cmd->count("--reps")) {
            cfg.replications = 10000;
        }
    }
    if (!config_path.empty()) {
        const auto j = nlohmann::json::parse(io::read_text_file(config_path));
        if (j.contains("delta1")) cfg.delta1_grid = j.at("delta1").get<std::vector<double>>();
        if (j.contains("v")) cfg.v_grid = j.at("v").get<std::vector<double>>();
        cfg.state_prob = j.value("p", cfg.state_prob);
        cfg.n = j.value("n", cfg.n);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.replications = j.value("reps", cfg.replications);
        cfg.noise_sd = j.value("noise_sd", cfg.noise_sd);
        cfg.seed.seed = j.value("seed", cfg.seed.seed);
        cfg.workers = j.value("workers", cfg.workers);
    }
    if (cfg.delta1_grid.empty() || cfg.v_grid.empty()) {
        throw CLI::ValidationError("simulate rejection",
                                   "need --table 1..4, --config, or explicit --delta1/--v grids");
    }
    emit_study(rejection_study(cfg), opts);
    return 0;
}

int run_simulate_region(RegionGridConfig& cfg, const CommonOpts& opts) {
    cfg.alpha = opts.alpha;
    emit_study(rejection_region_grid(cfg), opts);
    return 0;
}

int run_stress(const std::vector<std::string>& factor_specs, int win_len,
               const std::string& severity, const std::string& baseline,
               const std::string& es_path, double base_t, const std::string& out_states,
               const CommonOpts& opts) {
    nlohmann::json root;
    root["version"] = kVersion;

    std::vector<std::pair<std::string, StressWindow>> windows;
    std::size_t series_len = 0;
    for (const auto& spec : factor_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
            throw std::invalid_argument("stress: --factor expects LABEL=PATH, got '" + spec + "'");
        }
        const std::string label = spec.substr(0, eq);
        const std::vector<double> factor = io::read_factor_csv(spec.substr(eq + 1));
        if (series_len == 0) {
            series_len = factor.size();
        } else if (series_len != factor.size()) {
            throw std::invalid_argument("stress: factor series lengths differ");
        }
        const StressWindow win =
            find_stress_window(factor, static_cast<std::size_t>(win_len),
                               severity == "max" ? StressSeverity::rolling_max
                                                 : StressSeverity::rolling_mean);
        windows.emplace_back(label, win);
        root["windows"].push_back({{"regime", label},
                                   {"start_row", win.start + 1},
                                   {"length", win.length}});
    }
    if (!windows.empty() && !out_states.empty()) {
        const StateSeries states = states_from_windows(windows, series_len, baseline);
        io::write_state_series_csv(out_states, states);
        root["states_csv"] = out_states;
    }

    if (!es_path.empty()) {
        io::CsvTable table = io::read_csv(es_path);
        std::vector<std::pair<int, std::size_t>> lh_cols;  // (LH days, column)
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            const auto& name = table.header[c];
            if (name.rfind("LH", 0) == 0) {
                try {
                    lh_cols.emplace_back(std::stoi(name.substr(2)), c);
                } catch (const std::exception&) {
                    throw io::ParseError(es_path + ": bad liquidity-horizon column '" + name + "'");
                }
            }
        }
        if (lh_cols.empty()) {
            throw io::ParseError(es_path + ": no LH<days> columns found");
        }
        table.header.push_back("ES_BCBS");
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            HorizonEsSet set;
            set.base_t = base_t;
            for (const auto& [days, col] : lh_cols) {
                try {
                    set.horizons.emplace_back(days, std::stod(table.rows[r][col]));
                } catch (const std::exception&) {
                    throw io::ParseError(es_path + ":" + std::to_string(r + 2) +
                                         ": expected a number in column '" + table.header[col] + "'");
                }
            }
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.10g", es_bcbs(set));
            table.rows[r].emplace_back(buf);
        }
        emit(csv_text(table, {{"version", kVersion}, {"base_t", std::to_string(base_t)}}),
             opts.out_path);
        return 0;
    }

    emit(root.dump(2) + "\n", opts.out_path);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Conditional method confidence sets and forecast-evaluation tools"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // mcs
    CommonOpts mcs_opts;
    std::string mcs_losses, mcs_states;
    int min_state_obs = 10;
    auto* mcs_cmd = app.add_subcommand("mcs", "bootstrap (C)MCS on a loss panel");
    mcs_cmd->add_option("--losses", mcs_losses, "loss panel CSV")->required();
    mcs_cmd->add_option("--states", mcs_states, "state series CSV (omit for the unconditional MCS)");
    mcs_cmd->add_option("--min-state-obs", min_state_obs, "minimum conditional sample size");
    add_common(mcs_cmd, mcs_opts, true);

    // cpa
    CommonOpts cpa_opts;
    std::string cpa_losses, cpa_states, cov_kind = "sample";
    int hac_lag = 0;
    bool boot_t = false;
    auto* cpa_cmd = app.add_subcommand("cpa", "Wald CPA test, statewise t-tests and selection rule");
    cpa_cmd->add_option("--losses", cpa_losses, "two-method loss panel CSV")->required();
    cpa_cmd->add_option("--states", cpa_states, "state series CSV");
    cpa_cmd->add_option("--cov", cov_kind, "covariance estimator")
        ->check(CLI::IsMember({"sample", "hac"}));
    cpa_cmd->add_option("--hac-lag", hac_lag, "HAC truncation lag");
    cpa_cmd->add_flag("--boot-t", boot_t, "block-bootstrap variance for the statewise t-tests");
    add_common(cpa_cmd, cpa_opts, true);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo studies");
    sim_cmd->require_subcommand(1);

    CommonOpts pow_opts;
    PowerStudyConfig pow_cfg;
    std::string pow_preset, pow_config;
    auto* pow_cmd = sim_cmd->add_subcommand("power", "average confidence-set size study");
    pow_cmd->add_option("--preset", pow_preset, "named preset (fig1)");
    pow_cmd->add_option("--config", pow_config, "JSON study config file");
    pow_cmd->add_option("--m", pow_cfg.m, "number of methods");
    pow_cmd->add_option("--mu", pow_cfg.mu_grid, "mu grid");
    pow_cmd->add_option("--n", pow_cfg.n_grid, "sample-size grid");
    pow_cmd->add_option("--p", pow_cfg.state_prob, "state-1 probability");
    pow_cmd->add_option("--reps", pow_cfg.replications, "Monte Carlo replications");
    pow_cmd->add_option("--workers", pow_opts.workers, "parallel workers");
    add_common(pow_cmd, pow_opts, true);

    CommonOpts rej_opts;
    RejectionStudyConfig rej_cfg;
    int rej_table = 0;
    std::string rej_config;
    auto* rej_cmd = sim_cmd->add_subcommand("rejection", "rejection-rate study");
    rej_cmd->add_option("--table", rej_table, "table preset 1..4");
    rej_cmd->add_option("--config", rej_config, "JSON study config file");
    rej_cmd->add_option("--delta1", rej_cfg.delta1_grid, "delta1 grid (<= 0)");
    rej_cmd->add_option("--v", rej_cfg.v_grid, "v grid in [0,1]");
    rej_cmd->add_option("--p", rej_cfg.state_prob, "state-1 probability");
    rej_cmd->add_option("--n", rej_cfg.n, "sample size per replication");
    rej_cmd->add_option("--reps", rej_cfg.replications, "Monte Carlo replications");
    rej_cmd->add_option("--noise-sd", rej_cfg.noise_sd, "per-method noise sd");
    rej_cmd->add_option("--workers", rej_opts.workers, "parallel workers");
    add_common(rej_cmd, rej_opts, false);

    CommonOpts reg_opts;
    RegionGridConfig reg_cfg;
    auto* reg_cmd = sim_cmd->add_subcommand("region", "rejection-region grid (true covariance)");
    reg_cmd->add_option("--delta1", reg_cfg.design.delta1, "delta1 (<= 0)");
    reg_cmd->add_option("--v", reg_cfg.design.v, "v in [0,1]");
    reg_cmd->add_option("--p", reg_cfg.design.state_prob, "state-1 probability");
    reg_cmd->add_option("--sigma2", reg_cfg.design.sigma2, "loss-differential variance");
    reg_cmd->add_option("--n", reg_cfg.n, "nominal sample size");
    reg_cmd->add_option("--d1-min", reg_cfg.d1_min, "grid lower bound, state 1");
    reg_cmd->add_option("--d1-max", reg_cfg.d1_max, "grid upper bound, state 1");
    reg_cmd->add_option("--d2-min", reg_cfg.d2_min, "grid lower bound, state 2");
    reg_cmd->add_option("--d2-max", reg_cfg.d2_max, "grid upper bound, state 2");
    reg_cmd->add_option("--steps", reg_cfg.steps, "grid steps per axis");
    add_common(reg_cmd, reg_opts, false);

    // stress
    CommonOpts stress_opts;
    std::vector<std::string> factor_specs;
    int win_len = 252;
    std::string severity = "mean", baseline = "UC", es_path, out_states;
    double base_t = 10.0;
    auto* stress_cmd = app.add_subcommand("stress", "stress windows, states and ES_BCBS");
    stress_cmd->add_option("--factor", factor_specs, "risk factor as LABEL=PATH (repeatable)");
    stress_cmd->add_option("--win", win_len, "stress window length in days")->check(CLI::PositiveNumber);
    stress_cmd->add_option("--severity", severity, "window criterion")
        ->check(CLI::IsMember({"mean", "max"}));
    stress_cmd->add_option("--baseline", baseline, "baseline state label");
    stress_cmd->add_option("--es", es_path, "per-horizon ES table CSV (asset, UC, LH10, ...)");
    stress_cmd->add_option("--base-t", base_t, "scaling horizon T in days")->check(CLI::PositiveNumber);
    stress_cmd->add_option("--out-states", out_states, "write derived state series CSV here");
    add_common(stress_cmd, stress_opts, false);

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (mcs_cmd->parsed()) {
            return run_mcs(mcs_losses, mcs_states, min_state_obs, mcs_opts);
        }
        if (cpa_cmd->parsed()) {
            return run_cpa(cpa_losses, cpa_states, cov_kind, hac_lag, boot_t, cpa_opts);
        }
        if (sim_cmd->parsed()) {
            if (pow_cmd->parsed()) {
                return run_simulate_power(pow_cmd, pow_preset, pow_config, pow_cfg, pow_opts);
            }
            if (rej_cmd->parsed()) {
                return run_simulate_rejection(rej_cmd, rej_table, rej_config, rej_cfg, rej_opts);
            }
            if (reg_cmd->parsed()) {
                return run_simulate_region(reg_cfg, reg_opts);
            }
        }
        if (stress_cmd->parsed()) {
            return run_stress(factor_specs, win_len, severity, baseline, es_path, base_t,
                              out_states, stress_opts);
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const io::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

}  // namespace cmcs::cli
