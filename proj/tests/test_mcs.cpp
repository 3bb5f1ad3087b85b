#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmcs/mcs.hpp"
#include "cmcs/simlab.hpp"
#include "cmcs/statsutil.hpp"

using namespace cmcs;

namespace {

LossPanel panel_from_columns(const std::vector<std::vector<double>>& cols) {
    Matrix m(cols[0].size(), cols.size());
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        ids.push_back("m" + std::to_string(i + 1));
        for (std::size_t t = 0; t < cols[i].size(); ++t) {
            m(t, i) = cols[i][t];
        }
    }
    return LossPanel(std::move(m), std::move(ids));
}

McsConfig quick_config(RandomStream stream, int b = 500) {
    McsConfig cfg;
    cfg.alpha = 0.05;
    cfg.plan.replications = b;
    cfg.plan.stream = stream;
    return cfg;
}

}  // namespace

TEST_CASE("tmax_statistic arithmetic and tie breaking") {
    SUBCASE("zero means") {
        const auto r = tmax_statistic({0.0, 0.0}, {1.0, 1.0});
        CHECK(r.t_max == 0.0);
        CHECK(r.argmax == 0);
        CHECK_FALSE(r.degenerate);
    }
    SUBCASE("direct arithmetic") {
        const auto r = tmax_statistic({0.2, -0.2}, {0.01, 0.01});
        CHECK(r.t_stats[0] == doctest::Approx(2.0));
        CHECK(r.t_stats[1] == doctest::Approx(-2.0));
        CHECK(r.t_max == doctest::Approx(2.0));
        CHECK(r.argmax == 0);
    }
    SUBCASE("identical methods degenerate to zero statistics") {
        const auto r = tmax_statistic({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
        CHECK(r.t_max == 0.0);
        CHECK(r.degenerate);
    }
    SUBCASE("zero variance with non-zero mean is an error") {
        CHECK_THROWS_AS((void)tmax_statistic({0.5, 0.0}, {0.0, 1.0}), std::runtime_error);
    }
}

TEST_CASE("mcs_run eliminates a clearly inferior method") {
    const std::size_t n = 500;
    Pcg32 rng({777, 1});
    std::vector<double> good(n), bad(n);
    for (std::size_t t = 0; t < n; ++t) {
        good[t] = 0.1 * rng.normal();
        bad[t] = 1.0 + 0.1 * rng.normal();
    }
    const auto panel = panel_from_columns({good, bad});
    const auto res = mcs_run(panel, quick_config({777, 2}));
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].eliminated == "m2");
    CHECK(res.trace[0].p_step < 0.01);
    REQUIRE(res.surviving.size() == 1);
    CHECK(res.surviving[0] == "m1");
    CHECK(res.mcs_p_values.at("m2") < 0.01);
    CHECK(res.mcs_p_values.at("m1") == 1.0);  // singleton halt
}

TEST_CASE("identical columns survive jointly") {
    std::vector<double> col(64);
    Pcg32 rng({99, 9});
    for (auto& v : col) {
        v = rng.normal();
    }
    const auto panel = panel_from_columns({col, col, col});
    const auto res = mcs_run(panel, quick_config({99, 1}));
    CHECK(res.trace.empty());
    CHECK(res.surviving.size() == 3);
    CHECK(res.final_p_value == 1.0);
}

TEST_CASE("insufficient data comes back in-band") {
    const auto panel = panel_from_columns({{1.0, 2.0}, {0.5, 2.5}});
    auto cfg = quick_config({1, 1});
    cfg.min_state_obs = 10;
    const auto res = mcs_run(panel, cfg);
    CHECK(res.insufficient_data);
    CHECK(res.surviving.size() == 2);
    CHECK(res.note.find("insufficient") != std::string::npos);
}

TEST_CASE("trace replay reproduces the surviving set and p-values are monotone") {
    MultiMethodDgp dgp;
    dgp.m = 8;
    dgp.mu = 0.4;
    dgp.n = 400;
    auto [panel, states] = gen_multi(dgp, {2025, 4});
    // run on state-1 losses only, where the ranking is strict
    const auto part = partition_by_state(panel, states);
    const auto res = mcs_run(panel.subpanel(part.index_sets[0]), quick_config({2025, 5}));

    std::vector<std::string> replay = panel.method_ids();
    double prev_p = 0.0;
    for (const auto& rec : res.trace) {
        const auto it = std::find(replay.begin(), replay.end(), rec.eliminated);
        REQUIRE(it != replay.end());
        replay.erase(it);
        CHECK(rec.p_mcs >= prev_p);
        prev_p = rec.p_mcs;
    }
    std::vector<std::string> surviving_sorted = res.surviving;
    std::sort(surviving_sorted.begin(), surviving_sorted.end());
    std::sort(replay.begin(), replay.end());
    CHECK(surviving_sorted == replay);
    // surviving set and eliminated ids partition the original methods
    CHECK(replay.size() + res.trace.size() == panel.n_methods());
}

TEST_CASE("same seed gives identical results") {
    MultiMethodDgp dgp;
    dgp.m = 5;
    dgp.mu = 0.2;
    dgp.n = 300;
    auto [panel, states] = gen_multi(dgp, {11, 0});
    const auto a = mcs_run(panel, quick_config({12, 3}));
    const auto b = mcs_run(panel, quick_config({12, 3}));
    CHECK(a.surviving == b.surviving);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        CHECK(a.trace[k].eliminated == b.trace[k].eliminated);
        CHECK(a.trace[k].t_max == b.trace[k].t_max);
        CHECK(a.trace[k].p_step == b.trace[k].p_step);
    }
}

TEST_CASE("cmcs with a single state equals the unconditional run") {
    MultiMethodDgp dgp;
    dgp.m = 4;
    dgp.mu = 0.3;
    dgp.n = 250;
    auto [panel, ignored] = gen_multi(dgp, {31, 7});
    const StateSeries all_one(std::vector<std::string>(panel.n_obs(), "s"), {"s"});

    auto cfg = quick_config({55, 8});
    const auto conditional = cmcs_run(panel, all_one, cfg);
    REQUIRE(conditional.size() == 1);

    auto cfg_direct = cfg;
    cfg_direct.plan.stream = cfg.plan.stream.child(0);  // stream the state run uses
    const auto direct = mcs_run(panel, cfg_direct);
    CHECK(conditional.at("s").surviving == direct.surviving);
    CHECK(conditional.at("s").trace.size() == direct.trace.size());
}

TEST_CASE("cmcs separates statewise winners that the mcs cannot") {
    // Equal unconditional ability, opposite conditional ranking.
    TwoMethodDgp dgp;
    dgp.mu = 0.3;
    dgp.v = 1.0;
    dgp.n = 1000;

    int state1_only_m1 = 0, state2_only_m2 = 0, uncond_both = 0;
    const int reps = 60;
    for (int r = 0; r < reps; ++r) {
        const RandomStream rep_stream = RandomStream{404, 0}.child(static_cast<std::uint64_t>(r));
        auto [panel, states] = gen_two(dgp, rep_stream.child(0));
        auto cfg = quick_config(rep_stream.child(1), 300);

        const auto per_state = cmcs_run(panel, states, cfg);
        if (per_state.at("1").surviving == std::vector<std::string>{"m1"}) {
            ++state1_only_m1;
        }
        if (per_state.at("2").surviving == std::vector<std::string>{"m2"}) {
            ++state2_only_m2;
        }
        cfg.plan.stream = rep_stream.child(2);
        if (mcs_run(panel, cfg).surviving.size() == 2) {
            ++uncond_both;
        }
    }
    CHECK(state1_only_m1 > reps / 2);
    CHECK(state2_only_m2 > reps / 2);
    CHECK(uncond_both > reps / 2);
}

TEST_CASE("tiny states report insufficient data per state") {
    MultiMethodDgp dgp;
    dgp.m = 3;
    dgp.mu = 0.0;
    dgp.n = 40;
    auto [panel, ignored] = gen_multi(dgp, {77, 0});
    std::vector<std::string> labels(panel.n_obs(), "big");
    labels[5] = "tiny";
    const StateSeries states(labels, {"big", "tiny"});
    const auto res = cmcs_run(panel, states, quick_config({77, 1}));
    CHECK_FALSE(res.at("big").insufficient_data);
    CHECK(res.at("tiny").insufficient_data);
    CHECK(res.at("tiny").surviving.size() == 3);
}
