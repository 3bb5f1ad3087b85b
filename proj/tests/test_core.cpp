#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cmcs/core.hpp"
#include "cmcs/statsutil.hpp"

using namespace cmcs;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t i = 0; i < rows[t].size(); ++i) {
            m(t, i) = rows[t][i];
        }
    }
    return m;
}

LossPanel random_panel(std::size_t n, std::size_t m, RandomStream stream) {
    Pcg32 rng(stream);
    Matrix losses(n, m);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < m; ++i) {
        ids.push_back("m" + std::to_string(i + 1));
    }
    for (auto& v : losses.data()) {
        v = 3.0 * rng.normal() + 0.5;
    }
    return LossPanel(std::move(losses), std::move(ids));
}

}  // namespace

TEST_CASE("panel validation rejects bad shapes, duplicates and non-finite cells") {
    CHECK_THROWS_AS(LossPanel(Matrix(3, 1), {"a"}), std::invalid_argument);
    CHECK_THROWS_AS(LossPanel(Matrix(0, 2), {"a", "b"}), std::invalid_argument);
    CHECK_THROWS_AS(LossPanel(Matrix(3, 2), {"a", "a"}), std::invalid_argument);
    CHECK_THROWS_AS(LossPanel(Matrix(3, 2), {"a", "b", "c"}), std::invalid_argument);

    Matrix bad(2, 2);
    bad(1, 1) = std::nan("");
    try {
        LossPanel panel(std::move(bad), {"a", "b"});
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        // diagnostic names the offending time point and method
        CHECK(std::string(e.what()).find("t=2") != std::string::npos);
        CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
}

TEST_CASE("relative losses on hand examples") {
    SUBCASE("identical columns give all zeros") {
        const LossPanel panel(from_rows({{1.5, 1.5, 1.5}, {-2.0, -2.0, -2.0}}), {"a", "b", "c"});
        const RelativeLoss rel = compute_relative_losses(panel);
        for (const double v : rel.d_dot().data()) {
            CHECK(v == 0.0);
        }
    }
    SUBCASE("two methods") {
        const LossPanel panel(from_rows({{3.0, 1.0}}), {"a", "b"});
        const RelativeLoss rel = compute_relative_losses(panel);
        CHECK(rel.d_dot()(0, 0) == doctest::Approx(1.0));
        CHECK(rel.d_dot()(0, 1) == doctest::Approx(-1.0));
        CHECK(rel.pairwise(0, 0, 1) == doctest::Approx(2.0));
    }
    SUBCASE("three methods") {
        const LossPanel panel(from_rows({{0.0, 1.0, 2.0}}), {"a", "b", "c"});
        const RelativeLoss rel = compute_relative_losses(panel);
        CHECK(rel.d_dot()(0, 0) == doctest::Approx(-1.0));
        CHECK(rel.d_dot()(0, 1) == doctest::Approx(0.0));
        CHECK(rel.d_dot()(0, 2) == doctest::Approx(1.0));
    }
}

TEST_CASE("relative-loss identities on random panels") {
    const LossPanel panel = random_panel(200, 7, {31, 0});
    const RelativeLoss rel = compute_relative_losses(panel);

    for (std::size_t t = 0; t < panel.n_obs(); ++t) {
        double row_sum = 0.0;
        double mean = 0.0;
        for (std::size_t i = 0; i < panel.n_methods(); ++i) {
            row_sum += rel.d_dot()(t, i);
            mean += panel.losses()(t, i);
        }
        mean /= static_cast<double>(panel.n_methods());
        CHECK(std::fabs(row_sum) < 1e-10);
        for (std::size_t i = 0; i < panel.n_methods(); ++i) {
            // reconstruction round trip
            CHECK(std::fabs(rel.d_dot()(t, i) + mean - panel.losses()(t, i)) < 1e-9);
            for (std::size_t j = 0; j < panel.n_methods(); ++j) {
                CHECK(rel.pairwise(t, i, j) + rel.pairwise(t, j, i) == 0.0);
                CHECK(std::fabs(rel.pairwise(t, i, j) -
                                (panel.losses()(t, i) - panel.losses()(t, j))) < 1e-10);
            }
        }
    }
}

TEST_CASE("state partition on hand examples") {
    const LossPanel panel = random_panel(4, 2, {5, 0});
    SUBCASE("alternating labels") {
        const StateSeries states({"1", "2", "1", "2"}, {"1", "2"});
        const StatePartition part = partition_by_state(panel, states);
        CHECK(part.index_sets[0] == std::vector<std::size_t>{0, 2});
        CHECK(part.index_sets[1] == std::vector<std::size_t>{1, 3});
        CHECK(part.count(0) == 2);
        CHECK(part.count(1) == 2);
    }
    SUBCASE("single observed state keeps the empty one") {
        const StateSeries states({"1", "1", "1", "1"}, {"1", "2"});
        const StatePartition part = partition_by_state(panel, states);
        CHECK(part.index_sets[0].size() == 4);
        CHECK(part.index_sets[1].empty());
    }
    SUBCASE("degenerate singleton state") {
        const StateSeries states({"2", "2", "2", "1"}, {"1", "2"});
        const StatePartition part = partition_by_state(panel, states);
        CHECK(part.index_sets[0] == std::vector<std::size_t>{3});
        CHECK(part.count(0) == 1);
    }
}

TEST_CASE("state partition disjointness and cover on random labels") {
    const std::size_t n = 500;
    const LossPanel panel = random_panel(n, 2, {6, 0});
    Pcg32 rng({6, 1});
    std::vector<std::string> labels(n);
    for (auto& s : labels) {
        s = std::to_string(rng.uniform_int(1, 4));
    }
    const StateSeries states = StateSeries::infer_alphabet(labels);
    const StatePartition part = partition_by_state(panel, states);

    std::vector<int> hits(n, 0);
    std::size_t total = 0;
    for (const auto& set : part.index_sets) {
        total += set.size();
        for (std::size_t k = 1; k < set.size(); ++k) {
            CHECK(set[k - 1] < set[k]);  // sorted, original time order
        }
        for (const auto t : set) {
            hits[t]++;
        }
    }
    CHECK(total == n);
    for (const int h : hits) {
        CHECK(h == 1);  // pairwise disjoint and covering
    }
}

TEST_CASE("state partition errors") {
    const LossPanel panel = random_panel(4, 2, {8, 0});
    CHECK_THROWS_AS((void)partition_by_state(panel, StateSeries({"1", "1"}, {"1"})),
                    std::invalid_argument);
    CHECK_THROWS_AS(StateSeries({"1", "3", "1", "1"}, {"1", "2"}), std::invalid_argument);
}

TEST_CASE("subpanel keeps original order and time index") {
    Matrix losses(4, 2);
    for (std::size_t t = 0; t < 4; ++t) {
        losses(t, 0) = static_cast<double>(t);
        losses(t, 1) = 10.0 + static_cast<double>(t);
    }
    const LossPanel panel(std::move(losses), {"a", "b"}, {100, 101, 102, 103});
    const LossPanel sub = panel.subpanel({1, 3});
    CHECK(sub.n_obs() == 2);
    CHECK(sub.losses()(0, 0) == 1.0);
    CHECK(sub.losses()(1, 1) == 13.0);
    CHECK(sub.time_index() == std::vector<long long>{101, 103});
}
