#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cmcs/losses.hpp"
#include "cmcs/statsutil.hpp"

using namespace cmcs;

namespace {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
}

// Closed-form expected FZ loss for r ~ N(mu, sd^2): the hit indicator
// integrates to Phi(a) and r 1{r <= v} to mu Phi(a) - sd phi(a), a = (v-mu)/sd.
double expected_fz_loss(double var, double es, double prob, double mu, double sd) {
    const double a = (var - mu) / sd;
    const double cdf = normal_cdf(a);
    const double partial = mu * cdf - sd * normal_pdf(a);  // E[r 1{r <= var}]
    const double g2 = 1.0 / (1.0 + std::exp(-es));
    return var * (cdf - prob) - partial +
           g2 * (es - var + (var * cdf - partial) / prob) -
           std::log1p(std::exp(es)) + std::log(2.0);
}

}  // namespace

TEST_CASE("fz_loss hand cases") {
    CHECK(fz_loss({0.0, 0.0, 0.025}, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    // r = -1, VaR = -2, ES = -3: no hit, each term evaluated by hand
    CHECK(fz_loss({-2.0, -3.0, 0.025}, -1.0) == doctest::Approx(0.647134).epsilon(1e-6));
    CHECK_THROWS_AS((void)fz_loss({0.0, 0.0, 0.0}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)fz_loss({-2.0, -1.0, 0.025}, 0.1), std::invalid_argument);
    // stable for extreme ES magnitudes
    CHECK(std::isfinite(fz_loss({-1.0, -500.0, 0.025}, 0.3)));
    CHECK(std::isfinite(fz_loss({-1.0, -2.0, 0.025}, -800.0)));
}

TEST_CASE("population FZ loss is minimized at the true (VaR, ES)") {
    // three location-scale settings; expected loss computed in closed form
    const double prob = 0.025;
    for (const auto& [mu, sd] : std::vector<std::pair<double, double>>{
             {0.0, 1.0}, {0.3, 1.5}, {-0.2, 0.7}}) {
        const double true_var = mu + sd * normal_quantile(prob);
        const double true_es = mu - sd * normal_pdf(normal_quantile(prob)) / prob;

        double best = 1e300, best_var = 0.0, best_es = 0.0;
        const int cells = 41;
        const double step = 0.02 * sd;
        for (int a = 0; a < cells; ++a) {
            const double v = true_var + (a - cells / 2) * step;
            for (int b = 0; b < cells; ++b) {
                const double e = true_es + (b - cells / 2) * step;
                if (e > v) {
                    continue;
                }
                const double val = expected_fz_loss(v, e, prob, mu, sd);
                if (val < best) {
                    best = val;
                    best_var = v;
                    best_es = e;
                }
            }
        }
        CHECK(std::fabs(best_var - true_var) <= step + 1e-12);
        CHECK(std::fabs(best_es - true_es) <= step + 1e-12);
    }
}

TEST_CASE("es_bcbs hand cases and properties") {
    SUBCASE("single horizon returns the magnitude") {
        CHECK(es_bcbs({{{10, -1.35}}, 10.0}) == doctest::Approx(1.35));
    }
    SUBCASE("all-ones Basel ladder gives sqrt(12)") {
        const HorizonEsSet set{{{10, -1.0}, {20, -1.0}, {40, -1.0}, {60, -1.0}, {120, -1.0}}, 10.0};
        CHECK(es_bcbs(set) == doctest::Approx(std::sqrt(12.0)).epsilon(1e-9));
    }
    SUBCASE("positive homogeneity") {
        Pcg32 rng({12, 0});
        for (int k = 0; k < 200; ++k) {
            HorizonEsSet set;
            set.base_t = 1.0 + 9.0 * rng.uniform01();
            int lh = 5 + static_cast<int>(rng.uniform_int(1, 10));
            for (int j = 0; j < 4; ++j) {
                set.horizons.emplace_back(lh, -3.0 * rng.uniform01());
                lh += static_cast<int>(rng.uniform_int(5, 40));
            }
            const double c = 0.1 + 5.0 * rng.uniform01();
            HorizonEsSet scaled = set;
            for (auto& horizon : scaled.horizons) {
                horizon.second *= c;
            }
            CHECK(es_bcbs(scaled) == doctest::Approx(c * es_bcbs(set)).epsilon(1e-9));
        }
    }
    SUBCASE("monotone in every |ES(j)|") {
        const HorizonEsSet base{{{10, -1.0}, {20, -0.5}, {40, -2.0}}, 10.0};
        const double ref = es_bcbs(base);
        for (std::size_t j = 0; j < base.horizons.size(); ++j) {
            HorizonEsSet bumped = base;
            bumped.horizons[j].second *= 1.25;
            CHECK(es_bcbs(bumped) >= ref);
        }
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS((void)es_bcbs({{}, 10.0}), std::invalid_argument);
        CHECK_THROWS_AS((void)es_bcbs({{{10, -1.0}, {10, -1.0}}, 10.0}), std::invalid_argument);
        CHECK_THROWS_AS((void)es_bcbs({{{20, -1.0}, {10, -1.0}}, 10.0}), std::invalid_argument);
    }
}

TEST_CASE("stress window search") {
    SUBCASE("constant series picks the earliest start") {
        const StressWindow w = find_stress_window(std::vector<double>(300, 2.0), 252);
        CHECK(w.start == 0);
        CHECK(w.length == 252);
    }
    SUBCASE("single spike: earliest window containing it") {
        std::vector<double> f(20, 0.0);
        f[10] = 5.0;
        const StressWindow w = find_stress_window(f, 3);
        CHECK(w.start == 8);  // max(0, 10 - 2)
    }
    SUBCASE("monotone series picks the last window") {
        const StressWindow w = find_stress_window({1.0, 2.0, 3.0, 4.0, 5.0}, 2);
        CHECK(w.start == 3);
    }
    SUBCASE("rolling max variant") {
        std::vector<double> f{0.0, 9.0, 0.0, 1.0, 4.0, 4.0, 4.0};
        CHECK(find_stress_window(f, 3, StressSeverity::rolling_max).start == 0);
        CHECK(find_stress_window(f, 3, StressSeverity::rolling_mean).start == 4);
    }
    SUBCASE("shift invariance of the argmax") {
        Pcg32 rng({44, 0});
        std::vector<double> f(400);
        for (auto& v : f) {
            v = rng.normal();
        }
        const StressWindow a = find_stress_window(f, 60);
        for (auto& v : f) {
            v += 123.456;
        }
        const StressWindow b = find_stress_window(f, 60);
        CHECK(a.start == b.start);
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS((void)find_stress_window(std::vector<double>(100, 1.0), 252),
                        std::invalid_argument);
        CHECK_THROWS_AS((void)find_stress_window({1.0, std::nan("")}, 2), std::invalid_argument);
    }
}

TEST_CASE("states from stress windows") {
    SUBCASE("no windows labels everything baseline") {
        const StateSeries s = states_from_windows({}, 5, "UC");
        for (const auto& label : s.labels()) {
            CHECK(label == "UC");
        }
    }
    SUBCASE("one window labels its span") {
        const StateSeries s = states_from_windows({{"LH10", {10, 252}}}, 400, "UC");
        CHECK(s.labels()[9] == "UC");
        CHECK(s.labels()[10] == "LH10");
        CHECK(s.labels()[261] == "LH10");
        CHECK(s.labels()[262] == "UC");
    }
    SUBCASE("overlaps resolve by priority order") {
        const StateSeries s =
            states_from_windows({{"A", {0, 10}}, {"B", {5, 10}}}, 20, "UC");
        CHECK(s.labels()[7] == "A");
        CHECK(s.labels()[12] == "B");
        CHECK(s.labels()[16] == "UC");
    }
    SUBCASE("window past the end throws") {
        CHECK_THROWS_AS((void)states_from_windows({{"A", {10, 20}}}, 25, "UC"),
                        std::invalid_argument);
    }
}
