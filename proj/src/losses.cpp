#include "cmcs/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmcs {

namespace {

double softplus(double x) {
    // ln(1 + e^x) without overflow for large |x|
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double fz_loss(const VarEsForecast& f, double realized_return) {
    if (!(f.prob > 0.0) || !(f.prob < 1.0)) {
        throw std::invalid_argument("fz_loss: tail level must lie in (0,1)");
    }
    if (f.es > f.var) {
        throw std::invalid_argument("fz_loss: es exceeds var (the ES is the tail mean beyond VaR)");
    }
    const double hit = (realized_return <= f.var) ? 1.0 : 0.0;
    return f.var * (hit - f.prob) - hit * realized_return +
           logistic(f.es) * (f.es - f.var + hit * (f.var - realized_return) / f.prob) -
           softplus(f.es) + std::log(2.0);
}

double es_bcbs(const HorizonEsSet& h) {
    if (h.horizons.empty()) {
        throw std::invalid_argument("es_bcbs: no horizons supplied");
    }
    if (!(h.base_t > 0.0)) {
        throw std::invalid_argument("es_bcbs: scaling horizon T must be positive");
    }
    for (std::size_t j = 1; j < h.horizons.size(); ++j) {
        if (h.horizons[j].first <= h.horizons[j - 1].first) {
            throw std::invalid_argument("es_bcbs: liquidity horizons must be strictly increasing");
        }
    }
    double acc = h.horizons[0].second * h.horizons[0].second;
    for (std::size_t j = 1; j < h.horizons.size(); ++j) {
        const double incr = static_cast<double>(h.horizons[j].first - h.horizons[j - 1].first) / h.base_t;
        acc += h.horizons[j].second * h.horizons[j].second * incr;
    }
    return std::sqrt(acc);
}

StressWindow find_stress_window(const std::vector<double>& factor, std::size_t win_len,
                                StressSeverity severity) {
    if (win_len == 0) {
        throw std::invalid_argument("find_stress_window: window length must be positive");
    }
    if (factor.size() < win_len) {
        throw std::invalid_argument("find_stress_window: series length " +
                                    std::to_string(factor.size()) + " shorter than window " +
                                    std::to_string(win_len));
    }
    for (const double v : factor) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("find_stress_window: non-finite factor value");
        }
    }
    std::size_t best_start = 0;
    if (severity == StressSeverity::rolling_mean) {
        double sum = 0.0;
        for (std::size_t t = 0; t < win_len; ++t) {
            sum += factor[t];
        }
        double best = sum;
        for (std::size_t s = 1; s + win_len <= factor.size(); ++s) {
            sum += factor[s + win_len - 1] - factor[s - 1];
            if (sum > best + 1e-12 * std::max(1.0, std::fabs(best))) {
                best = sum;
                best_start = s;
            }
        }
    } else {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s + win_len <= factor.size(); ++s) {
            double mx = factor[s];
            for (std::size_t t = 1; t < win_len; ++t) {
                mx = std::max(mx, factor[s + t]);
            }
            if (mx > best) {
                best = mx;
                best_start = s;
            }
        }
    }
    return StressWindow{best_start, win_len};
}

StateSeries states_from_windows(const std::vector<std::pair<std::string, StressWindow>>& windows,
                                std::size_t n, const std::string& baseline_label) {
    std::vector<std::string> labels(n, baseline_label);
    std::vector<bool> taken(n, false);
    std::vector<std::string> alphabet;
    for (const auto& [label, win] : windows) {
        if (win.start + win.length > n) {
            throw std::invalid_argument("states_from_windows: window for '" + label +
                                        "' exceeds series length");
        }
        if (std::find(alphabet.begin(), alphabet.end(), label) == alphabet.end()) {
            alphabet.push_back(label);
        }
        for (std::size_t t = win.start; t < win.start + win.length; ++t) {
            if (!taken[t]) {
                labels[t] = label;
                taken[t] = true;
            }
        }
    }
    if (std::find(alphabet.begin(), alphabet.end(), baseline_label) == alphabet.end()) {
        alphabet.push_back(baseline_label);
    }
    return StateSeries(std::move(labels), std::move(alphabet));
}

}  // namespace cmcs
