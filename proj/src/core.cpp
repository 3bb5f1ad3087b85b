#include "cmcs/core.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace cmcs {

LossPanel::LossPanel(Matrix losses, std::vector<std::string> method_ids,
                     std::vector<long long> time_index)
    : losses_(std::move(losses)),
      method_ids_(std::move(method_ids)),
      time_index_(std::move(time_index)) {
    const std::size_t n = losses_.rows();
    const std::size_t m = losses_.cols();
    if (m < 2) {
        throw std::invalid_argument("LossPanel: need at least 2 methods, got " + std::to_string(m));
    }
    if (n < 1) {
        throw std::invalid_argument("LossPanel: need at least 1 observation");
    }
    if (method_ids_.size() != m) {
        throw std::invalid_argument("LossPanel: " + std::to_string(method_ids_.size()) +
                                    " method ids for " + std::to_string(m) + " columns");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : method_ids_) {
        if (!seen.insert(id).second) {
            throw std::invalid_argument("LossPanel: duplicate method id '" + id + "'");
        }
    }
    if (!time_index_.empty() && time_index_.size() != n) {
        throw std::invalid_argument("LossPanel: time index length " +
                                    std::to_string(time_index_.size()) + " != n = " +
                                    std::to_string(n));
    }
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(losses_(t, i))) {
                throw std::invalid_argument("LossPanel: non-finite loss at t=" + std::to_string(t + 1) +
                                            ", method '" + method_ids_[i] + "'");
            }
        }
    }
}

LossPanel LossPanel::subpanel(const std::vector<std::size_t>& rows) const {
    Matrix sub(rows.size(), n_methods());
    std::vector<long long> sub_time;
    sub_time.reserve(time_index_.empty() ? 0 : rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t t = rows[k];
        if (t >= n_obs()) {
            throw std::out_of_range("LossPanel::subpanel: row " + std::to_string(t) + " out of range");
        }
        for (std::size_t i = 0; i < n_methods(); ++i) {
            sub(k, i) = losses_(t, i);
        }
        if (!time_index_.empty()) {
            sub_time.push_back(time_index_[t]);
        }
    }
    return LossPanel(std::move(sub), method_ids_, std::move(sub_time));
}

StateSeries::StateSeries(std::vector<std::string> labels, std::vector<std::string> alphabet)
    : labels_(std::move(labels)), alphabet_(std::move(alphabet)) {
    if (alphabet_.empty()) {
        throw std::invalid_argument("StateSeries: alphabet must declare at least one state");
    }
    std::unordered_set<std::string> declared;
    for (const auto& s : alphabet_) {
        if (!declared.insert(s).second) {
            throw std::invalid_argument("StateSeries: duplicate state '" + s + "' in alphabet");
        }
    }
    for (std::size_t t = 0; t < labels_.size(); ++t) {
        if (!declared.contains(labels_[t])) {
            throw std::invalid_argument("StateSeries: label '" + labels_[t] + "' at t=" +
                                        std::to_string(t + 1) + " not in declared alphabet");
        }
    }
}

StateSeries StateSeries::infer_alphabet(std::vector<std::string> labels) {
    std::vector<std::string> alphabet;
    std::unordered_set<std::string> seen;
    for (const auto& s : labels) {
        if (seen.insert(s).second) {
            alphabet.push_back(s);
        }
    }
    return StateSeries(std::move(labels), std::move(alphabet));
}

RelativeLoss compute_relative_losses(const LossPanel& panel) {
    const std::size_t n = panel.n_obs();
    const std::size_t m = panel.n_methods();
    Matrix d(n, m);
    for (std::size_t t = 0; t < n; ++t) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            mean += panel.losses()(t, i);
        }
        mean /= static_cast<double>(m);
        for (std::size_t i = 0; i < m; ++i) {
            d(t, i) = panel.losses()(t, i) - mean;
        }
    }
    return RelativeLoss(std::move(d));
}

StatePartition partition_by_state(const LossPanel& panel, const StateSeries& states) {
    if (states.size() != panel.n_obs()) {
        throw std::invalid_argument("partition_by_state: state series length " +
                                    std::to_string(states.size()) + " != panel n = " +
                                    std::to_string(panel.n_obs()));
    }
    StatePartition part;
    part.states = states.alphabet();
    part.index_sets.assign(part.states.size(), {});
    std::unordered_map<std::string, std::size_t> ordinal;
    for (std::size_t l = 0; l < part.states.size(); ++l) {
        ordinal.emplace(part.states[l], l);
    }
    for (std::size_t t = 0; t < states.size(); ++t) {
        part.index_sets[ordinal.at(states.labels()[t])].push_back(t);
    }
    return part;
}

}  // namespace cmcs
