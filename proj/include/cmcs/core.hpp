#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cmcs/matrix.hpp"

namespace cmcs {

/// Out-of-sample losses: one row per forecast origin, one column per method.
/// Construction validates shape, finiteness and method-id uniqueness; after
/// that the panel is immutable and safe to share across threads.
class LossPanel {
public:
    LossPanel(Matrix losses, std::vector<std::string> method_ids,
              std::vector<long long> time_index = {});

    [[nodiscard]] std::size_t n_obs() const { return losses_.rows(); }
    [[nodiscard]] std::size_t n_methods() const { return losses_.cols(); }
    [[nodiscard]] const Matrix& losses() const { return losses_; }
    [[nodiscard]] const std::vector<std::string>& method_ids() const { return method_ids_; }
    [[nodiscard]] const std::vector<long long>& time_index() const { return time_index_; }

    /// Sub-panel made of the given rows, kept in the given (time) order.
    [[nodiscard]] LossPanel subpanel(const std::vector<std::size_t>& rows) const;

private:
    Matrix losses_;
    std::vector<std::string> method_ids_;
    std::vector<long long> time_index_;
};

/// Per-time regime labels at the forecast origin, over a declared finite
/// alphabet. Labels outside the alphabet are rejected; alphabet states that
/// never occur are kept so downstream code can report them as empty.
class StateSeries {
public:
    StateSeries(std::vector<std::string> labels, std::vector<std::string> alphabet);

    /// Alphabet inferred from the labels, in order of first appearance.
    static StateSeries infer_alphabet(std::vector<std::string> labels);

    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
    [[nodiscard]] const std::vector<std::string>& alphabet() const { return alphabet_; }

private:
    std::vector<std::string> labels_;
    std::vector<std::string> alphabet_;
};

/// Index sets I^l per state, in original time order. States are listed in
/// alphabet order; empty states carry an empty index set rather than being
/// dropped.
struct StatePartition {
    std::vector<std::string> states;
    std::vector<std::vector<std::size_t>> index_sets;

    [[nodiscard]] std::size_t count(std::size_t state_ordinal) const {
        return index_sets[state_ordinal].size();
    }
};

/// Deviations of each method's loss from the cross-method average,
/// d_dot(t, i) = L(t, i) - mean_j L(t, j). Row sums are zero by identity.
class RelativeLoss {
public:
    explicit RelativeLoss(Matrix d_dot) : d_dot_(std::move(d_dot)) {}

    [[nodiscard]] const Matrix& d_dot() const { return d_dot_; }

    /// Pairwise differential d_ij(t) = L(t, i) - L(t, j).
    [[nodiscard]] double pairwise(std::size_t t, std::size_t i, std::size_t j) const {
        return d_dot_(t, i) - d_dot_(t, j);
    }

private:
    Matrix d_dot_;
};

/// One elimination step of the sequential test.
struct EliminationRecord {
    std::string eliminated;
    double t_max = 0.0;
    double p_step = 1.0;  // bootstrap p-value of the step
    double p_mcs = 1.0;   // running maximum of step p-values up to this step
};

/// Surviving set plus the full elimination trace of one (C)MCS run.
///
/// When `insufficient_data` is set the procedure never ran: all methods
/// survive, the trace is empty and `note` carries the reason.
struct ConfidenceSetResult {
    std::vector<std::string> surviving;
    std::vector<EliminationRecord> trace;
    std::map<std::string, double> mcs_p_values;
    double alpha = 0.0;
    /// p-value of the final, non-rejected hypothesis (1.0 when the set
    /// reached a singleton or a fully degenerate set without a rejection).
    double final_p_value = 1.0;
    bool insufficient_data = false;
    std::string note;
    std::vector<std::string> warnings;
};

/// d_dot transform of a panel. Throws on invalid input (the panel
/// constructor already rejects non-finite entries, naming the offending
/// time/method cell).
[[nodiscard]] RelativeLoss compute_relative_losses(const LossPanel& panel);

/// Split {0..n-1} into per-state index sets I^l.
/// Throws if lengths mismatch or a label is outside the declared alphabet.
[[nodiscard]] StatePartition partition_by_state(const LossPanel& panel, const StateSeries& states);

}  // namespace cmcs
