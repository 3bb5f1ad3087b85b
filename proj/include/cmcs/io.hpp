#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmcs/core.hpp"
#include "cmcs/cpa.hpp"
#include "cmcs/simlab.hpp"

namespace cmcs::io {

/// Thrown on malformed input files; message carries the offending line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Loss panel CSV: header row of method ids, one numeric row per time point,
/// '.' decimal point, comma separated.
[[nodiscard]] LossPanel read_loss_panel_csv(const std::string& path);
void write_loss_panel_csv(const std::string& path, const LossPanel& panel);

/// State series CSV: header row, then two columns (time_index, state_label).
[[nodiscard]] StateSeries read_state_series_csv(const std::string& path);
void write_state_series_csv(const std::string& path, const StateSeries& states);

/// Risk-factor CSV: header row, then two columns (time, value).
[[nodiscard]] std::vector<double> read_factor_csv(const std::string& path);

/// Delimited table: header plus string cells, used by the stress command for
/// per-horizon ES tables and by tests to re-parse study output.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
[[nodiscard]] CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// JSON report for one or many (C)MCS runs:
/// {..run metadata.., "states": [{state, surviving, trace: [...]}, ...]}.
[[nodiscard]] std::string mcs_report_json(
    const std::vector<std::pair<std::string, ConfidenceSetResult>>& results, double alpha,
    int bootstrap_b, int block_len, RandomStream seed);

/// Re-parse an emitted MCS report (round-trip check and downstream tooling).
[[nodiscard]] std::vector<std::pair<std::string, ConfidenceSetResult>> parse_mcs_report_json(
    const std::string& text);

/// Tidy CSV for a study result: one row per cell.
[[nodiscard]] CsvTable study_to_csv(const StudyResult& study);

/// Fixed-width summary mirroring the published table layout: rejection
/// studies print one row per (delta1, v) with the four rates; power studies
/// one row per (mu, n) with the average set sizes.
[[nodiscard]] std::string study_to_text(const StudyResult& study);

[[nodiscard]] std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cmcs::io
