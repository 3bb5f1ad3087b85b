#include "cmcs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cmcs/version.hpp"

namespace cmcs::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back("");
    }
    return out;
}

double parse_double(const std::string& cell, const std::string& path, std::size_t line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected a number, got '" + cell + "'");
    }
    return value;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

}  // namespace

LossPanel read_loss_panel_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) {
        throw ParseError(path + ": need a header row and at least one data row");
    }
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2) {
        throw ParseError(path + ":1: need at least 2 method columns");
    }
    const std::size_t m = header.size();
    Matrix losses(lines.size() - 1, m);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != m) {
            throw ParseError(path + ":" + std::to_string(r + 1) + ": expected " + std::to_string(m) +
                             " cells, got " + std::to_string(cells.size()));
        }
        for (std::size_t i = 0; i < m; ++i) {
            losses(r - 1, i) = parse_double(cells[i], path, r + 1);
        }
    }
    return LossPanel(std::move(losses), header);
}

void write_loss_panel_csv(const std::string& path, const LossPanel& panel) {
    std::ostringstream out;
    for (std::size_t i = 0; i < panel.n_methods(); ++i) {
        out << (i ? "," : "") << panel.method_ids()[i];
    }
    out << "\n";
    out.precision(17);
    for (std::size_t t = 0; t < panel.n_obs(); ++t) {
        for (std::size_t i = 0; i < panel.n_methods(); ++i) {
            out << (i ? "," : "") << panel.losses()(t, i);
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

StateSeries read_state_series_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) {
        throw ParseError(path + ": need a header row and at least one data row");
    }
    std::vector<std::string> labels;
    labels.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != 2) {
            throw ParseError(path + ":" + std::to_string(r + 1) +
                             ": expected 2 cells (time_index, state_label), got " +
                             std::to_string(cells.size()));
        }
        if (cells[1].empty()) {
            throw ParseError(path + ":" + std::to_string(r + 1) + ": empty state label");
        }
        labels.push_back(cells[1]);
    }
    return StateSeries::infer_alphabet(std::move(labels));
}

void write_state_series_csv(const std::string& path, const StateSeries& states) {
    std::ostringstream out;
    out << "time_index,state_label\n";
    for (std::size_t t = 0; t < states.size(); ++t) {
        out << (t + 1) << "," << states.labels()[t] << "\n";
    }
    write_text_file(path, out.str());
}

std::vector<double> read_factor_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2) {
        throw ParseError(path + ": need a header row and at least one data row");
    }
    std::vector<double> values;
    values.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != 2) {
            throw ParseError(path + ":" + std::to_string(r + 1) +
                             ": expected 2 cells (time, value), got " + std::to_string(cells.size()));
        }
        values.push_back(parse_double(cells[1], path, r + 1));
    }
    return values;
}

CsvTable read_csv(const std::string& path) {
    const auto lines = read_lines(path);
    CsvTable table;
    bool have_header = false;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (!lines[r].empty() && lines[r][0] == '#') {
            continue;  // comment lines carry run metadata
        }
        if (!have_header) {
            table.header = split_csv_line(lines[r]);
            have_header = true;
            continue;
        }
        auto cells = split_csv_line(lines[r]);
        if (cells.size() != table.header.size()) {
            throw ParseError(path + ":" + std::to_string(r + 1) + ": expected " +
                             std::to_string(table.header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) {
        throw ParseError(path + ": empty file");
    }
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ostringstream out;
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
    write_text_file(path, out.str());
}

std::string mcs_report_json(const std::vector<std::pair<std::string, ConfidenceSetResult>>& results,
                            double alpha, int bootstrap_b, int block_len, RandomStream seed) {
    nlohmann::json root;
    root["version"] = kVersion;
    root["alpha"] = alpha;
    root["B"] = bootstrap_b;
    root["block_len"] = block_len;
    root["seed"] = seed.seed;
    root["stream"] = seed.stream_id;
    root["states"] = nlohmann::json::array();
    for (const auto& [state, res] : results) {
        nlohmann::json s;
        s["state"] = state;
        s["insufficient_data"] = res.insufficient_data;
        if (!res.note.empty()) {
            s["note"] = res.note;
        }
        if (!res.warnings.empty()) {
            s["warnings"] = res.warnings;
        }
        s["surviving"] = res.surviving;
        s["final_p_value"] = res.final_p_value;
        s["mcs_p_values"] = res.mcs_p_values;
        s["trace"] = nlohmann::json::array();
        for (const auto& rec : res.trace) {
            s["trace"].push_back({{"eliminated", rec.eliminated},
                                  {"T_max", rec.t_max},
                                  {"p_step", rec.p_step},
                                  {"p_mcs", rec.p_mcs}});
        }
        root["states"].push_back(std::move(s));
    }
    return root.dump(2) + "\n";
}

std::vector<std::pair<std::string, ConfidenceSetResult>> parse_mcs_report_json(
    const std::string& text) {
    const auto root = nlohmann::json::parse(text);
    std::vector<std::pair<std::string, ConfidenceSetResult>> out;
    for (const auto& s : root.at("states")) {
        ConfidenceSetResult res;
        res.alpha = root.at("alpha").get<double>();
        res.insufficient_data = s.at("insufficient_data").get<bool>();
        if (s.contains("note")) {
            res.note = s.at("note").get<std::string>();
        }
        if (s.contains("warnings")) {
            res.warnings = s.at("warnings").get<std::vector<std::string>>();
        }
        res.surviving = s.at("surviving").get<std::vector<std::string>>();
        res.final_p_value = s.at("final_p_value").get<double>();
        res.mcs_p_values = s.at("mcs_p_values").get<std::map<std::string, double>>();
        for (const auto& rec : s.at("trace")) {
            res.trace.push_back({rec.at("eliminated").get<std::string>(),
                                 rec.at("T_max").get<double>(), rec.at("p_step").get<double>(),
                                 rec.at("p_mcs").get<double>()});
        }
        out.emplace_back(s.at("state").get<std::string>(), std::move(res));
    }
    return out;
}

CsvTable study_to_csv(const StudyResult& study) {
    CsvTable table;
    if (study.cells.empty()) {
        table.header = {"statistic", "estimate", "mc_se"};
        return table;
    }
    for (const auto& [key, value] : study.cells.front().params) {
        table.header.push_back(key);
    }
    table.header.insert(table.header.end(), {"statistic", "estimate", "mc_se"});
    for (const auto& cell : study.cells) {
        std::vector<std::string> row;
        for (const auto& [key, value] : cell.params) {
            row.push_back(value);
        }
        char buf[40];
        row.push_back(cell.statistic);
        std::snprintf(buf, sizeof(buf), "%.10g", cell.estimate);
        row.emplace_back(buf);
        std::snprintf(buf, sizeof(buf), "%.10g", cell.mc_se);
        row.emplace_back(buf);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string study_to_text(const StudyResult& study) {
    std::string kind;
    for (const auto& [k, v] : study.config) {
        if (k == "study") {
            kind = v;
        }
    }
    std::ostringstream out;
    for (const auto& [k, v] : study.config) {
        out << k << "=" << v << "  ";
    }
    out << "\n\n";

    char buf[64];
    const auto cell_value = [&](const std::vector<std::pair<std::string, std::string>>& params,
                                const char* stat) {
        const StudyCell* c = study.find(params, stat);
        if (c == nullptr) {
            return std::string("      --");
        }
        std::snprintf(buf, sizeof(buf), "%8.3f", c->estimate);
        return std::string(buf);
    };

    if (kind == "rejection") {
        out << "  delta1       v  P(|T1|>c1)  P(|T2|>c2)  P(|Th|>ch)  P(rej & d2bar<0)\n";
        std::vector<std::vector<std::pair<std::string, std::string>>> points;
        for (const auto& c : study.cells) {
            if (std::find(points.begin(), points.end(), c.params) == points.end()) {
                points.push_back(c.params);
            }
        }
        for (const auto& point : points) {
            std::snprintf(buf, sizeof(buf), "%8s%8s", point[0].second.c_str(),
                          point[1].second.c_str());
            out << buf;
            out << "  " << cell_value(point, "rej_t_state1") << "  "
                << cell_value(point, "rej_t_state2") << "  " << cell_value(point, "rej_wald")
                << "    " << cell_value(point, "dir_error_state2") << "\n";
        }
        return out.str();
    }
    if (kind == "power") {
        out << "      mu       n    MCS size  CMCS size (s1)  CMCS size (s2)\n";
        std::vector<std::vector<std::pair<std::string, std::string>>> points;
        for (const auto& c : study.cells) {
            if (std::find(points.begin(), points.end(), c.params) == points.end()) {
                points.push_back(c.params);
            }
        }
        for (const auto& point : points) {
            std::snprintf(buf, sizeof(buf), "%8s%8s", point[0].second.c_str(),
                          point[1].second.c_str());
            out << buf;
            out << "  " << cell_value(point, "avg_size_mcs") << "      "
                << cell_value(point, "avg_size_cmcs_state1") << "      "
                << cell_value(point, "avg_size_cmcs_state2") << "\n";
        }
        return out.str();
    }
    // fall back to one line per cell
    for (const auto& c : study.cells) {
        for (const auto& [k, v] : c.params) {
            out << k << "=" << v << " ";
        }
        std::snprintf(buf, sizeof(buf), "%s = %.6g (se %.3g)\n", c.statistic.c_str(), c.estimate,
                      c.mc_se);
        out << buf;
    }
    return out.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path + ": cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    out << text;
}

}  // namespace cmcs::io
