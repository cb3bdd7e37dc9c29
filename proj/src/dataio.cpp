#include "ipss/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ipss {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_cell(const std::string& cell) {
    std::size_t lo = cell.find_first_not_of(" \t");
    if (lo == std::string::npos) return std::nullopt;
    std::size_t hi = cell.find_last_not_of(" \t");
    const char* begin = cell.data() + lo;
    const char* end = cell.data() + hi + 1;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos)
        lines.pop_back();
    return lines;
}

bool looks_numeric(const std::string& cell) { return parse_cell(cell).has_value(); }

// One value per data row; nullopt marks a missing/invalid cell. Accepts an
// optional single-field header line.
std::vector<std::optional<double>> read_response_file(const std::string& path, std::string& name) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty response file: " + path);
    std::size_t start = 0;
    auto first = split_fields(lines[0]);
    if (first.size() != 1) throw std::runtime_error("response file must have one column: " + path);
    if (!looks_numeric(first[0]) && first[0].find_first_not_of(" \t") != std::string::npos) {
        name = first[0];
        start = 1;
    }
    std::vector<std::optional<double>> values;
    for (std::size_t i = start; i < lines.size(); ++i) {
        auto fields = split_fields(lines[i]);
        if (fields.size() != 1)
            throw std::runtime_error("response file must have one column: " + path);
        values.push_back(parse_cell(fields[0]));
    }
    return values;
}

Response finalize_response(std::vector<double> raw, ResponseKindOption kind) {
    std::set<double> distinct(raw.begin(), raw.end());
    bool binary = kind == ResponseKindOption::binary ||
                  (kind == ResponseKindOption::auto_detect && distinct.size() == 2);
    if (kind == ResponseKindOption::binary && distinct.size() != 2)
        throw std::runtime_error("binary response must have exactly 2 distinct values, found " +
                                 std::to_string(distinct.size()));
    if (!binary) return Response{ResponseKind::continuous, std::move(raw)};
    double high = *distinct.rbegin();
    for (double& v : raw) v = (v == high) ? 1.0 : 0.0;
    return Response{ResponseKind::binary, std::move(raw)};
}

}  // namespace

Dataset Dataset::subset_rows(std::span<const std::size_t> rows) const {
    Dataset out;
    out.feature_names = feature_names;
    out.response_name = response_name;
    out.response.kind = response.kind;
    out.columns.resize(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.columns[j].reserve(rows.size());
        for (std::size_t r : rows) out.columns[j].push_back(columns[j][r]);
    }
    out.response.values.reserve(rows.size());
    for (std::size_t r : rows) out.response.values.push_back(response.values[r]);
    return out;
}

Dataset Dataset::subset_columns(std::span<const std::size_t> cols) const {
    Dataset out;
    out.response = response;
    out.response_name = response_name;
    out.dropped_rows = dropped_rows;
    out.feature_names.reserve(cols.size());
    out.columns.reserve(cols.size());
    for (std::size_t j : cols) {
        out.feature_names.push_back(feature_names[j]);
        out.columns.push_back(columns[j]);
    }
    return out;
}

void Dataset::validate() const {
    if (feature_names.size() != columns.size())
        throw std::runtime_error("feature name count does not match column count");
    std::size_t rows = n();
    if (response.values.size() != rows)
        throw std::runtime_error("response length does not match sample count");
    if (rows < 4) throw std::runtime_error("too few samples: need at least 4 complete rows");
    for (const auto& col : columns) {
        if (col.size() != rows) throw std::runtime_error("ragged column lengths");
        for (double v : col)
            if (!std::isfinite(v)) throw std::runtime_error("non-finite feature value");
    }
    for (double v : response.values) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite response value");
        if (response.kind == ResponseKind::binary && v != 0.0 && v != 1.0)
            throw std::runtime_error("binary response entries must be 0 or 1");
    }
}

bool content_equal(const Dataset& a, const Dataset& b) {
    return a.feature_names == b.feature_names && a.columns == b.columns &&
           a.response.kind == b.response.kind && a.response.values == b.response.values &&
           a.response_name == b.response_name;
}

Dataset load_csv(const std::string& path, const ResponseSpec& response_spec,
                 ResponseKindOption kind) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty CSV file: " + path);
    auto header = split_fields(lines[0]);
    std::size_t width = header.size();

    std::string response_name = "y";
    std::size_t response_col = width;  // width = "not in this file"
    std::vector<std::optional<double>> file_response;
    if (response_spec.source == ResponseSource::column) {
        auto it = std::find(header.begin(), header.end(), response_spec.value);
        if (it == header.end())
            throw std::runtime_error("response column not found: " + response_spec.value);
        response_col = static_cast<std::size_t>(it - header.begin());
        response_name = response_spec.value;
    } else {
        file_response = read_response_file(response_spec.value, response_name);
        if (file_response.size() != lines.size() - 1)
            throw std::runtime_error("response file row count does not match data rows");
    }

    Dataset d;
    d.response_name = response_name;
    for (std::size_t j = 0; j < width; ++j)
        if (j != response_col) d.feature_names.push_back(header[j]);
    d.columns.resize(d.feature_names.size());

    std::vector<double> raw_response;
    std::vector<double> row(width);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_fields(lines[i]);
        if (fields.size() != width)
            throw std::runtime_error("malformed CSV row " + std::to_string(i) + " in " + path);
        bool complete = true;
        for (std::size_t j = 0; j < width; ++j) {
            auto v = parse_cell(fields[j]);
            if (!v) {
                complete = false;
                break;
            }
            row[j] = *v;
        }
        double resp = 0.0;
        if (complete) {
            if (response_spec.source == ResponseSource::column) {
                resp = row[response_col];
            } else {
                auto v = file_response[i - 1];
                if (!v)
                    complete = false;
                else
                    resp = *v;
            }
        }
        if (!complete) {
            ++d.dropped_rows;
            continue;
        }
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < width; ++j)
            if (j != response_col) d.columns[out_j++].push_back(row[j]);
        raw_response.push_back(resp);
    }

    if (raw_response.size() < 4)
        throw std::runtime_error("too few samples: need at least 4 complete rows, found " +
                                 std::to_string(raw_response.size()));
    d.response = finalize_response(std::move(raw_response), kind);
    d.validate();
    return d;
}

FeatureMatrix load_matrix_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error("empty CSV file: " + path);
    FeatureMatrix m;
    m.names = split_fields(lines[0]);
    m.columns.resize(m.names.size());

    std::vector<double> row(m.names.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto fields = split_fields(lines[i]);
        if (fields.size() != m.names.size())
            throw std::runtime_error("malformed CSV row " + std::to_string(i) + " in " + path);
        bool complete = true;
        for (std::size_t j = 0; j < fields.size(); ++j) {
            auto v = parse_cell(fields[j]);
            if (!v) {
                complete = false;
                break;
            }
            row[j] = *v;
        }
        if (!complete) {
            ++m.dropped_rows;
            continue;
        }
        for (std::size_t j = 0; j < row.size(); ++j) m.columns[j].push_back(row[j]);
    }
    if (m.n() < 4)
        throw std::runtime_error("too few samples: need at least 4 complete rows, found " +
                                 std::to_string(m.n()));
    return m;
}

std::string format_double(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& name : d.feature_names) out << name << ',';
    out << d.response_name << '\n';
    std::size_t rows = d.n();
    for (std::size_t i = 0; i < rows; ++i) {
        for (const auto& col : d.columns) out << format_double(col[i]) << ',';
        out << format_double(d.response.values[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<Dataset, StandardizationReport> standardize_columns(Dataset d) {
    StandardizationReport report;
    std::size_t rows = d.n();
    report.means.resize(d.p());
    report.sds.resize(d.p());
    for (std::size_t j = 0; j < d.p(); ++j) {
        auto& col = d.columns[j];
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(rows);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(rows);
        double sd = std::sqrt(var);
        report.means[j] = mean;
        report.sds[j] = sd;
        if (sd == 0.0) {
            report.constant_columns.push_back(j);
            std::fill(col.begin(), col.end(), 0.0);
        } else {
            for (double& v : col) v = (v - mean) / sd;
        }
    }
    return {std::move(d), std::move(report)};
}

}  // namespace ipss
