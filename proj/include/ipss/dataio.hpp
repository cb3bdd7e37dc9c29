#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ipss {

enum class ResponseKind { continuous, binary };

struct Response {
    ResponseKind kind = ResponseKind::continuous;
    std::vector<double> values;  // binary responses hold 0/1
};

// Column-major sample matrix plus response. Rows with missing cells are
// dropped at load time, so a constructed Dataset holds no NaNs.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> columns;  // p columns, each of length n
    Response response;
    std::string response_name = "y";
    std::size_t dropped_rows = 0;  // load metadata, not part of content equality

    std::size_t n() const { return columns.empty() ? response.values.size() : columns.front().size(); }
    std::size_t p() const { return columns.size(); }

    Dataset subset_rows(std::span<const std::size_t> rows) const;
    Dataset subset_columns(std::span<const std::size_t> cols) const;

    // Throws if any entry is NaN, sizes disagree, or n < 4.
    void validate() const;
};

bool content_equal(const Dataset& a, const Dataset& b);

struct StandardizationReport {
    std::vector<double> means;
    std::vector<double> sds;  // population convention (divisor n); 0 for constant columns
    std::vector<std::size_t> constant_columns;
};

enum class ResponseSource { column, file };

struct ResponseSpec {
    ResponseSource source = ResponseSource::column;
    std::string value;  // column name or file path
};

enum class ResponseKindOption { continuous, binary, auto_detect };

// CSV: UTF-8, comma-delimited, header row, one sample per row. Rows with any
// empty or non-numeric cell are dropped and counted. Binary responses must
// take exactly two distinct values; the larger one maps to 1. auto_detect
// treats a response as binary iff it has exactly two distinct values.
Dataset load_csv(const std::string& path, const ResponseSpec& response_spec,
                 ResponseKindOption kind = ResponseKindOption::auto_detect);

// Inverse of load_csv for complete datasets: header then full-precision rows,
// response as the last column.
void write_csv(const Dataset& d, const std::string& path);

// Features-only matrix, same layout conventions as Dataset.
struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // p columns, each of length n
    std::size_t dropped_rows = 0;

    std::size_t n() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t p() const { return columns.size(); }
};

// CSV with a header and no response column; incomplete rows are dropped.
FeatureMatrix load_matrix_csv(const std::string& path);

// Centers and scales every column to mean 0, variance 1 (divisor n). Constant
// columns are zeroed and listed in the report. Idempotent.
std::pair<Dataset, StandardizationReport> standardize_columns(Dataset d);

// Shortest-round-trip formatting used for all numeric file output.
std::string format_double(double x);

}  // namespace ipss
