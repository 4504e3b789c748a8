#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace snar {

struct ObservedSeries {
    std::vector<double> values;
    std::vector<std::string> dates;  ///< empty when the source has no date column
    std::string source;

    std::size_t size() const noexcept { return values.size(); }
    bool has_dates() const noexcept { return !dates.empty(); }
};

/// Reads a comma-separated file with a header row. Blank lines are skipped and fields
/// may be double-quoted. Throws ParseError (with the 1-based file line, header = 1) for
/// unreadable or non-finite numbers and ragged rows, MissingColumnError for absent columns,
/// and Error when the file cannot be opened.
ObservedSeries load_series(const std::string& path, const std::string& value_column,
                           const std::optional<std::string>& date_column = std::nullopt);

ObservedSeries read_series(std::istream& in, const std::string& value_column,
                           const std::optional<std::string>& date_column = std::nullopt,
                           const std::string& source = "<stream>");

/// Splits one CSV record; quotes are removed and "" inside quotes becomes ".
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace snar
