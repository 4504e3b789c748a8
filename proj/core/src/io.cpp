#include "snar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "snar/errors.hpp"

namespace snar {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumnError(name);
    return static_cast<std::size_t>(it - header.begin());
}

double parse_number(const std::string& cell, std::size_t row) {
    const std::string s = trim(cell);
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (!s.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw ParseError("cannot parse '" + s + "' as a number", row);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + s + "'", row);
    return v;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(trim(field));
    return out;
}

ObservedSeries read_series(std::istream& in, const std::string& value_column,
                           const std::optional<std::string>& date_column, const std::string& source) {
    ObservedSeries out;
    out.source = source;
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw ParseError("missing header row", std::max<std::size_t>(row, 1));
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

    const std::size_t vcol = column_index(header, value_column);
    std::optional<std::size_t> dcol;
    if (date_column) dcol = column_index(header, *date_column);

    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             row);
        }
        out.values.push_back(parse_number(cells[vcol], row));
        if (dcol) out.dates.push_back(cells[*dcol]);
    }
    return out;
}

ObservedSeries load_series(const std::string& path, const std::string& value_column,
                           const std::optional<std::string>& date_column) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_series(in, value_column, date_column, path);
}

}  // namespace snar
