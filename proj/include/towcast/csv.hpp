#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace towcast {

/// Splits one CSV record. Handles RFC-4180 quoting ("" escapes a quote).
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

/// Shortest decimal representation that round-trips the exact double.
std::string fmt_double(double v);

/// fmt_double for present values, empty string for missing.
std::string fmt_optional(const std::optional<double>& v);

std::optional<double> parse_double_field(std::string_view field);

/// Line-oriented CSV reader. Lines starting with '#' are skipped as comments.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next data record; returns false at end of stream.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number of the record last returned by next().
    long line_number() const { return line_number_; }

private:
    std::istream& in_;
    long line_number_ = 0;
    long current_line_ = 0;
};

}  // namespace towcast
