#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rydsim::csv {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Quotes a field when it contains a comma, quote or line break (RFC 4180).
std::string escape(std::string_view field);

void write_header(std::ostream& os, std::span<const std::string> columns);
void write_row(std::ostream& os, std::span<const double> values);
void write_row(std::ostream& os, std::string_view first, std::span<const double> values);

/// Parses a comma-separated list of numbers, e.g. "1.5, 2, 3e2".
std::vector<double> parse_number_list(std::string_view text);

}  // namespace rydsim::csv
