#include "rydsim/csv.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace rydsim::csv {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format floating-point value");
  return std::string(buf, end);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_header(std::ostream& os, std::span<const std::string> columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) os << ',';
    os << escape(columns[i]);
  }
  os << '\n';
}

void write_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << format_double(values[i]);
  }
  os << '\n';
}

void write_row(std::ostream& os, std::string_view first, std::span<const double> values) {
  os << escape(first);
  for (double v : values) os << ',' << format_double(v);
  os << '\n';
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
    while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.remove_suffix(1);
    if (item.empty()) throw std::invalid_argument("empty entry in number list");
    if (item.front() == '+') item.remove_prefix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || end != item.data() + item.size())
      throw std::invalid_argument("'" + std::string(item) + "' is not a number");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace rydsim::csv
