#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Minimal RFC 4180 reader/writer. Numbers are written in shortest
// round-trip form with a '.' decimal point and no grouping.
namespace lcurve::csv {

std::string quote(std::string_view field);
std::string number(double v);
std::string number(std::int64_t v);
inline std::string number(int v) { return number(static_cast<std::int64_t>(v)); }

void write_row(std::ostream& out, const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws ParseError(line 1) when the column is absent.
  std::size_t column(std::string_view name) const;
};

/// Quoted fields may contain commas, doubled quotes and line breaks.
/// Throws ParseError on unterminated quotes or ragged rows.
Table read(std::istream& in);

double to_double(std::string_view s, std::size_t line);
std::int64_t to_int(std::string_view s, std::size_t line);

}  // namespace lcurve::csv
