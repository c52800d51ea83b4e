#pragma once

// Minimal RFC 4180-style CSV helpers used by every table format.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voxcue::csv {

std::vector<std::string> split_line(std::string_view line);
std::string quote(std::string_view field);

/// Reads the next data line, skipping blank lines and lines starting with '#'.
/// Strips a trailing '\r' and a leading UTF-8 BOM.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no);

/// Decimal double with at least 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Parses a whole field as a finite double; nullopt if it is not one.
std::optional<double> parse_double(std::string_view s);

std::string trim(std::string_view s);

}  // namespace voxcue::csv
