#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cfgnn::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Position of a header column, or -1.
  long column(std::string_view name) const;
};

/// Parses RFC-4180 text: quoted fields, doubled quotes, CRLF or LF endings.
/// A leading UTF-8 byte-order mark is skipped. Throws DataError on ragged rows
/// or an unterminated quote.
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& os, const std::vector<std::string>& fields);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view cell);
long long parse_int(std::string_view cell);

/// Writes `contents` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace cfgnn::csv
