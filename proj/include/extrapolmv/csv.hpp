#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace extrapolmv::csv {

/// A parsed CSV document. `line_numbers[i]` is the 1-based source line of
/// `rows[i]`, for error reporting.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

/// RFC 4180 style parsing: comma separated, double-quoted fields may contain
/// commas and doubled quotes. Every row must match the header's field count.
Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

/// Parses a full-string double; nullopt on anything else.
std::optional<double> parse_double(std::string_view s);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_text(const std::filesystem::path& path);

}  // namespace extrapolmv::csv
