#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nvcav/errors.hpp"

namespace nvcav {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);  // throws ValidationError

// Minimal comma-separated table. Lines starting with '#' are comments and are
// skipped on read, which lets every writer prepend a provenance block while
// keeping files self round-trippable. Cells may not contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a required column; throws ValidationError naming the column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> numeric_column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

void write_csv(std::ostream& out, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
void write_csv_file(const std::filesystem::path& path,
                    const std::vector<std::string>& comments,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

}  // namespace nvcav
