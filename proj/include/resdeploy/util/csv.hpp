#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace resdeploy::util {

// Minimal header-based CSV table (comma separated, no quoting).
// Line numbers in error messages are 1-based file lines.
class CsvTable {
 public:
  static CsvTable read(const std::filesystem::path& path);
  static CsvTable parse(std::istream& in, std::string source_name);

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  bool has_column(const std::string& name) const;
  // Index of a required column; throws ValidationError naming the file.
  std::size_t column(const std::string& name) const;
  std::optional<std::size_t> find_column(const std::string& name) const;

  const std::string& cell(std::size_t row, std::size_t col) const;
  double number(std::size_t row, std::size_t col) const;
  int integer(std::size_t row, std::size_t col) const;
  // File line of a data row, for diagnostics.
  std::size_t line_of(std::size_t row) const { return lines_.at(row); }

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace resdeploy::util
