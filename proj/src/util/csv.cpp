#include "resdeploy/util/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "resdeploy/error.hpp"

namespace resdeploy::util {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

CsvTable CsvTable::parse(std::istream& in, std::string source_name) {
  CsvTable t;
  t.source_ = std::move(source_name);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    auto cells = split(trimmed);
    if (t.header_.empty()) {
      t.header_ = std::move(cells);
      continue;
    }
    if (cells.size() != t.header_.size()) {
      throw ValidationError(t.source_ + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header_.size()) + " fields, found " +
                            std::to_string(cells.size()));
    }
    t.rows_.push_back(std::move(cells));
    t.lines_.push_back(lineno);
  }
  if (t.header_.empty()) throw ValidationError(t.source_ + ": missing header");
  return t;
}

bool CsvTable::has_column(const std::string& name) const { return find_column(name).has_value(); }

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  return std::nullopt;
}

std::size_t CsvTable::column(const std::string& name) const {
  if (auto c = find_column(name)) return *c;
  throw ValidationError(source_ + ": missing column '" + name + "'");
}

const std::string& CsvTable::cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& s = cell(row, col);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(source_ + ":" + std::to_string(line_of(row)) + ": column '" +
                          header_[col] + "' is not a number: '" + s + "'");
  }
  return v;
}

int CsvTable::integer(std::size_t row, std::size_t col) const {
  const std::string& s = cell(row, col);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(source_ + ":" + std::to_string(line_of(row)) + ": column '" +
                          header_[col] + "' is not an integer: '" + s + "'");
  }
  return v;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

}  // namespace resdeploy::util
