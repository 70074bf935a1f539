#include "resdeploy/lp/mps.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "resdeploy/util/csv.hpp"

namespace resdeploy::lp {

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name) {
  using util::format_double;
  auto row_name = [&](int i) -> const std::string& { return lp.row(i).name; };
  auto col_name = [&](int j) -> const std::string& { return lp.variable_name(j); };

  out << "NAME " << name << '\n';
  if (lp.sense() == Sense::kMaximize) out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n N OBJ\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const char* kind = lp.row(i).relation == Relation::kLessEqual ? "L"
                       : lp.row(i).relation == Relation::kGreaterEqual ? "G"
                                                                       : "E";
    out << ' ' << kind << ' ' << row_name(i) << '\n';
  }

  // Column-major entries with duplicates summed.
  std::vector<std::map<int, double>> cols(lp.num_variables());
  for (int i = 0; i < lp.num_rows(); ++i)
    for (const Term& t : lp.row(i).terms) cols[t.col][i] += t.coef;
  out << "COLUMNS\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (lp.cost()[j] != 0.0) out << ' ' << col_name(j) << " OBJ " << format_double(lp.cost()[j]) << '\n';
    for (const auto& [i, a] : cols[j])
      if (a != 0.0) out << ' ' << col_name(j) << ' ' << row_name(i) << ' ' << format_double(a) << '\n';
    if (lp.cost()[j] == 0.0 && cols[j].empty()) out << ' ' << col_name(j) << " OBJ 0\n";
  }
  out << "RHS\n";
  for (int i = 0; i < lp.num_rows(); ++i)
    if (lp.row(i).rhs != 0.0) out << " RHS " << row_name(i) << ' ' << format_double(lp.row(i).rhs) << '\n';
  out << "BOUNDS\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double lo = lp.lower()[j];
    const double hi = lp.upper()[j];
    const std::string c = col_name(j);
    if (lo == hi) {
      out << " FX BND " << c << ' ' << format_double(lo) << '\n';
      continue;
    }
    if (std::isinf(lo) && std::isinf(hi)) {
      out << " FR BND " << c << '\n';
      continue;
    }
    if (std::isinf(lo)) out << " MI BND " << c << '\n';
    else if (lo != 0.0) out << " LO BND " << c << ' ' << format_double(lo) << '\n';
    if (!std::isinf(hi)) out << " UP BND " << c << ' ' << format_double(hi) << '\n';
  }
  out << "ENDATA\n";
}

}  // namespace resdeploy::lp
