#pragma once

#include <iosfwd>

#include "resdeploy/lp/linear_program.hpp"

namespace resdeploy::lp {

// Writes the program in free-format MPS using the row and variable names
// held by the program. A maximize problem is written with OBJSENSE MAX.
void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name = "RESDEPLOY");

}  // namespace resdeploy::lp
