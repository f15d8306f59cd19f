#pragma once

#include <iosfwd>
#include <string>

#include "qclt/fock.hpp"

namespace qclt {

// shortest round-trip representation
std::string fmt_double(double v);

void write_density(std::ostream& os, const DensityOperator& rho);
DensityOperator read_density(std::istream& is);
void write_diagonal(std::ostream& os, const DiagonalState& d);
DiagonalState read_diagonal(std::istream& is);

// dispatch on the header line: "m K" is a density matrix, "K" a diagonal
State read_state_file(const std::string& path);
void write_state_file(const std::string& path, const State& s);

}  // namespace qclt
