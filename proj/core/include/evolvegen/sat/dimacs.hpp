#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "evolvegen/sat/solver.hpp"

namespace evolvegen::sat {

struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
};

std::string write_dimacs(const Cnf& cnf);
// Writes the solver's original clause database.
std::string write_dimacs(const Solver& solver);

// Throws FormatError carrying the 1-based line number.
Cnf read_dimacs(std::string_view text);

// Loads a CNF into a fresh solver. Returns false if trivially unsat.
bool load(Solver& solver, const Cnf& cnf);

}  // namespace evolvegen::sat
