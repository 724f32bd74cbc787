#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ucv/bitvec/bitvec.hpp"

namespace ucv::sat {

// DIMACS-style literal: +v / -v for variable v >= 1.
using CnfLit = int;
using Clause = std::vector<CnfLit>;

struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
  // AIG node index -> CNF variable.
  std::unordered_map<std::uint32_t, int> var_map;
  // AIG input var id -> CNF variable, for every input in the goal's cone.
  std::unordered_map<VarId, int> input_vars;

  int new_var() { return ++num_vars; }
  void add(Clause c) { clauses.push_back(std::move(c)); }
};

// Equisatisfiable encoding of "goal = 1" (goal must be one bit wide).
Cnf tseitin_encode(const BitVec& goal);

// True iff every clause has a satisfied literal. `model` is indexed by CNF
// variable (index 0 unused) and must cover all of them.
bool check_model(const Cnf& cnf, const std::vector<bool>& model);

// Projects a CNF model onto the goal's AIG inputs.
Env model_to_env(const Cnf& cnf, const std::vector<bool>& model);

}  // namespace ucv::sat
