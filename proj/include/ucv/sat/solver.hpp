#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucv/sat/cnf.hpp"

namespace ucv::sat {

struct Budget {
  double seconds = 300.0;
  std::uint64_t max_conflicts = 0;  // 0 = unlimited
  std::uint64_t seed = 0;
};

struct SatStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  double seconds = 0.0;
};

enum class Verdict { kSat, kUnsat, kTimeout };

const char* to_string(Verdict v);

struct SatResult {
  Verdict verdict = Verdict::kTimeout;
  std::vector<bool> model;  // by CNF variable; index 0 unused
  Env env;                  // model projected onto the AIG inputs
  SatStats stats;
  // Unsat claimed by an external solver; not re-checked here.
  bool externally_claimed = false;
};

// CDCL search: two watched literals, first-UIP learning with clause
// minimisation, VSIDS, phase saving, Luby restarts and activity-based
// learnt clause reduction. A sat verdict is only returned after the model
// passes check_model.
SatResult solve(const Cnf& cnf, const Budget& budget = {});

}  // namespace ucv::sat
