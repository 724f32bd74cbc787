#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ucv/sat/solver.hpp"

namespace ucv {

enum class ProofVerdict { kProved, kCounterexample, kTimeout };

const char* to_string(ProofVerdict v);

struct ProofResult {
  ProofVerdict verdict = ProofVerdict::kTimeout;
  Env counterexample;
  sat::SatStats stats;
  bool solver_called = false;
  std::size_t cnf_vars = 0;
  std::size_t cnf_clauses = 0;
};

struct SolveOptions {
  sat::Budget budget;
  // When set, the goal is also handed to this command as DIMACS and the two
  // verdicts must agree.
  std::string external_solver;
  // When set, the CNF of every solver call is written here.
  std::filesystem::path export_cnf;
};

// Proves that `bad` (1 bit) is unsatisfiable. A counterexample is an
// environment under which `bad` evaluates to 1, re-checked by evaluation.
ProofResult prove_unsat(const BitVec& bad, const SolveOptions& options = {});

// Proves assumptions => a == b.
ProofResult prove_equal(const BitVec& a, const BitVec& b, const std::vector<BitVec>& assumptions = {},
                        const SolveOptions& options = {});

// Conjunction of 1-bit vectors (true when empty).
BitVec conjunction(const std::vector<BitVec>& bits);

}  // namespace ucv
