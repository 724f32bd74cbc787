#include "ucv/sat/equiv.hpp"

#include <stdexcept>

#include "ucv/sat/dimacs.hpp"

namespace ucv {

const char* to_string(ProofVerdict v) {
  switch (v) {
    case ProofVerdict::kProved: return "proved";
    case ProofVerdict::kCounterexample: return "counterexample";
    case ProofVerdict::kTimeout: return "timeout";
  }
  return "?";
}

BitVec conjunction(const std::vector<BitVec>& bits) {
  BitVec acc = bv_true();
  for (const auto& b : bits) acc = bv_land(acc, b);
  return acc;
}

ProofResult prove_unsat(const BitVec& bad, const SolveOptions& options) {
  if (bad.width() != 1) throw BitVecError("prove_unsat: goal must be 1 bit wide");
  ProofResult result;
  if (bad.is_false()) {
    result.verdict = ProofVerdict::kProved;
    return result;
  }
  sat::Cnf cnf = sat::tseitin_encode(bad);
  result.cnf_vars = static_cast<std::size_t>(cnf.num_vars);
  result.cnf_clauses = cnf.clauses.size();
  if (!options.export_cnf.empty()) sat::export_dimacs(cnf, options.export_cnf);

  result.solver_called = true;
  sat::SatResult sr = sat::solve(cnf, options.budget);
  result.stats = sr.stats;

  if (!options.external_solver.empty()) {
    sat::SatResult ext = sat::run_external_solver(options.external_solver, cnf);
    bool conflict = (ext.verdict == sat::Verdict::kSat && sr.verdict == sat::Verdict::kUnsat) ||
                    (ext.verdict == sat::Verdict::kUnsat && sr.verdict == sat::Verdict::kSat);
    if (conflict) throw std::runtime_error("embedded and external solver verdicts disagree");
  }

  switch (sr.verdict) {
    case sat::Verdict::kUnsat:
      result.verdict = ProofVerdict::kProved;
      break;
    case sat::Verdict::kTimeout:
      result.verdict = ProofVerdict::kTimeout;
      break;
    case sat::Verdict::kSat:
      if (bv_eval(bad, sr.env) != 1) throw std::logic_error("prove_unsat: model does not replay on the goal");
      result.verdict = ProofVerdict::kCounterexample;
      result.counterexample = std::move(sr.env);
      break;
  }
  return result;
}

ProofResult prove_equal(const BitVec& a, const BitVec& b, const std::vector<BitVec>& assumptions,
                        const SolveOptions& options) {
  if (a.width() != b.width()) throw BitVecError("prove_equal: width mismatch");
  if (a.same_as(b)) return ProofResult{ProofVerdict::kProved, {}, {}, false, 0, 0};
  BitVec bad = bv_land(conjunction(assumptions), bv_ne(a, b));
  return prove_unsat(bad, options);
}

}  // namespace ucv
