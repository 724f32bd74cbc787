#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ucv/sat/equiv.hpp"

namespace ucv::prover {

enum class ObligationKind { kDecode, kExec, kXlateUcode, kSingleInstruction };
const char* kind_name(ObligationKind k);

// Named primary inputs of one goal, so counterexamples can be turned back
// into concrete bytes, operands and states.
class SymInputs {
 public:
  explicit SymInputs(Aig& g) : g_(g) {}
  // Repeated names return the same input.
  BitVec var(const std::string& name, unsigned width);
  Aig& graph() const { return g_; }
  const std::vector<std::pair<std::string, BitVec>>& all() const { return vars_; }
  // Values of every registered input; inputs the solver left open are 0.
  std::map<std::string, BigUint> evaluate(const Env& env) const;

 private:
  Aig& g_;
  std::vector<std::pair<std::string, BitVec>> vars_;
};

using Values = std::map<std::string, BigUint>;

struct Goal {
  BitVec holds;                   // 1 bit
  std::vector<BitVec> assumptions;
};

// Result of re-running a counterexample on the concrete models.
struct Divergence {
  bool reproduced = false;
  std::string location;  // first diverging register, flag, field or exception
  std::string report;    // key: value lines
};

struct Obligation {
  std::string name;
  ObligationKind kind = ObligationKind::kExec;
  std::string variant;  // catalog variant or uop shape it covers
  double budget_seconds = 300.0;
  std::function<Goal(SymInputs&)> build;
  std::function<Divergence(const Values&)> replay;
};

struct ObligationResult {
  std::string name;
  ObligationKind kind = ObligationKind::kExec;
  std::string variant;
  ProofVerdict verdict = ProofVerdict::kTimeout;
  double seconds = 0.0;
  sat::SatStats stats;
  std::size_t cnf_vars = 0, cnf_clauses = 0;
  Values inputs;                       // counterexample inputs
  std::optional<Divergence> replay;    // set for counterexamples
  std::string error;                   // precheck failure, replay failure, missing dependency
  std::vector<std::string> notes;

  bool proved() const { return verdict == ProofVerdict::kProved && error.empty(); }
};

struct ProverOptions {
  double budget_seconds = 300.0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string external_solver;
  std::filesystem::path export_cnf_dir;  // one DIMACS file per obligation when set
};

ProverOptions options_from_env(ProverOptions base = {});

// Builds and discharges the goal. A satisfiable goal is replayed
// concretely; a replay that does not reproduce the divergence is reported
// as an error rather than a counterexample.
ObligationResult run_obligation(const Obligation& ob, const ProverOptions& options);

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Re-runs the concrete models on a counterexample of `result`.
Divergence replay_counterexample(const Obligation& ob, const ObligationResult& result);

// Runs independent obligations on `options.jobs` worker threads. Results
// come back in input order.
std::vector<ObligationResult> run_jobs(const std::vector<Obligation>& obligations, const ProverOptions& options,
                                       const std::function<void(const ObligationResult&)>& on_done = {});

std::string safe_file_name(const std::string& name);

}  // namespace ucv::prover
