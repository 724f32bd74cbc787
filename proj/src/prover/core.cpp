#include "ucv/prover/core.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <thread>

namespace ucv::prover {

const char* kind_name(ObligationKind k) {
  switch (k) {
    case ObligationKind::kDecode: return "decode";
    case ObligationKind::kExec: return "exec";
    case ObligationKind::kXlateUcode: return "xlate-ucode";
    case ObligationKind::kSingleInstruction: return "single-instruction";
  }
  return "?";
}

BitVec SymInputs::var(const std::string& name, unsigned width) {
  for (const auto& [n, v] : vars_) {
    if (n != name) continue;
    if (v.width() != width) throw std::invalid_argument("SymInputs: width mismatch for " + name);
    return v;
  }
  BitVec v = bv_var(g_, width, name);
  vars_.emplace_back(name, v);
  return v;
}

Values SymInputs::evaluate(const Env& env) const {
  Env full = env;
  for (VarId v = 0; v < g_.num_inputs(); ++v)
    if (!full.contains(v)) full.set(v, false);
  Values out;
  for (const auto& [name, v] : vars_) out[name] = bv_eval(v, full);
  return out;
}

ProverOptions options_from_env(ProverOptions base) {
  if (const char* b = std::getenv("UCV_BUDGET")) base.budget_seconds = std::stod(b);
  if (const char* s = std::getenv("UCV_SOLVER")) base.external_solver = s;
  return base;
}

std::string safe_file_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

ObligationResult run_obligation(const Obligation& ob, const ProverOptions& options) {
  ObligationResult r;
  r.name = ob.name;
  r.kind = ob.kind;
  r.variant = ob.variant;
  const auto start = std::chrono::steady_clock::now();
  try {
    Aig g;
    SymInputs in(g);
    Goal goal = ob.build(in);
    SolveOptions so;
    so.budget.seconds = std::min(options.budget_seconds, ob.budget_seconds);
    so.budget.seed = options.seed;
    so.external_solver = options.external_solver;
    if (!options.export_cnf_dir.empty()) {
      std::filesystem::create_directories(options.export_cnf_dir);
      so.export_cnf = options.export_cnf_dir / (safe_file_name(ob.name) + ".cnf");
    }
    BitVec bad = bv_land(conjunction(goal.assumptions), bv_lnot(goal.holds));
    ProofResult pr = prove_unsat(bad, so);
    r.verdict = pr.verdict;
    r.stats = pr.stats;
    r.cnf_vars = pr.cnf_vars;
    r.cnf_clauses = pr.cnf_clauses;
    if (!pr.solver_called) r.notes.push_back("goal simplified to a constant; no solver call");
    if (pr.verdict == ProofVerdict::kCounterexample) {
      r.inputs = in.evaluate(pr.counterexample);
      r.replay = ob.replay(r.inputs);
      if (!r.replay->reproduced) r.error = "counterexample did not replay on the concrete models";
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Divergence replay_counterexample(const Obligation& ob, const ObligationResult& result) {
  if (result.verdict != ProofVerdict::kCounterexample)
    throw ReplayError("replay: obligation " + ob.name + " has no counterexample");
  return ob.replay(result.inputs);
}

std::vector<ObligationResult> run_jobs(const std::vector<Obligation>& obligations, const ProverOptions& options,
                                       const std::function<void(const ObligationResult&)>& on_done) {
  std::vector<ObligationResult> results(obligations.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < obligations.size(); i = next++) {
      results[i] = run_obligation(obligations[i], options);
      if (on_done) {
        std::lock_guard<std::mutex> lock(done_mutex);
        on_done(results[i]);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(obligations.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace ucv::prover
