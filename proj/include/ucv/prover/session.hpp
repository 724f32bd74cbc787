#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ucv/prover/xlate.hpp"

namespace ucv::prover {

// Composition record for one variant: every lemma it rests on and the
// concrete agreement samples.
struct Certificate {
  std::string variant;
  std::vector<ObligationResult> lemmas;
  unsigned samples = 0;
  std::string text() const;
};

struct SingleInstructionResult {
  ObligationResult result;
  std::vector<std::string> missing;  // dependencies not yet proved
  unsigned samples = 0;
  unsigned sample_failures = 0;
  std::string first_failure;
  std::optional<Certificate> certificate;
};

// Lemma results for one design, cached by obligation name. Rerunning a
// selector reuses proved results.
class ProofSession {
 public:
  ProofSession(const design::Design& d, ProverOptions options);

  const design::Design& design() const { return design_; }
  const ProverOptions& options() const { return options_; }

  std::vector<ObligationResult> prove_decode();
  std::vector<ObligationResult> prove_exec();
  XlatePipeline prove_xlate(const std::string& variant);
  XlatePipeline prove_xlate(const VariantQuery& q);

  // Dependencies: the variant's decode lemma, its xlate proof and the exec
  // lemma of every uop shape it reaches. Missing ones are named, not run.
  std::vector<std::string> dependencies(const std::string& variant) const;
  SingleInstructionResult prove_single_instruction(const std::string& variant, unsigned samples = 64);
  // Runs whatever dependencies are not yet cached, then the instruction.
  SingleInstructionResult prove_instruction_with_dependencies(const std::string& variant);

  // A single decode or exec obligation by name, e.g. "exec/AND@8x64".
  std::optional<ObligationResult> run_named(const std::string& name);

  // Runs a selector: "decode", "exec", "xlate/<variant>", "instr <variant>"
  // (dependencies included), an obligation name, or "all".
  std::vector<ObligationResult> run(const std::string& selector);

  std::optional<ObligationResult> cached(const std::string& name) const;
  std::vector<ObligationResult> all_results() const;
  const std::vector<Certificate>& certificates() const { return certificates_; }
  const std::map<std::string, XlatePipeline>& pipelines() const { return pipelines_; }

 private:
  std::vector<ObligationResult> run_batch(const std::vector<Obligation>& obligations);
  void store(const ObligationResult& r);
  ObligationResult pipeline_result(const XlatePipeline& p, const std::string& variant) const;

  const design::Design& design_;
  ProverOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, ObligationResult> results_;
  std::vector<std::string> order_;
  std::map<std::string, XlatePipeline> pipelines_;
  std::vector<Certificate> certificates_;
};

// Without timings the body depends only on the inputs and the seed.
std::string text_report(const std::vector<ObligationResult>& results, bool timings = true);
std::string html_report(const std::vector<ObligationResult>& results, const std::string& title);
std::string result_line(const ObligationResult& r, bool timings = true);

}  // namespace ucv::prover
