#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ucv/design/design.hpp"
#include "ucv/prover/obligations.hpp"

namespace ucv::prover {

// Instruction fields a query can fix or leave symbolic: op1, op2, op3, imm,
// opmask, zeroing. "opcode" may be requested symbolic but is always refused.
struct VariantQuery {
  std::string variant;                  // e.g. "SHRD/reg64-imm8"
  std::map<std::string, BigUint> fixed;
  std::set<std::string> symbolic;
  bool lock = false;                    // encode with a LOCK prefix
};

// The queries behind the shipped xlate proofs: register operands pinned,
// immediate (and for VPSHRDQ opmask and masking mode) symbolic.
VariantQuery default_query(const std::string& variant);

class PrecheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LegalInstance {
  bool consistent = false;
  std::string reason;                  // why no instance exists
  std::string variant;
  unsigned entry_id = 0;
  std::vector<BytePattern> pattern;    // search template the bytes came from
  std::vector<std::uint8_t> bytes;
  isa::Instruction instr;              // concrete decode of `bytes`
};

// Searches for an encoding of the variant that decodes without exception and
// honours the fixed fields.
LegalInstance find_legal_instance(const VariantQuery& q, const design::Design& d,
                                  const ProverOptions& options = {});

// Base bytes with the bits behind each symbolic field opened.
struct GeneralInstance {
  LegalInstance base;
  VariantQuery query;
  std::vector<BytePattern> pattern;
  std::vector<std::string> assumptions;  // human-readable side conditions
  std::string fingerprint() const;
};

struct GeneralizeResult {
  bool ok = false;
  std::string reason;
  std::vector<std::uint8_t> witness;  // an opened encoding that raises an exception
  GeneralInstance instance;
};

// Opens the requested fields and proves that no opened encoding raises a
// decode exception (under the side conditions recorded in `assumptions`).
GeneralizeResult generalize_instance(const LegalInstance& base, const VariantQuery& q, const design::Design& d,
                                     const ProverOptions& options = {});

// Symbolic decode of a general instance inside `in`. Entry and size are the
// base instance's; `assumptions` include dx = 0, justified by generalization.
struct SymbolicInstr {
  isa::Instruction instr;
  std::vector<BitVec> assumptions;
};
SymbolicInstr instantiate(const GeneralInstance& gi, SymInputs& in);
std::vector<std::uint8_t> instance_bytes(const GeneralInstance& gi, const Values& v);

struct FixedSequenceCheck;

// Proof that every opened instance translates to the base instance's uop
// sequence. Only check_fixed_uop_sequence creates one.
class FixedSequenceToken {
 public:
  const std::string& fingerprint() const { return fingerprint_; }
  unsigned rom_addr() const { return rom_addr_; }

 private:
  friend FixedSequenceCheck check_fixed_uop_sequence(const GeneralInstance&, const design::Design&,
                                                     const ProverOptions&);
  FixedSequenceToken(std::string fp, unsigned addr) : fingerprint_(std::move(fp)), rom_addr_(addr) {}
  std::string fingerprint_;
  unsigned rom_addr_ = 0;
};

struct FixedSequenceCheck {
  bool ok = false;
  std::optional<FixedSequenceToken> token;
  std::string reason;
  // On violation: two instances and the uop sequences they execute.
  std::vector<std::uint8_t> bytes_a, bytes_b;
  std::vector<std::string> uops_a, uops_b;
  double seconds = 0.0;
};

FixedSequenceCheck check_fixed_uop_sequence(const GeneralInstance& gi, const design::Design& d,
                                            const ProverOptions& options = {});

// Architectural state after x86_exec versus after the translated uops.
Obligation xlate_obligation(const GeneralInstance& gi, const design::Design& d);

// Throws PrecheckError unless `token` certifies this instance.
ObligationResult prove_xlate_ucode_correctness(const GeneralInstance& gi, const design::Design& d,
                                               const std::optional<FixedSequenceToken>& token,
                                               const ProverOptions& options = {});

struct XlatePipeline {
  LegalInstance base;
  std::optional<GeneralizeResult> general;
  std::optional<FixedSequenceCheck> fixed;
  std::optional<ObligationResult> proof;
  std::string failed_stage;  // empty when the proof ran
};

XlatePipeline run_xlate_pipeline(const VariantQuery& q, const design::Design& d, const ProverOptions& options = {});

}  // namespace ucv::prover
