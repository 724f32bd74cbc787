#pragma once

#include <compare>
#include <string>
#include <vector>

#include "ucv/design/design.hpp"
#include "ucv/prover/core.hpp"

namespace ucv::prover {

// One decode byte pattern: bits under `fixed_mask` take `fixed_value`, the
// rest come from the input named `var` (empty when fully fixed).
struct BytePattern {
  std::uint8_t fixed_mask = 0xFF;
  std::uint8_t fixed_value = 0;
  std::string var;

  static BytePattern fixed(std::uint8_t v) { return {0xFF, v, ""}; }
};

struct DecodeCase {
  std::string label;
  std::vector<BytePattern> bytes;
};

// Cases covering one catalog entry: prefix-presence vectors, REX presence,
// full and truncated lengths and an over-long encoding.
std::vector<DecodeCase> decode_cases_for_entry(unsigned entry_id);
std::vector<DecodeCase> decode_no_match_cases();

// Escape, opcode, ModR/M and immediate bytes of an entry (EVEX: 62 and the
// payload with mm fixed). Open bytes are named "<tag>.<role>" with role one
// of p0, p1, p2, modrm, imm.
std::vector<BytePattern> encoding_pattern(const isa::InstListEntry& e, const std::string& tag);

BitVec materialize(const BytePattern& p, SymInputs& in);
std::vector<std::uint8_t> concretize(const DecodeCase& c, const Values& v);

// get-instr(dut_decode(bytes)) = x86_decode(bytes) over every case.
Obligation decode_obligation(const design::Design& d, unsigned entry_id);
Obligation decode_no_match_obligation(const design::Design& d);
// Both decoders raise #UD: LOCK on SHRD, and EVEX zero-masking with k0.
Obligation decode_lock_ud_obligation(const design::Design& d);
Obligation decode_evex_k0_obligation(const design::Design& d);
std::vector<Obligation> decode_obligations(const design::Design& d);
std::string decode_obligation_name(unsigned entry_id);

struct ExecShape {
  ucode::UopOpcode op = ucode::UopOpcode::kNop;
  unsigned ssz = 64, dsz = 64;
  std::string name() const;  // e.g. "AND@8x64"
  auto operator<=>(const ExecShape&) const = default;
};

// Canonical encodings used to instantiate a translatable variant.
std::vector<std::uint8_t> canonical_bytes(const std::string& variant);

// Uop shapes reachable from a variant's translation: the prelude plus every
// ROM row reachable from the trap address.
std::vector<ExecShape> exec_shapes_for(const std::string& variant, const design::Design& d);
std::vector<ExecShape> exec_suite(const design::Design& d);

// get-results(dut_exec) = uop_semantics with symbolic operands, predicate,
// flag mask, masking mode and lane mask.
Obligation exec_obligation(const design::Design& d, ExecShape shape);
std::vector<Obligation> exec_obligations(const design::Design& d);
std::string exec_obligation_name(const ExecShape& s);

}  // namespace ucv::prover
