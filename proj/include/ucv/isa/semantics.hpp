#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "ucv/isa/decode.hpp"
#include "ucv/isa/state.hpp"

namespace ucv::isa {

struct FlagWrite {
  BitVec enable = bv_false();
  BitVec value = bv_false();
};

struct Flags {
  FlagWrite zf, sf, cf;
};

struct ShrdResult {
  BitVec result;
  Flags flags;
  // CF is meaningful only when the masked count does not exceed the width.
  BitVec cf_defined;
};

// dest >> m filled from src, m = amt masked to 6 (n = 64) or 5 bits.
ShrdResult shrd_spec(const BitVec& dest, const BitVec& src, const BitVec& amt, unsigned n);

// Per 64-bit lane: (src2:src1) >> (amt mod 64), then opmask merge/zeroing.
BitVec vpshrdq_spec(const BitVec& src1, const BitVec& src2, const BitVec& amt, const BitVec& opmask_index,
                    const BitVec& maskmode, const std::array<BitVec, kNumKs>& k, const BitVec& old_dest);

enum class AluOp { kAnd, kOr, kXor, kAdd, kSub, kMov, kMovzx, kMovsx, kShr, kShl, kRor };

AluOp alu_op_from_mnemonic(std::string_view mnemonic);
const char* alu_op_name(AluOp op);

struct AluResult {
  BitVec result;  // dsz bits
  Flags flags;
};

// Truncate both operands to ssz, apply the word operation, truncate or
// extend to dsz. ZF/SF come from the dsz result. Logic ops clear CF, ADD/SUB
// set carry/borrow, shifts write flags only for a nonzero masked count (ROR
// touches CF alone), moves write nothing.
AluResult gpr_alu_spec(AluOp op, const BitVec& a, const BitVec& b, unsigned ssz, unsigned dsz);

enum class RegFile { kGpr, kZmm };

struct RegWrite {
  RegFile file;
  BitVec index;  // 5 bits
  BitVec value;  // full register width
};

struct ExecResult {
  BitVec ex = BitVec::zeros(8);
  std::vector<RegWrite> writes;
  Flags flags;
  BitVec cf_defined = bv_true();
  BitVec length = BitVec::zeros(4);
};

BitVec read_gpr(const X86State& s, const BitVec& index);
BitVec read_zmm(const X86State& s, const BitVec& index);
BitVec read_k(const X86State& s, const BitVec& index);

ExecResult x86_exec(const Instruction& instr, const X86State& state);
X86State x86_update(const BitVec& dx, const ExecResult& r, const X86State& state);
X86State x86_model_step(const X86State& state);

}  // namespace ucv::isa
