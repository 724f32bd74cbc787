#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ucv/bitvec/bitvec.hpp"

namespace ucv::ucode {

enum class UopOpcode : unsigned {
  kMovsx, kMovzx, kMov, kAnd, kOr, kXor, kSub, kShr, kShl, kRor, kJe,
  kDlshftcnt, kPsrlq, kPsllvq, kPorq, kNop, kHalt,
};
inline constexpr unsigned kNumUopOpcodes = 17;

const char* opcode_name(UopOpcode op);
std::optional<UopOpcode> opcode_from_name(const std::string& name);
bool is_packed(UopOpcode op);

enum class RegClass : unsigned { kNone, kGpr, kZmmLo, kZmmHi, kG, kT, kImm };

inline constexpr unsigned kNumG = 16;
inline constexpr unsigned kNumT = 32;

struct RegRef {
  RegClass cls = RegClass::kNone;
  BitVec index = BitVec::zeros(5);

  static RegRef none() { return {}; }
  static RegRef imm() { return {RegClass::kImm, BitVec::zeros(5)}; }
  static RegRef make(RegClass c, unsigned i) { return {c, BitVec::constant(5, i)}; }
};

std::string format_reg(const RegRef& r);
unsigned reg_width(RegClass c);  // bits held by a register of this class

enum class Predicate : unsigned { kNone = 0, kZF = 1, kNotZF = 2, kNever = 3 };

enum FlagBits : unsigned { kFlagZF = 1, kFlagSF = 2, kFlagCF = 4 };

// A fully expanded uop as consumed by the execution model.
struct Uop {
  UopOpcode opcode = UopOpcode::kNop;
  RegRef dst, src1, src2;
  BitVec imm = BitVec::zeros(64);  // value of the immediate slot
  Predicate predicate = Predicate::kNone;
  unsigned ssz = 64, dsz = 64;
  unsigned flag_mask = 0;
  BitVec maskmode = BitVec::zeros(1);  // PORQ: 1 = zeroing
  BitVec opmask = BitVec::zeros(3);    // PORQ: opmask register index
  std::optional<unsigned> branch_target;  // JE
};

std::string format_uop(const Uop& u);

inline constexpr unsigned kRomAddrBits = 10;
inline constexpr unsigned kRomSize = 1u << kRomAddrBits;
inline constexpr unsigned kHaltAddress = kRomSize - 1;

// Instruction operands the microsequencer substitutes into ROM templates.
struct SideParams {
  BitVec arg0 = BitVec::zeros(5), arg1 = BitVec::zeros(5), arg2 = BitVec::zeros(5);
  BitVec imm = BitVec::zeros(8);
  BitVec opmask = BitVec::zeros(3);
  BitVec maskmode = BitVec::zeros(1);
  unsigned size = 64;
};

struct MicroPC {
  std::vector<Uop> prelude;
  BitVec rom_addr = BitVec::constant(kRomAddrBits, kHaltAddress);
  SideParams side;

  bool halted() const;  // empty prelude and the halt sentinel
};

}  // namespace ucv::ucode
