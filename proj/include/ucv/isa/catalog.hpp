#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ucv::isa {

enum class OpcodeMap : unsigned { kOneByte = 0, k0F = 1, k0F38 = 2, k0F3A = 3 };
enum class Encoding { kLegacy, kEvex };

enum class OperandSource { kModrmReg, kModrmRm, kEvexVvvv, kImm8, kRegCL };
enum class OperandKind { kGpr, kZmm, kImm };

struct OperandSpec {
  OperandSource source;
  OperandKind kind;
  unsigned fixed_size = 0;  // 0: the instruction's operand size
};

enum class Phase { kDecode, kExecute, kOutOfScope };

enum class ExceptionCondition {
  kLockPrefix,             // any LOCK prefix
  kLockRegisterDest,       // LOCK with a register destination
  kEvexLegacyPrefix,       // 66/F2/F3/F0 or REX ahead of 0x62
  kEvexReservedBits,       // fixed EVEX payload bits not at their required value
  kEvexZeroMaskK0,         // EVEX.z set with opmask k0
  kEvexBroadcastRegister,  // EVEX.b set on a register-only form
  kNonCanonicalAddress,    // memory forms only
};

struct ExceptionSpec {
  ExceptionCondition condition;
  unsigned code;
  Phase phase;
  std::string text;
};

struct InstListEntry {
  unsigned id = 0;
  std::string mnemonic;
  std::string variant;  // e.g. "reg-imm8"; sizes are appended by variant_id
  Encoding encoding = Encoding::kLegacy;
  OpcodeMap map = OpcodeMap::kOneByte;
  unsigned opcode = 0;
  int group_digit = -1;  // ModR/M.reg when it extends the opcode
  std::vector<OperandSpec> operands;
  std::vector<unsigned> sizes;
  std::vector<ExceptionSpec> exceptions;
  bool lockable = false;  // LOCK is legal with a memory destination
  std::string evex_class;
  // EVEX requirements (EVEX entries only).
  unsigned evex_pp = 0;
  unsigned evex_w = 0;
  unsigned evex_ll = 0;

  bool has_exception(ExceptionCondition c) const;
  bool has_imm8() const;
};

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The instruction table; entry ids equal their index.
const std::vector<InstListEntry>& load_inst_table();

// Builds and validates a table (duplicate keys and shared operand sources
// are rejected).
std::vector<InstListEntry> build_inst_table(std::vector<InstListEntry> entries);

const InstListEntry& lookup(std::string_view mnemonic, std::string_view variant = "");
const InstListEntry& entry_by_id(unsigned id);

// Entry for (map, opcode, digit) under the given encoding, if any. `digit`
// is consulted only for group opcodes.
std::optional<unsigned> find_entry(Encoding enc, OpcodeMap map, unsigned opcode, unsigned digit);
// True iff some entry uses `opcode` in `map` as a group opcode.
bool is_group_opcode(Encoding enc, OpcodeMap map, unsigned opcode);

// "SHRD/reg64-imm8", "VPSHRDQ/zmm-imm8", "AND/reg32".
std::string variant_id(const InstListEntry& e, unsigned size);

}  // namespace ucv::isa
