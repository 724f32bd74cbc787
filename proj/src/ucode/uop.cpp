#include "ucv/ucode/uop.hpp"

#include <sstream>

#include "ucv/isa/state.hpp"

namespace ucv::ucode {

namespace {

constexpr const char* kNames[kNumUopOpcodes] = {"MOVSX", "MOVZX", "MOV",       "AND",   "OR",     "XOR",
                                                "SUB",   "SHR",   "SHL",       "ROR",   "JE",     "DLSHFTCNT",
                                                "PSRLQ", "PSLLVQ", "PORQ",     "NOP",   "HALT"};

std::string value_text(const BitVec& v) {
  if (!v.is_concrete()) return "<sym>";
  std::ostringstream s;
  s << "0x" << std::hex << std::uppercase << v.value();
  return s.str();
}

}  // namespace

const char* opcode_name(UopOpcode op) { return kNames[static_cast<unsigned>(op)]; }

std::optional<UopOpcode> opcode_from_name(const std::string& name) {
  for (unsigned i = 0; i < kNumUopOpcodes; ++i)
    if (name == kNames[i]) return static_cast<UopOpcode>(i);
  return std::nullopt;
}

bool is_packed(UopOpcode op) {
  return op == UopOpcode::kDlshftcnt || op == UopOpcode::kPsrlq || op == UopOpcode::kPsllvq || op == UopOpcode::kPorq;
}

unsigned reg_width(RegClass c) {
  switch (c) {
    case RegClass::kGpr:
    case RegClass::kG:
    case RegClass::kImm: return 64;
    case RegClass::kZmmLo:
    case RegClass::kZmmHi:
    case RegClass::kT: return 256;
    case RegClass::kNone: return 0;
  }
  return 0;
}

std::string format_reg(const RegRef& r) {
  if (r.cls == RegClass::kNone) return "-";
  if (r.cls == RegClass::kImm) return "IMM";
  if (!r.index.is_concrete()) return "<symreg>";
  unsigned i = static_cast<unsigned>(r.index.u64());
  switch (r.cls) {
    case RegClass::kGpr: return isa::gpr_name(i);
    case RegClass::kZmmLo: return "ZMM" + std::to_string(i) + "L";
    case RegClass::kZmmHi: return "ZMM" + std::to_string(i) + "H";
    case RegClass::kG: return "G" + std::to_string(i);
    case RegClass::kT: return "T" + std::to_string(i);
    default: return "?";
  }
}

std::string format_uop(const Uop& u) {
  std::ostringstream s;
  s << opcode_name(u.opcode);
  if (u.predicate == Predicate::kZF) s << "<ZF>";
  if (u.predicate == Predicate::kNotZF) s << "<!ZF>";
  if (u.predicate == Predicate::kNever) s << "<NEVER>";
  if (u.opcode == UopOpcode::kNop || u.opcode == UopOpcode::kHalt) return s.str();
  std::vector<std::string> ops;
  auto operand = [&](const RegRef& r) { return r.cls == RegClass::kImm ? value_text(u.imm) : format_reg(r); };
  if (u.opcode != UopOpcode::kJe) ops.push_back(format_reg(u.dst));
  if (u.src1.cls != RegClass::kNone) ops.push_back(operand(u.src1));
  if (u.src2.cls != RegClass::kNone) ops.push_back(operand(u.src2));
  if (u.opcode == UopOpcode::kJe && u.branch_target) {
    std::ostringstream t;
    t << "0x" << std::hex << std::uppercase << *u.branch_target;
    ops.push_back(t.str());
  }
  if (u.opcode == UopOpcode::kPorq) {
    ops.push_back("MM=" + value_text(u.maskmode));
    ops.push_back("K" + (u.opmask.is_concrete() ? std::to_string(u.opmask.u64()) : std::string("<sym>")));
  }
  for (std::size_t i = 0; i < ops.size(); ++i) s << (i == 0 ? " " : ", ") << ops[i];
  s << " (SSZ:" << u.ssz << " DSZ:" << u.dsz << ")";
  return s.str();
}

bool MicroPC::halted() const {
  return prelude.empty() && rom_addr.is_concrete() && rom_addr.u64() == kHaltAddress;
}

}  // namespace ucv::ucode
