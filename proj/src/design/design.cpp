#include "ucv/design/design.hpp"

namespace ucv::design {

namespace {

using ucode::RegClass;
using ucode::RegRef;
using ucode::Uop;
using ucode::UopOpcode;

Uop make_uop(UopOpcode op, RegRef dst, RegRef src1, RegRef src2, unsigned ssz, unsigned dsz) {
  Uop u;
  u.opcode = op;
  u.dst = std::move(dst);
  u.src1 = std::move(src1);
  u.src2 = std::move(src2);
  u.ssz = ssz;
  u.dsz = dsz;
  return u;
}

RegRef reg(RegClass c, const BitVec& index) { return {c, bv_resize(index, 5)}; }
RegRef g(unsigned i) { return RegRef::make(RegClass::kG, i); }
RegRef t(unsigned i) { return RegRef::make(RegClass::kT, i); }

unsigned concrete_field(const BitVec& v, const char* what) {
  if (!v.is_concrete()) throw UnsupportedVariant(std::string("translator needs a concrete ") + what);
  return static_cast<unsigned>(v.u64());
}

ucode::SideParams side_of(const isa::Instruction& in) {
  ucode::SideParams s;
  s.arg0 = in.op1;
  s.arg1 = in.op2;
  s.arg2 = in.op3;
  s.imm = in.imm;
  s.opmask = in.opmask;
  s.maskmode = in.zeroing;
  s.size = concrete_field(in.size, "operand size");
  return s;
}

ucode::MicroPC shrd_prelude(const isa::Instruction& in, const Design& d, bool count_in_cl) {
  ucode::MicroPC pc;
  pc.prelude.push_back(make_uop(UopOpcode::kMovsx, g(2), reg(RegClass::kGpr, in.op1), RegRef::none(), 64, 64));
  if (count_in_cl) {
    pc.prelude.push_back(make_uop(UopOpcode::kMovzx, g(3), reg(RegClass::kGpr, in.op3), RegRef::none(), 8, 64));
  } else {
    Uop count = make_uop(UopOpcode::kMovzx, g(3), RegRef::imm(), RegRef::none(), 8, 64);
    count.imm = bv_zext(in.imm, 64);
    pc.prelude.push_back(count);
  }
  pc.rom_addr = BitVec::constant(ucode::kRomAddrBits, d.rom().entry("ent_shrdEvGv_64reg"));
  pc.side = side_of(in);
  return pc;
}

ucode::MicroPC vpshrdq_prelude(const isa::Instruction& in, const Design& d) {
  ucode::MicroPC pc;
  Uop count = make_uop(UopOpcode::kDlshftcnt, t(26), RegRef::imm(), RegRef::none(), 256, 256);
  count.imm = bv_zext(in.imm, 64);
  pc.prelude.push_back(count);
  for (auto [dst, half] : {std::pair{27u, RegClass::kZmmLo}, std::pair{29u, RegClass::kZmmHi}}) {
    Uop u = make_uop(UopOpcode::kPsrlq, t(dst), reg(half, in.op2), RegRef::imm(), 256, 256);
    u.imm = bv_zext(in.imm, 64);
    pc.prelude.push_back(u);
  }
  pc.prelude.push_back(make_uop(UopOpcode::kPsllvq, t(28), reg(RegClass::kZmmLo, in.op3), t(26), 256, 256));
  pc.prelude.push_back(make_uop(UopOpcode::kPsllvq, t(30), reg(RegClass::kZmmHi, in.op3), t(26), 256, 256));
  pc.rom_addr = BitVec::constant(ucode::kRomAddrBits, d.rom().entry("avx_double_shift_or_q"));
  pc.side = side_of(in);
  return pc;
}

}  // namespace

std::string variant_of(const isa::Instruction& in) {
  const auto& e = isa::entry_by_id(concrete_field(in.entry, "catalog entry"));
  return isa::variant_id(e, concrete_field(in.size, "operand size"));
}

Design::Design(RomImage rom) : rom_(std::move(rom)) {
  rom_.validate();
  rules_["SHRD/reg64-imm8"] = [](const isa::Instruction& in, const Design& d) { return shrd_prelude(in, d, false); };
  rules_["SHRD/reg64-cl"] = [](const isa::Instruction& in, const Design& d) { return shrd_prelude(in, d, true); };
  rules_["VPSHRDQ/zmm-imm8"] = [](const isa::Instruction& in, const Design& d) { return vpshrdq_prelude(in, d); };
}

isa::DecodeResult Design::decode(std::span<const BitVec> bytes, const isa::Config& config) const {
  return dut_decode(bytes, config, bugs_);
}

ucode::MicroPC Design::xlate(const isa::Instruction& instr) const {
  std::string v = variant_of(instr);
  auto it = rules_.find(v);
  if (it == rules_.end()) throw UnsupportedVariant("no translation for " + v);
  return it->second(instr, *this);
}

std::vector<std::string> Design::xlate_variants() const {
  std::vector<std::string> out;
  for (const auto& [name, rule] : rules_) out.push_back(name);
  return out;
}

Uop Design::read(const BitVec& rom_addr, const ucode::SideParams& side) const {
  if (!rom_addr.is_concrete()) throw ucode::UcodeError("microsequencer: symbolic ROM address");
  RomWord w = rom_.word(static_cast<unsigned>(rom_addr.u64()));
  Uop u;
  u.opcode = static_cast<UopOpcode>(w.opcode);
  u.predicate = static_cast<ucode::Predicate>(w.predicate);
  u.ssz = size_bits(w.ssz_code);
  u.dsz = size_bits(w.dsz_code);
  u.flag_mask = w.flag_mask;
  auto resolve = [&](unsigned tpl) -> RegRef {
    if (tpl < kTplT0) return g(tpl - kTplG0);
    if (tpl < kTplArg0) return t(tpl - kTplT0);
    switch (tpl) {
      case kTplArg0: return reg(RegClass::kGpr, side.arg0);
      case kTplArg1: return reg(RegClass::kGpr, side.arg1);
      case kTplArg2: return reg(RegClass::kGpr, side.arg2);
      case kTplArg0L: return reg(RegClass::kZmmLo, side.arg0);
      case kTplArg0H: return reg(RegClass::kZmmHi, side.arg0);
      case kTplArg1L: return reg(RegClass::kZmmLo, side.arg1);
      case kTplArg1H: return reg(RegClass::kZmmHi, side.arg1);
      case kTplArg2L: return reg(RegClass::kZmmLo, side.arg2);
      case kTplArg2H: return reg(RegClass::kZmmHi, side.arg2);
      case kTplImm:
        u.imm = bv_zext(side.imm, 64);
        return RegRef::imm();
      case kTplSmallImm: {
        BitVec small = BitVec::constant(16, w.small_imm);
        u.imm = w.imm_sext ? bv_sext(small, 64) : bv_zext(small, 64);
        return RegRef::imm();
      }
      case kTplNone: return RegRef::none();
      default: throw RomError("microsequencer: unresolvable template " + std::to_string(tpl));
    }
  };
  u.dst = resolve(w.dst);
  u.src1 = resolve(w.src1);
  u.src2 = resolve(w.src2);
  if (u.opcode == UopOpcode::kPorq) {
    u.maskmode = side.maskmode;
    u.opmask = bugs_.enabled(kBugPorqIgnoresOpmask) ? BitVec::zeros(3) : side.opmask;
  }
  if (w.seq == SeqControl::kBranch) u.branch_target = w.target;
  return u;
}

BitVec Design::step(const BitVec& rom_addr, const BitVec& taken) const {
  if (!rom_addr.is_concrete()) throw ucode::UcodeError("microsequencer: symbolic ROM address");
  const unsigned addr = static_cast<unsigned>(rom_addr.u64());
  RomWord w = rom_.word(addr);
  const BitVec next = BitVec::constant(ucode::kRomAddrBits, addr + 1);
  switch (w.seq) {
    case SeqControl::kHalt: return BitVec::constant(ucode::kRomAddrBits, ucode::kHaltAddress);
    case SeqControl::kBranch: return bv_mux(taken, BitVec::constant(ucode::kRomAddrBits, w.target), next);
    case SeqControl::kFallthrough: return next;
  }
  return next;
}

ucode::UopResults Design::exec(const Uop& uop, const ucode::UopData& data, const std::optional<BitVec>& undriven) const {
  return dut_exec(uop, data, bugs_, undriven);
}

isa::X86State Design::rtl_step(const isa::X86State& state, const isa::Config& config) const {
  if (!state.ip.is_concrete()) throw std::invalid_argument("rtl_step: symbolic IP");
  auto bytes = isa::x86_fetch_code(state.ip.u64(), state.memory);
  isa::DecodeResult d = decode(bytes, config);
  if (!d.dx.is_concrete()) throw std::invalid_argument("rtl_step: symbolic decode outcome");
  if (d.dx.u64() != 0) return isa::x86_update(d.dx, {}, state);
  ucode::RunOptions opt;
  opt.exec = [this](const Uop& u, const ucode::UopData& data) { return exec(u, data); };
  isa::ExecResult r = ucode::run_xlate_ucode(d.instr, state, *this, opt);
  return isa::x86_update(d.dx, r, state);
}

Design::XlateRule imm_dependent_trap_rule() {
  return [](const isa::Instruction& in, const Design& d) {
    ucode::MicroPC pc = shrd_prelude(in, d, false);
    BitVec wide = bv_slice(in.imm, 5, 5);
    pc.rom_addr = bv_mux(wide, BitVec::constant(ucode::kRomAddrBits, d.rom().entry("ent_nop")), pc.rom_addr);
    return pc;
  };
}

}  // namespace ucv::design
