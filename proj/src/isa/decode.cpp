#include "ucv/isa/decode.hpp"

#include <optional>
#include <sstream>

namespace ucv::isa {

namespace {

std::optional<unsigned> concrete_bits(const BitVec& b, unsigned lo, unsigned hi) {
  unsigned v = 0;
  for (unsigned i = lo; i <= hi; ++i) {
    Lit l = b[i];
    if (!lit_is_const(l)) return std::nullopt;
    if (l == kTrue) v |= 1u << (i - lo);
  }
  return v;
}

unsigned require_bits(const BitVec& b, unsigned lo, unsigned hi, const char* what) {
  auto v = concrete_bits(b, lo, hi);
  if (!v) throw SymbolicBranchError(std::string("x86_decode: symbolic ") + what);
  return *v;
}

BitVec bit(const BitVec& b, unsigned i) { return bv_slice(b, i, i); }

BitVec cat(std::initializer_list<BitVec> msb_first) {
  BitVec out;
  for (const auto& part : msb_first) out = out.empty() ? part : bv_concat(part, out);
  return out;
}

BitVec konst(unsigned width, std::uint64_t v) { return BitVec::constant(width, v); }

bool is_legacy_prefix(unsigned b) {
  switch (b) {
    case 0xF0: case 0x66: case 0xF2: case 0xF3:
    case 0x2E: case 0x36: case 0x3E: case 0x26: case 0x64: case 0x65:
      return true;
    default:
      return false;
  }
}

DecodeResult finish(BitVec dx, Instruction instr) {
  BitVec ok = bv_eq(dx, BitVec::zeros(8));
  for (BitVec* f : instr.fields()) *f = bv_mux(ok, *f, BitVec::zeros(f->width()));
  return {dx, instr};
}

DecodeResult fault(unsigned code) { return {konst(8, code), Instruction{}}; }

// Byte cursor enforcing the length limit before running out of input.
struct Cursor {
  std::span<const BitVec> bytes;
  unsigned pos = 0;
  std::optional<unsigned> stop;  // set when the next byte cannot be read

  const BitVec* next() {
    if (pos >= kMaxInstructionLength) {
      stop = kExUD;
      return nullptr;
    }
    if (pos >= bytes.size()) {
      stop = kExIncomplete;
      return nullptr;
    }
    return &bytes[pos++];
  }
};

BitVec mux_code(const BitVec& cond, unsigned code, const BitVec& otherwise) {
  return bv_mux(cond, konst(8, code), otherwise);
}

DecodeResult decode_evex(Cursor& cur, bool any_prefix) {
  const BitVec* p[3];
  for (auto& b : p) {
    b = cur.next();
    if (!b) return fault(*cur.stop);
  }
  const BitVec &p0 = *p[0], &p1 = *p[1], &p2 = *p[2];
  unsigned mm = require_bits(p0, 0, 1, "EVEX.mm");
  const BitVec* opc = cur.next();
  if (!opc) return fault(*cur.stop);
  unsigned opcode = require_bits(*opc, 0, 7, "EVEX opcode");
  if (mm == 0) return fault(kExUD);
  auto id = find_entry(Encoding::kEvex, static_cast<OpcodeMap>(mm), opcode, 0);
  if (!id) return fault(kExUD);
  const InstListEntry& e = entry_by_id(*id);

  const BitVec* modrm = cur.next();
  if (!modrm) return fault(*cur.stop);
  BitVec imm = BitVec::zeros(8);
  if (e.has_imm8()) {
    const BitVec* ib = cur.next();
    if (!ib) return fault(*cur.stop);
    imm = *ib;
  }

  BitVec R = bv_not(bit(p0, 7)), X = bv_not(bit(p0, 6)), B = bv_not(bit(p0, 5)), R2 = bv_not(bit(p0, 4));
  BitVec W = bit(p1, 7), vvvv = bv_not(bv_slice(p1, 3, 6)), pp = bv_slice(p1, 0, 1);
  BitVec z = bit(p2, 7), ll = bv_slice(p2, 5, 6), b = bit(p2, 4), V2 = bv_not(bit(p2, 3)), aaa = bv_slice(p2, 0, 2);
  BitVec mod = bv_slice(*modrm, 6, 7), reg = bv_slice(*modrm, 3, 5), rm = bv_slice(*modrm, 0, 2);
  BitVec reg_form = bv_eq(mod, konst(2, 3));

  BitVec no_match = bv_lor(bv_ne(pp, konst(2, e.evex_pp)),
                           bv_lor(bv_ne(W, konst(1, e.evex_w)), bv_ne(ll, konst(2, e.evex_ll))));
  BitVec spec_ud = bv_false();
  if (e.has_exception(ExceptionCondition::kEvexLegacyPrefix) && any_prefix) spec_ud = bv_true();
  if (e.has_exception(ExceptionCondition::kEvexReservedBits)) {
    BitVec reserved = bv_lor(bv_reduce_or(bv_slice(p0, 2, 3)), bv_lnot(bit(p1, 2)));
    spec_ud = bv_lor(spec_ud, reserved);
  }
  if (e.has_exception(ExceptionCondition::kEvexZeroMaskK0)) {
    spec_ud = bv_lor(spec_ud, bv_land(z, bv_eq(aaa, konst(3, 0))));
  }
  if (e.has_exception(ExceptionCondition::kEvexBroadcastRegister)) {
    spec_ud = bv_lor(spec_ud, bv_land(b, reg_form));
  }
  BitVec dx = mux_code(no_match, kExUD, mux_code(spec_ud, kExUD, mux_code(bv_lnot(reg_form), kExUnsupported,
                                                                           BitVec::zeros(8))));

  Instruction in;
  in.entry = konst(8, e.id);
  in.size = konst(10, 512);
  in.op1 = cat({R2, R, reg});
  in.op2 = cat({V2, vvvv});
  in.op3 = cat({X, B, rm});
  in.imm = imm;
  in.opmask = aaa;
  in.zeroing = z;
  in.length = konst(4, cur.pos);
  return finish(dx, in);
}

}  // namespace

std::vector<BitVec*> Instruction::fields() {
  return {&entry, &size, &op1, &op2, &op3, &imm, &opmask, &zeroing, &high8, &length, &prefixes};
}

std::vector<const BitVec*> Instruction::fields() const {
  return {&entry, &size, &op1, &op2, &op3, &imm, &opmask, &zeroing, &high8, &length, &prefixes};
}

std::vector<BitVec> x86_fetch_code(std::uint64_t ip, const std::map<std::uint64_t, BitVec>& memory) {
  std::vector<BitVec> out;
  for (unsigned i = 0; i < kMaxInstructionLength; ++i) {
    auto it = memory.find(ip + i);
    if (it == memory.end()) break;
    out.push_back(it->second);
  }
  if (out.empty()) throw FetchError("x86_fetch_code: unmapped address " + to_hex(ip, 64));
  return out;
}

DecodeResult x86_decode(std::span<const BitVec> bytes, const Config& config) {
  if (config.mode != 64) throw std::invalid_argument("x86_decode: only 64-bit mode is modelled");
  for (const auto& b : bytes)
    if (b.width() != 8) throw BitVecError("x86_decode: bytes must be 8 bits wide");

  Cursor cur{bytes, 0, std::nullopt};
  bool lock = false, p66 = false, f2 = false, f3 = false, any_prefix = false, rex = false;
  BitVec rex_bits = BitVec::zeros(4);  // W R X B
  const BitVec* b = nullptr;
  unsigned opcode = 0;
  for (;;) {
    b = cur.next();
    if (!b) return fault(*cur.stop);
    unsigned high = require_bits(*b, 4, 7, "prefix byte");
    if (high == 4) {
      rex = true;
      rex_bits = bv_slice(*b, 0, 3);
      continue;
    }
    opcode = require_bits(*b, 0, 7, "prefix byte");
    if (!is_legacy_prefix(opcode)) break;
    // REX is only honoured immediately before the opcode.
    rex = false;
    rex_bits = BitVec::zeros(4);
    any_prefix = any_prefix || opcode == 0xF0 || opcode == 0x66 || opcode == 0xF2 || opcode == 0xF3;
    lock = lock || opcode == 0xF0;
    p66 = p66 || opcode == 0x66;
    f2 = f2 || opcode == 0xF2;
    f3 = f3 || opcode == 0xF3;
  }
  BitVec prefixes = konst(4, (lock ? 1u : 0u) | (p66 ? 2u : 0u) | (f2 ? 4u : 0u) | (f3 ? 8u : 0u));

  if (opcode == 0x62) return decode_evex(cur, any_prefix || rex);

  OpcodeMap map = OpcodeMap::kOneByte;
  if (opcode == 0x0F) {
    b = cur.next();
    if (!b) return fault(*cur.stop);
    opcode = require_bits(*b, 0, 7, "opcode byte");
    map = OpcodeMap::k0F;
    if (opcode == 0x38 || opcode == 0x3A) {
      map = opcode == 0x38 ? OpcodeMap::k0F38 : OpcodeMap::k0F3A;
      b = cur.next();
      if (!b) return fault(*cur.stop);
      opcode = require_bits(*b, 0, 7, "opcode byte");
    }
  }

  std::optional<unsigned> id;
  const BitVec* modrm = nullptr;
  if (is_group_opcode(Encoding::kLegacy, map, opcode)) {
    modrm = cur.next();
    if (!modrm) return fault(*cur.stop);
    id = find_entry(Encoding::kLegacy, map, opcode, require_bits(*modrm, 3, 5, "ModR/M.reg opcode extension"));
  } else {
    id = find_entry(Encoding::kLegacy, map, opcode, 0);
  }
  if (!id) return fault(kExUD);
  const InstListEntry& e = entry_by_id(*id);
  if (!modrm) {
    modrm = cur.next();
    if (!modrm) return fault(*cur.stop);
  }

  BitVec mod = bv_slice(*modrm, 6, 7), reg = bv_slice(*modrm, 3, 5), rm = bv_slice(*modrm, 0, 2);
  BitVec reg_form = bv_eq(mod, konst(2, 3));
  BitVec lock_ud = bv_false();
  if (lock && e.has_exception(ExceptionCondition::kLockPrefix)) lock_ud = bv_true();
  if (lock && e.has_exception(ExceptionCondition::kLockRegisterDest)) lock_ud = reg_form;

  auto mod_now = concrete_bits(*modrm, 6, 7);
  if (mod_now && *mod_now != 3) return fault(lock_ud.is_true() ? kExUD : kExUnsupported);

  BitVec imm = BitVec::zeros(8);
  if (e.has_imm8()) {
    const BitVec* ib = cur.next();
    if (!ib) return fault(*cur.stop);
    imm = *ib;
  }
  BitVec dx = mux_code(lock_ud, kExUD, mux_code(bv_lnot(reg_form), kExUnsupported, BitVec::zeros(8)));

  BitVec W = bit(rex_bits, 3), R = bit(rex_bits, 2), B = bit(rex_bits, 0);
  BitVec size = bv_mux(W, konst(10, 64), konst(10, p66 ? 16 : 32));
  BitVec reg_index = cat({konst(1, 0), R, reg});
  BitVec rm_index = cat({konst(1, 0), B, rm});

  Instruction in;
  in.entry = konst(8, e.id);
  in.size = size;
  BitVec* slots[3] = {&in.op1, &in.op2, &in.op3};
  unsigned slot = 0;
  for (const auto& op : e.operands) {
    switch (op.source) {
      case OperandSource::kModrmReg: *slots[slot++] = reg_index; break;
      case OperandSource::kModrmRm:
        *slots[slot++] = rm_index;
        if (op.fixed_size == 8 && !rex) in.high8 = bit(rm, 2);
        break;
      case OperandSource::kRegCL: *slots[slot++] = konst(5, RCX); break;
      case OperandSource::kImm8: in.imm = imm; break;
      case OperandSource::kEvexVvvv: throw CatalogError("vvvv operand on a legacy entry");
    }
  }
  in.length = konst(4, cur.pos);
  in.prefixes = prefixes;
  return finish(dx, in);
}

DecodeResult x86_decode(const std::vector<std::uint8_t>& bytes, const Config& config) {
  auto bvs = bytes_of(bytes);
  return x86_decode(std::span<const BitVec>(bvs), config);
}

BitVec decode_results_equal(const DecodeResult& a, const DecodeResult& b) {
  std::vector<BitVec> eqs;
  auto fa = a.instr.fields();
  auto fb = b.instr.fields();
  for (std::size_t i = 0; i < fa.size(); ++i) eqs.push_back(bv_eq(*fa[i], *fb[i]));
  BitVec fields_eq = eqs.front();
  for (std::size_t i = 1; i < eqs.size(); ++i) fields_eq = bv_land(fields_eq, eqs[i]);
  BitVec faulted = bv_ne(a.dx, BitVec::zeros(8));
  return bv_land(bv_eq(a.dx, b.dx), bv_lor(faulted, fields_eq));
}

std::vector<std::uint8_t> encode(const Instruction& in) {
  const InstListEntry& e = entry_by_id(static_cast<unsigned>(in.entry.u64()));
  const unsigned size = static_cast<unsigned>(in.size.u64());
  const unsigned ops[3] = {static_cast<unsigned>(in.op1.u64()), static_cast<unsigned>(in.op2.u64()),
                           static_cast<unsigned>(in.op3.u64())};
  unsigned reg = 0, rm = 0, vvvv = 0;
  unsigned slot = 0;
  for (const auto& op : e.operands) {
    switch (op.source) {
      case OperandSource::kModrmReg: reg = ops[slot++]; break;
      case OperandSource::kModrmRm: rm = ops[slot++]; break;
      case OperandSource::kEvexVvvv: vvvv = ops[slot++]; break;
      case OperandSource::kRegCL: ++slot; break;
      case OperandSource::kImm8: break;
    }
  }
  std::vector<std::uint8_t> out;
  const unsigned pfx = static_cast<unsigned>(in.prefixes.u64());
  if (pfx & 1) out.push_back(0xF0);
  if (pfx & 4) out.push_back(0xF2);
  if (pfx & 8) out.push_back(0xF3);

  if (e.encoding == Encoding::kEvex) {
    out.push_back(0x62);
    unsigned p0 = ((~reg >> 3) & 1) << 7 | ((~rm >> 4) & 1) << 6 | ((~rm >> 3) & 1) << 5 | ((~reg >> 4) & 1) << 4 |
                  static_cast<unsigned>(e.map);
    unsigned p1 = e.evex_w << 7 | ((~vvvv) & 0xF) << 3 | 1u << 2 | e.evex_pp;
    unsigned p2 = static_cast<unsigned>(in.zeroing.u64()) << 7 | e.evex_ll << 5 | ((~vvvv >> 4) & 1) << 3 |
                  static_cast<unsigned>(in.opmask.u64());
    out.push_back(static_cast<std::uint8_t>(p0));
    out.push_back(static_cast<std::uint8_t>(p1));
    out.push_back(static_cast<std::uint8_t>(p2));
    out.push_back(static_cast<std::uint8_t>(e.opcode));
  } else {
    if (pfx & 2) out.push_back(0x66);
    const bool w = size == 64;
    const bool byte_rm = e.operands.size() > 1 && e.operands[1].fixed_size == 8;
    const bool need_rex = w || reg >= 8 || rm >= 8 || (byte_rm && rm >= 4 && in.high8.u64() == 0);
    if (need_rex) out.push_back(static_cast<std::uint8_t>(0x40 | (w ? 8 : 0) | ((reg >> 3) & 1) << 2 | ((rm >> 3) & 1)));
    if (e.map != OpcodeMap::kOneByte) out.push_back(0x0F);
    if (e.map == OpcodeMap::k0F38) out.push_back(0x38);
    if (e.map == OpcodeMap::k0F3A) out.push_back(0x3A);
    out.push_back(static_cast<std::uint8_t>(e.opcode));
    if (e.group_digit >= 0) reg = static_cast<unsigned>(e.group_digit);
  }
  out.push_back(static_cast<std::uint8_t>(0xC0 | (reg & 7) << 3 | (rm & 7)));
  if (e.has_imm8()) out.push_back(static_cast<std::uint8_t>(in.imm.u64()));
  return out;
}

std::string describe(const Instruction& in) {
  std::ostringstream s;
  const InstListEntry& e = entry_by_id(static_cast<unsigned>(in.entry.u64()));
  s << variant_id(e, static_cast<unsigned>(in.size.u64())) << " op1=" << in.op1.u64() << " op2=" << in.op2.u64()
    << " op3=" << in.op3.u64() << " imm=" << to_hex(in.imm.value(), 8);
  if (e.encoding == Encoding::kEvex) s << " k" << in.opmask.u64() << (in.zeroing.u64() ? " {z}" : "");
  if (in.high8.u64()) s << " high8";
  s << " len=" << in.length.u64();
  return s.str();
}

std::vector<BitVec> bytes_of(const std::vector<std::uint8_t>& bytes) {
  std::vector<BitVec> out;
  for (auto b : bytes) out.push_back(BitVec::constant(8, b));
  return out;
}

}  // namespace ucv::isa
