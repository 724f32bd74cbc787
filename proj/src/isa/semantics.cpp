#include "ucv/isa/semantics.hpp"

#include <stdexcept>
#include <string>

namespace ucv::isa {

namespace {

BitVec konst(unsigned width, std::uint64_t v) { return BitVec::constant(width, v); }

BitVec is_zero(const BitVec& v) { return bv_eq(v, BitVec::zeros(v.width())); }

BitVec msb(const BitVec& v) { return bv_slice(v, v.width() - 1, v.width() - 1); }

BitVec masked_count(const BitVec& amt, unsigned n) {
  return bv_and(bv_resize(amt, 8), konst(8, n == 64 ? 63 : 31));
}

// Selects entry `index` of `items` (index may be symbolic).
template <std::size_t N>
BitVec select(const std::array<BitVec, N>& items, const BitVec& index) {
  BitVec out = items[0];
  for (std::size_t i = 1; i < N; ++i) out = bv_mux(bv_eq(index, konst(index.width(), i)), items[i], out);
  return out;
}

std::uint64_t concrete(const BitVec& v, const char* what) {
  if (!v.is_concrete()) throw SymbolicBranchError(std::string("x86_exec: symbolic ") + what);
  return v.u64();
}

// Architectural write of a `size`-bit result into a 64-bit register.
BitVec merge_gpr(const BitVec& old, const BitVec& result, unsigned size) {
  if (size == 64) return result;
  if (size == 32) return bv_zext(result, 64);
  return bv_concat(result, bv_slice(old, size, 63));
}

BitVec read_byte_operand(const X86State& s, const BitVec& index, const BitVec& high8) {
  BitVec low = bv_slice(read_gpr(s, index), 0, 7);
  BitVec high = bv_slice(read_gpr(s, bv_and(index, konst(5, 3))), 8, 15);
  return bv_mux(high8, high, low);
}

}  // namespace

ShrdResult shrd_spec(const BitVec& dest, const BitVec& src, const BitVec& amt, unsigned n) {
  if (dest.width() != n || src.width() != n) throw BitVecError("shrd_spec: operand width mismatch");
  BitVec m = masked_count(amt, n);
  BitVec both = bv_concat(dest, src);  // src in the high half
  BitVec shifted = bv_slice(bv_shr(both, m), 0, n - 1);
  BitVec nonzero = bv_lnot(is_zero(m));
  ShrdResult r;
  r.result = bv_mux(nonzero, shifted, dest);
  BitVec last_out = bv_slice(bv_shr(both, bv_sub(m, konst(8, 1))), 0, 0);
  r.flags.zf = {nonzero, is_zero(r.result)};
  r.flags.sf = {nonzero, msb(r.result)};
  r.flags.cf = {nonzero, last_out};
  r.cf_defined = bv_lnot(bv_ult(konst(8, n), m));
  return r;
}

BitVec vpshrdq_spec(const BitVec& src1, const BitVec& src2, const BitVec& amt, const BitVec& opmask_index,
                    const BitVec& maskmode, const std::array<BitVec, kNumKs>& k, const BitVec& old_dest) {
  BitVec count = bv_and(bv_resize(amt, 8), konst(8, 63));
  BitVec kreg = select(k, opmask_index);
  BitVec no_mask = is_zero(opmask_index);
  BitVec out;
  for (unsigned lane = 0; lane < 8; ++lane) {
    unsigned lo = lane * 64, hi = lo + 63;
    BitVec both = bv_concat(bv_slice(src1, lo, hi), bv_slice(src2, lo, hi));
    BitVec r = bv_slice(bv_shr(both, count), 0, 63);
    BitVec active = bv_lor(no_mask, bv_slice(kreg, lane, lane));
    BitVec inactive = bv_mux(maskmode, BitVec::zeros(64), bv_slice(old_dest, lo, hi));
    BitVec v = bv_mux(active, r, inactive);
    out = lane == 0 ? v : bv_concat(out, v);
  }
  return out;
}

AluOp alu_op_from_mnemonic(std::string_view m) {
  static const std::pair<const char*, AluOp> table[] = {
      {"AND", AluOp::kAnd}, {"OR", AluOp::kOr},       {"XOR", AluOp::kXor},     {"ADD", AluOp::kAdd},
      {"SUB", AluOp::kSub}, {"MOV", AluOp::kMov},     {"MOVZX", AluOp::kMovzx}, {"MOVSX", AluOp::kMovsx},
      {"SHR", AluOp::kShr}, {"SHL", AluOp::kShl},     {"ROR", AluOp::kRor}};
  for (auto [name, op] : table)
    if (m == name) return op;
  throw std::invalid_argument("gpr_alu_spec: unknown mnemonic " + std::string(m));
}

const char* alu_op_name(AluOp op) {
  switch (op) {
    case AluOp::kAnd: return "AND";
    case AluOp::kOr: return "OR";
    case AluOp::kXor: return "XOR";
    case AluOp::kAdd: return "ADD";
    case AluOp::kSub: return "SUB";
    case AluOp::kMov: return "MOV";
    case AluOp::kMovzx: return "MOVZX";
    case AluOp::kMovsx: return "MOVSX";
    case AluOp::kShr: return "SHR";
    case AluOp::kShl: return "SHL";
    case AluOp::kRor: return "ROR";
  }
  return "?";
}

AluResult gpr_alu_spec(AluOp op, const BitVec& a, const BitVec& b, unsigned ssz, unsigned dsz) {
  BitVec x = bv_resize(a, ssz);
  BitVec y = bv_resize(b, ssz);
  BitVec core;
  BitVec carry = bv_false();
  BitVec writes = bv_true();  // shifts by zero leave flags alone
  bool logic_flags = false, any_flags = true;
  switch (op) {
    case AluOp::kAnd: core = bv_and(x, y); break;
    case AluOp::kOr: core = bv_or(x, y); break;
    case AluOp::kXor: core = bv_xor(x, y); break;
    case AluOp::kAdd:
      core = bv_add(x, y);
      carry = bv_slice(bv_add(bv_zext(x, ssz + 1), bv_zext(y, ssz + 1)), ssz, ssz);
      break;
    case AluOp::kSub:
      core = bv_sub(x, y);
      carry = bv_ult(x, y);
      break;
    case AluOp::kMov:
    case AluOp::kMovzx: core = x; any_flags = false; break;
    case AluOp::kMovsx: core = dsz > ssz ? bv_sext(x, dsz) : x; any_flags = false; break;
    case AluOp::kShr:
    case AluOp::kShl:
    case AluOp::kRor: {
      BitVec count = masked_count(b, ssz);
      writes = bv_lnot(is_zero(count));
      if (op == AluOp::kShr) {
        core = bv_shr(x, count);
        carry = bv_slice(bv_shr(x, bv_sub(count, konst(8, 1))), 0, 0);
      } else if (op == AluOp::kShl) {
        core = bv_shl(x, count);
        carry = bv_slice(bv_shl(bv_zext(x, ssz + 64), count), ssz, ssz);
      } else {
        core = bv_ror(x, count);
        carry = msb(core);
      }
      logic_flags = op != AluOp::kRor;
      break;
    }
  }
  if (op == AluOp::kAnd || op == AluOp::kOr || op == AluOp::kXor || op == AluOp::kAdd || op == AluOp::kSub) {
    logic_flags = true;
  }
  AluResult r;
  r.result = bv_resize(core, dsz);
  if (any_flags) {
    r.flags.cf = {writes, carry};
    if (logic_flags) {
      r.flags.zf = {writes, is_zero(r.result)};
      r.flags.sf = {writes, msb(r.result)};
    }
  }
  return r;
}

BitVec read_gpr(const X86State& s, const BitVec& index) { return select(s.gpr, bv_resize(index, 4)); }

BitVec read_zmm(const X86State& s, const BitVec& index) { return select(s.zmm, bv_resize(index, 5)); }

BitVec read_k(const X86State& s, const BitVec& index) { return select(s.k, bv_resize(index, 3)); }

ExecResult x86_exec(const Instruction& in, const X86State& s) {
  const InstListEntry& e = entry_by_id(static_cast<unsigned>(concrete(in.entry, "catalog entry")));
  const unsigned size = static_cast<unsigned>(concrete(in.size, "operand size"));
  ExecResult r;
  r.length = in.length;

  if (e.mnemonic == "VPSHRDQ") {
    BitVec v = vpshrdq_spec(read_zmm(s, in.op2), read_zmm(s, in.op3), in.imm, in.opmask, in.zeroing, s.k,
                            read_zmm(s, in.op1));
    r.writes.push_back({RegFile::kZmm, in.op1, v});
    return r;
  }

  if (e.mnemonic == "SHRD") {
    BitVec dest = bv_resize(read_gpr(s, in.op1), size);
    BitVec src = bv_resize(read_gpr(s, in.op2), size);
    BitVec amt = e.variant == "cl" ? bv_slice(s.gpr[RCX], 0, 7) : in.imm;
    ShrdResult sh = shrd_spec(dest, src, amt, size);
    // A zero count leaves the destination, including its upper half, alone.
    BitVec old = read_gpr(s, in.op1);
    BitVec nonzero = sh.flags.zf.enable;
    r.writes.push_back({RegFile::kGpr, in.op1, bv_mux(nonzero, merge_gpr(old, sh.result, size), old)});
    r.flags = sh.flags;
    r.cf_defined = sh.cf_defined;
    return r;
  }

  AluOp op = alu_op_from_mnemonic(e.mnemonic);
  BitVec a, b;
  unsigned ssz = size;
  switch (op) {
    case AluOp::kMovzx:
    case AluOp::kMovsx:
      a = read_byte_operand(s, in.op2, in.high8);
      b = a;
      ssz = 8;
      break;
    case AluOp::kShr:
    case AluOp::kShl:
    case AluOp::kRor:
      a = read_gpr(s, in.op1);
      b = in.imm;
      break;
    case AluOp::kMov:
      a = read_gpr(s, in.op2);
      b = a;
      break;
    default:
      a = read_gpr(s, in.op1);
      b = read_gpr(s, in.op2);
      break;
  }
  AluResult alu = gpr_alu_spec(op, a, b, ssz, size);
  BitVec old = read_gpr(s, in.op1);
  r.writes.push_back({RegFile::kGpr, in.op1, merge_gpr(old, alu.result, size)});
  r.flags = alu.flags;
  return r;
}

X86State x86_update(const BitVec& dx, const ExecResult& r, const X86State& state) {
  X86State next = state;
  BitVec fault = bv_mux(is_zero(dx), r.ex, dx);
  BitVec ok = is_zero(fault);
  next.fault = fault;
  for (const auto& w : r.writes) {
    if (w.file == RegFile::kGpr) {
      for (unsigned i = 0; i < kNumGprs; ++i) {
        BitVec hit = bv_land(ok, bv_eq(bv_resize(w.index, 5), konst(5, i)));
        next.gpr[i] = bv_mux(hit, w.value, next.gpr[i]);
      }
    } else {
      for (unsigned i = 0; i < kNumZmms; ++i) {
        BitVec hit = bv_land(ok, bv_eq(bv_resize(w.index, 5), konst(5, i)));
        next.zmm[i] = bv_mux(hit, w.value, next.zmm[i]);
      }
    }
  }
  auto apply = [&](BitVec& flag, const FlagWrite& f) { flag = bv_mux(bv_land(ok, f.enable), f.value, flag); };
  apply(next.zf, r.flags.zf);
  apply(next.sf, r.flags.sf);
  apply(next.cf, r.flags.cf);
  next.ip = bv_mux(ok, bv_add(state.ip, bv_zext(r.length, 64)), state.ip);
  return next;
}

X86State x86_model_step(const X86State& state) {
  auto bytes = x86_fetch_code(static_cast<std::uint64_t>(concrete(state.ip, "instruction pointer")), state.memory);
  DecodeResult d = x86_decode(std::span<const BitVec>(bytes), state.config);
  ExecResult r;
  if (!(d.dx.is_concrete() && d.dx.u64() != 0)) r = x86_exec(d.instr, state);
  return x86_update(d.dx, r, state);
}

}  // namespace ucv::isa
