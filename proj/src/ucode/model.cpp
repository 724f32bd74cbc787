#include "ucv/ucode/model.hpp"

#include <sstream>

namespace ucv::ucode {

namespace {

BitVec konst(unsigned width, std::uint64_t v) { return BitVec::constant(width, v); }

template <std::size_t N>
BitVec select(const std::array<BitVec, N>& items, const BitVec& index) {
  if (index.is_concrete()) return items.at(static_cast<std::size_t>(index.u64()) % N);
  BitVec out = items[0];
  for (std::size_t i = 1; i < N; ++i) out = bv_mux(bv_eq(index, konst(index.width(), i)), items[i], out);
  return out;
}

// Writes `value` to the register picked by `index` when `enable` holds.
template <std::size_t N>
void write_indexed(std::array<BitVec, N>& items, const BitVec& index, const BitVec& value) {
  if (index.is_concrete()) {
    items.at(static_cast<std::size_t>(index.u64()) % N) = value;
    return;
  }
  for (std::size_t i = 0; i < N; ++i) items[i] = bv_mux(bv_eq(index, konst(index.width(), i)), value, items[i]);
}

BitVec lane(const BitVec& v, unsigned i) { return bv_slice(v, 64 * i, 64 * i + 63); }

BitVec lanes_of(const std::vector<BitVec>& ls) {
  BitVec out = ls[0];
  for (std::size_t i = 1; i < ls.size(); ++i) out = bv_concat(out, ls[i]);
  return out;
}

isa::AluOp scalar_op(UopOpcode op) {
  switch (op) {
    case UopOpcode::kMovsx: return isa::AluOp::kMovsx;
    case UopOpcode::kMovzx: return isa::AluOp::kMovzx;
    case UopOpcode::kMov: return isa::AluOp::kMov;
    case UopOpcode::kAnd: return isa::AluOp::kAnd;
    case UopOpcode::kOr: return isa::AluOp::kOr;
    case UopOpcode::kXor: return isa::AluOp::kXor;
    case UopOpcode::kSub: return isa::AluOp::kSub;
    case UopOpcode::kShr: return isa::AluOp::kShr;
    case UopOpcode::kShl: return isa::AluOp::kShl;
    case UopOpcode::kRor: return isa::AluOp::kRor;
    default: throw UcodeError(std::string("not a scalar uop: ") + opcode_name(op));
  }
}

BitVec predicate_holds(Predicate p, const BitVec& zf) {
  switch (p) {
    case Predicate::kNone: return bv_true();
    case Predicate::kZF: return zf;
    case Predicate::kNotZF: return bv_lnot(zf);
    case Predicate::kNever: return bv_false();
  }
  return bv_true();
}

std::string hex_digits(const BigUint& v, unsigned width) { return to_hex(v & ((BigUint(1) << width) - 1), width); }

std::string trace_line(unsigned n, const Uop& uop, const UopResults& r) {
  std::ostringstream s;
  s << "#" << n << " " << format_uop(uop) << " |";
  if (r.branch_taken) {
    s << " taken=" << (r.branch_taken->is_concrete() ? std::to_string(r.branch_taken->u64()) : "<sym>");
  } else if (r.value) {
    unsigned w = is_packed(uop.opcode) ? reg_width(uop.dst.cls) : uop.dsz;
    s << " " << format_reg(uop.dst) << "="
      << (r.value->is_concrete() ? hex_digits(r.value->value(), w) : std::string("<sym>"));
  } else {
    s << " -";
  }
  const std::pair<const char*, const isa::FlagWrite*> flags[] = {
      {"ZF", &r.flags.zf}, {"SF", &r.flags.sf}, {"CF", &r.flags.cf}};
  for (auto [name, f] : flags) {
    if (f->enable.is_false()) continue;
    s << " " << name << "=" << (f->value.is_concrete() ? std::to_string(f->value.u64()) : "<sym>");
  }
  return s.str();
}

}  // namespace

UcodeState::UcodeState() {
  g.fill(BitVec::zeros(64));
  t.fill(BitVec::zeros(256));
}

UcodeState init_ucode_state(const MicroPC& pc, const isa::X86State& arch) {
  UcodeState s;
  s.pc = pc;
  s.arch = arch;
  return s;
}

BitVec read_reg(const UcodeState& s, const RegRef& r, const BitVec& imm) {
  switch (r.cls) {
    case RegClass::kNone: return BitVec::zeros(64);
    case RegClass::kImm: return bv_resize(imm, 64);
    case RegClass::kGpr: return select(s.arch.gpr, bv_resize(r.index, 4));
    case RegClass::kG: return select(s.g, bv_resize(r.index, 4));
    case RegClass::kT: return select(s.t, r.index);
    case RegClass::kZmmLo: return bv_slice(select(s.arch.zmm, r.index), 0, 255);
    case RegClass::kZmmHi: return bv_slice(select(s.arch.zmm, r.index), 256, 511);
  }
  throw UcodeError("read_reg: bad register class");
}

UopResults uop_semantics(const Uop& uop, const UopData& d) {
  UopResults r;
  r.dst = uop.dst;
  BitVec ok = predicate_holds(uop.predicate, d.zf);
  switch (uop.opcode) {
    case UopOpcode::kNop:
    case UopOpcode::kHalt:
      return r;
    case UopOpcode::kJe:
      r.branch_taken = bv_land(ok, bv_eq(bv_resize(d.src1, uop.ssz), bv_resize(d.src2, uop.ssz)));
      return r;
    case UopOpcode::kDlshftcnt: {
      BitVec m = bv_zext(bv_slice(d.src1, 0, 5), 7);
      BitVec count = bv_zext(bv_sub(konst(7, 64), m), 64);
      r.value = lanes_of({count, count, count, count});
      break;
    }
    case UopOpcode::kPsrlq: {
      BitVec count = bv_slice(d.src2, 0, 5);
      std::vector<BitVec> ls;
      for (unsigned i = 0; i < 4; ++i) ls.push_back(bv_shr(lane(d.src1, i), count));
      r.value = lanes_of(ls);
      break;
    }
    case UopOpcode::kPsllvq: {
      std::vector<BitVec> ls;
      for (unsigned i = 0; i < 4; ++i) ls.push_back(bv_shl(lane(d.src1, i), lane(d.src2, i)));
      r.value = lanes_of(ls);
      break;
    }
    case UopOpcode::kPorq: {
      std::vector<BitVec> ls;
      for (unsigned i = 0; i < 4; ++i) {
        BitVec v = bv_or(lane(d.src1, i), lane(d.src2, i));
        BitVec inactive = bv_mux(uop.maskmode, BitVec::zeros(64), lane(d.old_dst, i));
        ls.push_back(bv_mux(bv_slice(d.lane_mask, i, i), v, inactive));
      }
      r.value = lanes_of(ls);
      break;
    }
    default: {
      isa::AluResult alu = isa::gpr_alu_spec(scalar_op(uop.opcode), d.src1, d.src2, uop.ssz, uop.dsz);
      r.value = bv_resize(alu.result, reg_width(uop.dst.cls));
      auto keep = [&](const isa::FlagWrite& f, unsigned bit) {
        if ((uop.flag_mask & bit) == 0) return isa::FlagWrite{};
        return isa::FlagWrite{bv_land(ok, f.enable), f.value};
      };
      r.flags.zf = keep(alu.flags.zf, kFlagZF);
      r.flags.sf = keep(alu.flags.sf, kFlagSF);
      r.flags.cf = keep(alu.flags.cf, kFlagCF);
      break;
    }
  }
  r.value = bv_mux(ok, *r.value, d.old_dst);
  return r;
}

Uop ucode_get_uop(const MicroPC& pc, const UcodeDesign& design) {
  if (!pc.prelude.empty()) return pc.prelude.front();
  if (pc.halted()) throw UcodeError("ucode_get_uop: micro-PC is halted");
  return design.read(pc.rom_addr, pc.side);
}

UopData ucode_fetch_data(const Uop& uop, const UcodeState& s) {
  UopData d;
  d.src1 = read_reg(s, uop.src1, uop.imm);
  d.src2 = uop.src2.cls == RegClass::kNone ? d.src1 : read_reg(s, uop.src2, uop.imm);
  d.old_dst = uop.dst.cls == RegClass::kNone ? BitVec::zeros(64) : read_reg(s, uop.dst, uop.imm);
  d.zf = s.arch.zf;
  if (uop.opcode == UopOpcode::kPorq) {
    BitVec k = select(s.arch.k, uop.opmask);
    BitVec half = uop.dst.cls == RegClass::kZmmHi ? bv_slice(k, 4, 7) : bv_slice(k, 0, 3);
    d.lane_mask = bv_mux(bv_eq(uop.opmask, BitVec::zeros(3)), BitVec::ones(4), half);
  }
  return d;
}

MicroPC ucode_next_pc(const MicroPC& pc, const UopResults& results, const UcodeDesign& design) {
  MicroPC next = pc;
  if (!next.prelude.empty()) {
    next.prelude.erase(next.prelude.begin());
    return next;
  }
  next.rom_addr = design.step(pc.rom_addr, results.branch_taken.value_or(bv_false()));
  return next;
}

UcodeState ucode_update_state(const UopResults& r, MicroPC next_pc, const UcodeState& s) {
  UcodeState n = s;
  n.pc = std::move(next_pc);
  if (r.value) {
    const BitVec& v = *r.value;
    switch (r.dst.cls) {
      case RegClass::kGpr: write_indexed(n.arch.gpr, bv_resize(r.dst.index, 4), v); break;
      case RegClass::kG: write_indexed(n.g, bv_resize(r.dst.index, 4), v); break;
      case RegClass::kT: write_indexed(n.t, r.dst.index, v); break;
      case RegClass::kZmmLo:
      case RegClass::kZmmHi: {
        BitVec old = select(n.arch.zmm, r.dst.index);
        BitVec merged = r.dst.cls == RegClass::kZmmLo ? bv_concat(v, bv_slice(old, 256, 511))
                                                       : bv_concat(bv_slice(old, 0, 255), v);
        write_indexed(n.arch.zmm, r.dst.index, merged);
        break;
      }
      default: throw UcodeError("ucode_update_state: write to a non-register destination");
    }
  }
  auto apply = [](BitVec& flag, const isa::FlagWrite& f) { flag = bv_mux(f.enable, f.value, flag); };
  apply(n.arch.zf, r.flags.zf);
  apply(n.arch.sf, r.flags.sf);
  apply(n.arch.cf, r.flags.cf);
  return n;
}

UcodeState ucode_model_step(const UcodeState& s, const UcodeDesign& design) {
  if (s.pc.halted()) return s;
  Uop uop = ucode_get_uop(s.pc, design);
  UopResults r = uop_semantics(uop, ucode_fetch_data(uop, s));
  return ucode_update_state(r, ucode_next_pc(s.pc, r, design), s);
}

UcodeState merge_states(const BitVec& c, const UcodeState& a, const UcodeState& b) {
  UcodeState m = a;
  for (unsigned i = 0; i < isa::kNumGprs; ++i) m.arch.gpr[i] = bv_mux(c, a.arch.gpr[i], b.arch.gpr[i]);
  for (unsigned i = 0; i < isa::kNumZmms; ++i) m.arch.zmm[i] = bv_mux(c, a.arch.zmm[i], b.arch.zmm[i]);
  for (unsigned i = 0; i < isa::kNumKs; ++i) m.arch.k[i] = bv_mux(c, a.arch.k[i], b.arch.k[i]);
  m.arch.zf = bv_mux(c, a.arch.zf, b.arch.zf);
  m.arch.sf = bv_mux(c, a.arch.sf, b.arch.sf);
  m.arch.cf = bv_mux(c, a.arch.cf, b.arch.cf);
  for (unsigned i = 0; i < kNumG; ++i) m.g[i] = bv_mux(c, a.g[i], b.g[i]);
  for (unsigned i = 0; i < kNumT; ++i) m.t[i] = bv_mux(c, a.t[i], b.t[i]);
  return m;
}

namespace {

UcodeState run_from(UcodeState s, const UcodeDesign& design, const RunOptions& opt, unsigned& steps) {
  while (!s.pc.halted()) {
    if (steps >= opt.step_bound) {
      throw StepBoundExceeded("run_ucode_model: step bound of " + std::to_string(opt.step_bound) + " exceeded");
    }
    Uop uop = ucode_get_uop(s.pc, design);
    UopData data = ucode_fetch_data(uop, s);
    UopResults r = opt.exec ? opt.exec(uop, data) : uop_semantics(uop, data);
    if (opt.trace) opt.trace->push_back({steps, uop, trace_line(steps, uop, r)});
    ++steps;
    if (s.pc.prelude.empty() && r.branch_taken && !r.branch_taken->is_concrete()) {
      BitVec cond = *r.branch_taken;
      UopResults taken = r, fall = r;
      taken.branch_taken = bv_true();
      fall.branch_taken = bv_false();
      unsigned steps_taken = steps, steps_fall = steps;
      UcodeState a = run_from(ucode_update_state(taken, ucode_next_pc(s.pc, taken, design), s), design, opt,
                              steps_taken);
      UcodeState b = run_from(ucode_update_state(fall, ucode_next_pc(s.pc, fall, design), s), design, opt,
                              steps_fall);
      steps = std::max(steps_taken, steps_fall);
      return merge_states(cond, a, b);
    }
    s = ucode_update_state(r, ucode_next_pc(s.pc, r, design), s);
  }
  return s;
}

}  // namespace

UcodeState run_ucode_model(const UcodeState& s, const UcodeDesign& design, const RunOptions& options) {
  unsigned steps = 0;
  return run_from(s, design, options, steps);
}

isa::ExecResult extract_instr_results(const UcodeState& f, const isa::X86State& initial) {
  if (!f.pc.halted()) throw UcodeError("extract_instr_results: state is not halted");
  isa::ExecResult r;
  for (unsigned i = 0; i < isa::kNumGprs; ++i) {
    if (!f.arch.gpr[i].same_as(initial.gpr[i])) r.writes.push_back({isa::RegFile::kGpr, konst(5, i), f.arch.gpr[i]});
  }
  for (unsigned i = 0; i < isa::kNumZmms; ++i) {
    if (!f.arch.zmm[i].same_as(initial.zmm[i])) r.writes.push_back({isa::RegFile::kZmm, konst(5, i), f.arch.zmm[i]});
  }
  auto flag = [](const BitVec& now, const BitVec& before) {
    return now.same_as(before) ? isa::FlagWrite{} : isa::FlagWrite{bv_true(), now};
  };
  r.flags.zf = flag(f.arch.zf, initial.zf);
  r.flags.sf = flag(f.arch.sf, initial.sf);
  r.flags.cf = flag(f.arch.cf, initial.cf);
  return r;
}

isa::ExecResult run_xlate_ucode(const isa::Instruction& instr, const isa::X86State& state, const UcodeDesign& design,
                                const RunOptions& options) {
  UcodeState s = init_ucode_state(design.xlate(instr), state);
  UcodeState f = run_ucode_model(s, design, options);
  isa::ExecResult r = extract_instr_results(f, state);
  r.length = instr.length;
  return r;
}

}  // namespace ucv::ucode
