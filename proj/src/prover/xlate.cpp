#include "ucv/prover/xlate.hpp"

#include <chrono>
#include <sstream>

namespace ucv::prover {

using isa::Instruction;
using isa::InstListEntry;
using isa::OperandSource;

namespace {

const char* const kOpFields[] = {"op1", "op2", "op3"};

struct Opening {
  std::string role;
  std::uint8_t mask;
};

std::pair<const InstListEntry*, unsigned> resolve_variant(const std::string& variant) {
  for (const auto& e : isa::load_inst_table())
    for (unsigned s : e.sizes)
      if (isa::variant_id(e, s) == variant) return {&e, s};
  throw std::invalid_argument("unknown variant " + variant);
}

const BitVec& field_of(const Instruction& in, const std::string& name) {
  if (name == "op1") return in.op1;
  if (name == "op2") return in.op2;
  if (name == "op3") return in.op3;
  if (name == "imm") return in.imm;
  if (name == "opmask") return in.opmask;
  if (name == "zeroing") return in.zeroing;
  throw std::invalid_argument("unknown instruction field " + name);
}

BitVec& field_of(Instruction& in, const std::string& name) {
  return const_cast<BitVec&>(field_of(static_cast<const Instruction&>(in), name));
}

std::string role_of(const BytePattern& p) {
  auto dot = p.var.rfind('.');
  return dot == std::string::npos ? "" : p.var.substr(dot + 1);
}

std::string hex_bytes(const std::vector<std::uint8_t>& bytes) {
  std::ostringstream os;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    static const char* digits = "0123456789ABCDEF";
    if (i) os << ' ';
    os << digits[bytes[i] >> 4] << digits[bytes[i] & 15];
  }
  return os.str();
}

std::string hex_of(const BitVec& b) { return to_hex(b.value(), b.width()); }

// Bits that carry `field` in the entry's encoding. Throws for fields the
// encoding pins (implicit operands, immediates addressed as operands).
std::vector<Opening> field_openings(const InstListEntry& e, const std::string& field) {
  const bool evex = e.encoding == isa::Encoding::kEvex;
  if (field == "imm") {
    if (!e.has_imm8()) throw std::invalid_argument(e.mnemonic + " has no immediate");
    return {{"imm", 0xFF}};
  }
  if (field == "opmask" || field == "zeroing") {
    if (!evex) throw std::invalid_argument(field + " exists only on EVEX encodings");
    return {{"p2", static_cast<std::uint8_t>(field == "opmask" ? 0x07 : 0x80)}};
  }
  for (unsigned k = 0; k < 3; ++k) {
    if (field != kOpFields[k]) continue;
    if (k >= e.operands.size() || e.operands[k].source == OperandSource::kImm8)
      throw std::invalid_argument(e.mnemonic + " has no register operand " + field);
    switch (e.operands[k].source) {
      case OperandSource::kModrmReg:
        if (evex) return {{"modrm", 0x38}, {"p0", 0x90}};
        return {{"modrm", 0x38}, {"rex", 0x04}};
      case OperandSource::kModrmRm:
        if (evex) return {{"modrm", 0x07}, {"p0", 0x60}};
        return {{"modrm", 0x07}, {"rex", 0x01}};
      case OperandSource::kEvexVvvv: return {{"p1", 0x78}, {"p2", 0x08}};
      case OperandSource::kRegCL:
        throw std::invalid_argument(field + " of " + e.mnemonic + " is implied by the opcode");
      case OperandSource::kImm8: break;
    }
  }
  throw std::invalid_argument("unknown instruction field " + field);
}

std::vector<BitVec> materialize_pattern(const std::vector<BytePattern>& pattern, SymInputs& in) {
  std::vector<BitVec> out;
  for (const auto& p : pattern) out.push_back(materialize(p, in));
  return out;
}

// Raw EVEX.z and EVEX.aaa bits of a materialized pattern, if present.
std::optional<std::pair<BitVec, BitVec>> evex_mask_bits(const std::vector<BytePattern>& pattern,
                                                        const std::vector<BitVec>& bytes) {
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (role_of(pattern[i]) == "p2") return std::pair{bv_slice(bytes[i], 7, 7), bv_slice(bytes[i], 0, 2)};
  return std::nullopt;
}

bool opens_both_mask_fields(const VariantQuery& q) {
  return q.symbolic.count("opmask") && q.symbolic.count("zeroing");
}

SolveOptions solve_options(const ProverOptions& o, double cap) {
  SolveOptions so;
  so.budget.seconds = std::min(o.budget_seconds, cap);
  so.budget.seed = o.seed;
  so.external_solver = o.external_solver;
  return so;
}

// Finds assignments with `cond` = 1: a counterexample to "cond is never 1".
ProofResult find_model(const BitVec& cond, const ProverOptions& o, double cap) {
  return prove_unsat(cond, solve_options(o, cap));
}

template <class Get>
isa::X86State state_from(Get get) {
  isa::X86State s;
  s.ip = get("IP", 64);
  for (unsigned i = 0; i < isa::kNumGprs; ++i) s.gpr[i] = get(std::string("GPR[") + isa::gpr_name(i) + "]", 64);
  for (unsigned i = 0; i < isa::kNumZmms; ++i) s.zmm[i] = get("ZMM[" + std::to_string(i) + "]", 512);
  for (unsigned i = 0; i < isa::kNumKs; ++i) s.k[i] = get("K[" + std::to_string(i) + "]", 64);
  s.zf = get("ZF", 1);
  s.sf = get("SF", 1);
  s.cf = get("CF", 1);
  return s;
}

struct StatePair {
  isa::X86State spec, ucode;
  BitVec cf_defined;
};

StatePair run_both(const Instruction& instr, const isa::X86State& s, const design::Design& d) {
  const BitVec no_fault = BitVec::zeros(8);
  isa::ExecResult r1 = isa::x86_exec(instr, s);
  isa::ExecResult r2 = ucode::run_xlate_ucode(instr, s, d);
  return {isa::x86_update(no_fault, r1, s), isa::x86_update(no_fault, r2, s), r1.cf_defined};
}

// Named comparison points between the two final states.
std::vector<std::pair<std::string, BitVec>> compare_points(const StatePair& p) {
  std::vector<std::pair<std::string, BitVec>> out;
  for (unsigned i = 0; i < isa::kNumGprs; ++i)
    out.emplace_back(isa::gpr_name(i), bv_eq(p.spec.gpr[i], p.ucode.gpr[i]));
  for (unsigned i = 0; i < isa::kNumZmms; ++i)
    out.emplace_back("ZMM" + std::to_string(i), bv_eq(p.spec.zmm[i], p.ucode.zmm[i]));
  out.emplace_back("ZF", bv_eq(p.spec.zf, p.ucode.zf));
  out.emplace_back("SF", bv_eq(p.spec.sf, p.ucode.sf));
  out.emplace_back("CF", bv_lor(bv_lnot(p.cf_defined), bv_eq(p.spec.cf, p.ucode.cf)));
  out.emplace_back("IP", bv_eq(p.spec.ip, p.ucode.ip));
  return out;
}

BitVec value_of(const isa::X86State& s, const std::string& loc) {
  for (unsigned i = 0; i < isa::kNumGprs; ++i)
    if (loc == isa::gpr_name(i)) return s.gpr[i];
  if (loc.rfind("ZMM", 0) == 0) return s.zmm[std::stoul(loc.substr(3))];
  if (loc == "ZF") return s.zf;
  if (loc == "SF") return s.sf;
  if (loc == "CF") return s.cf;
  return s.ip;
}

std::vector<std::string> traced_uops(const std::vector<std::uint8_t>& bytes, const design::Design& d) {
  const isa::DecodeResult dec = isa::x86_decode(bytes);
  std::vector<ucode::TraceEntry> trace;
  ucode::RunOptions opt;
  opt.trace = &trace;
  ucode::run_xlate_ucode(dec.instr, isa::X86State(), d, opt);
  std::vector<std::string> out;
  for (const auto& t : trace) out.push_back(ucode::format_uop(t.uop));
  return out;
}

std::string token_key(const GeneralInstance& gi, const design::Design& d) {
  std::ostringstream os;
  os << gi.fingerprint() << " design@" << static_cast<const void*>(&d);
  return os.str();
}

}  // namespace

VariantQuery default_query(const std::string& variant) {
  VariantQuery q;
  q.variant = variant;
  if (variant == "SHRD/reg64-imm8") {
    q.fixed = {{"op1", isa::RCX}, {"op2", isa::RDX}};
    q.symbolic = {"imm"};
  } else if (variant == "SHRD/reg64-cl") {
    q.fixed = {{"op1", isa::RCX}, {"op2", isa::RDX}};
  } else if (variant == "VPSHRDQ/zmm-imm8") {
    q.fixed = {{"op1", 1}, {"op2", 2}, {"op3", 3}};
    q.symbolic = {"imm", "opmask", "zeroing"};
  } else {
    throw std::invalid_argument("no default query for " + variant);
  }
  return q;
}

std::string GeneralInstance::fingerprint() const {
  std::ostringstream os;
  os << query.variant << " [";
  for (const auto& p : pattern) os << ' ' << int(p.fixed_mask) << ':' << int(p.fixed_value);
  os << " ]";
  return os.str();
}

LegalInstance find_legal_instance(const VariantQuery& q, const design::Design&, const ProverOptions& options) {
  auto [entry, size] = resolve_variant(q.variant);
  LegalInstance li;
  li.variant = q.variant;
  li.entry_id = entry->id;
  if (q.lock) li.pattern.push_back(BytePattern::fixed(0xF0));
  if (entry->encoding == isa::Encoding::kLegacy) li.pattern.push_back({0xF0, 0x40, "enc.rex"});
  auto body = encoding_pattern(*entry, "enc");
  li.pattern.insert(li.pattern.end(), body.begin(), body.end());

  Aig g;
  SymInputs in(g);
  const isa::DecodeResult dec = isa::x86_decode(materialize_pattern(li.pattern, in));
  const Instruction& instr = dec.instr;
  BitVec cond = bv_land(bv_eq(dec.dx, BitVec::zeros(8)), bv_eq(instr.entry, BitVec::constant(8, entry->id)));
  cond = bv_land(cond, bv_eq(instr.size, BitVec::constant(10, size)));
  for (const auto& [name, value] : q.fixed) {
    const BitVec& f = field_of(instr, name);
    cond = bv_land(cond, bv_eq(f, BitVec::constant(f.width(), value)));
  }
  ProofResult r = find_model(cond, options, 60.0);
  if (r.verdict == ProofVerdict::kProved) {
    li.reason = "no encoding of " + q.variant + (q.lock ? " with LOCK" : "") +
                " decodes without exception under the fixed fields";
    return li;
  }
  if (r.verdict != ProofVerdict::kCounterexample) throw std::runtime_error("find_legal_instance: solver budget exhausted");
  DecodeCase c{"base", li.pattern};
  li.bytes = concretize(c, in.evaluate(r.counterexample));
  li.instr = isa::x86_decode(li.bytes).instr;
  li.consistent = true;
  return li;
}

GeneralizeResult generalize_instance(const LegalInstance& base, const VariantQuery& q, const design::Design&,
                                     const ProverOptions& options) {
  GeneralizeResult out;
  if (!base.consistent) {
    out.reason = "no legal base instance: " + base.reason;
    return out;
  }
  const InstListEntry& e = isa::entry_by_id(base.entry_id);
  GeneralInstance& gi = out.instance;
  gi.base = base;
  gi.query = q;
  for (std::size_t i = 0; i < base.pattern.size(); ++i)
    gi.pattern.push_back({0xFF, base.bytes[i], base.pattern[i].var});

  for (const auto& field : q.symbolic) {
    if (field == "opcode") {
      // Any other opcode byte decodes to another entry or faults.
      std::size_t pos = 0;
      while (pos < base.pattern.size() && role_of(base.pattern[pos]) != "modrm") ++pos;
      --pos;  // the opcode byte precedes ModR/M
      for (unsigned op = 0; op < 256 && pos < base.bytes.size(); ++op) {
        if (op == e.opcode) continue;
        auto bytes = base.bytes;
        bytes[pos] = static_cast<std::uint8_t>(op);
        const isa::DecodeResult dec = isa::x86_decode(bytes);
        if (dec.dx.u64() != 0 || dec.instr.entry.u64() != e.id) {
          out.witness = bytes;
          out.reason = "opcode cannot be symbolic: " + hex_bytes(bytes) +
                       (dec.dx.u64() != 0 ? " raises " + std::string(isa::exception_name(dec.dx.u64()))
                                          : " decodes as " + isa::describe(dec.instr));
          return out;
        }
      }
      out.reason = "opcode cannot be symbolic";
      return out;
    }
    std::vector<Opening> openings;
    try {
      openings = field_openings(e, field);
    } catch (const std::invalid_argument& ex) {
      out.reason = ex.what();
      return out;
    }
    for (const auto& o : openings)
      for (auto& p : gi.pattern)
        if (role_of(p) == o.role) p.fixed_mask = static_cast<std::uint8_t>(p.fixed_mask & ~o.mask);
  }
  if (opens_both_mask_fields(q)) gi.assumptions.push_back("not (zeroing and opmask = k0)");

  Aig g;
  SymInputs in(g);
  const auto bytes = materialize_pattern(gi.pattern, in);
  const isa::DecodeResult dec = isa::x86_decode(bytes);
  BitVec bad = bv_lor(bv_ne(dec.dx, BitVec::zeros(8)), bv_ne(dec.instr.entry, base.instr.entry));
  bad = bv_lor(bad, bv_ne(dec.instr.size, base.instr.size));
  if (opens_both_mask_fields(q)) {
    auto zk = evex_mask_bits(gi.pattern, bytes);
    bad = bv_land(bad, bv_lnot(bv_land(zk->first, bv_eq(zk->second, BitVec::zeros(3)))));
  }
  ProofResult r = find_model(bad, options, 60.0);
  if (r.verdict == ProofVerdict::kProved) {
    out.ok = true;
    return out;
  }
  if (r.verdict != ProofVerdict::kCounterexample) {
    out.reason = "generalization proof ran out of budget";
    return out;
  }
  out.witness = concretize({"witness", gi.pattern}, in.evaluate(r.counterexample));
  const isa::DecodeResult w = isa::x86_decode(out.witness);
  out.reason = "opened encoding " + hex_bytes(out.witness) + " raises " + isa::exception_name(w.dx.u64());
  return out;
}

SymbolicInstr instantiate(const GeneralInstance& gi, SymInputs& in) {
  const auto bytes = materialize_pattern(gi.pattern, in);
  const isa::DecodeResult dec = isa::x86_decode(bytes);
  SymbolicInstr si;
  si.instr = gi.base.instr;
  for (const auto& field : gi.query.symbolic)
    if (field != "opcode") field_of(si.instr, field) = field_of(dec.instr, field);
  si.assumptions.push_back(bv_eq(dec.dx, BitVec::zeros(8)));
  if (opens_both_mask_fields(gi.query)) {
    auto zk = evex_mask_bits(gi.pattern, bytes);
    si.assumptions.push_back(bv_lnot(bv_land(zk->first, bv_eq(zk->second, BitVec::zeros(3)))));
  }
  return si;
}

std::vector<std::uint8_t> instance_bytes(const GeneralInstance& gi, const Values& v) {
  return concretize({"instance", gi.pattern}, v);
}

FixedSequenceCheck check_fixed_uop_sequence(const GeneralInstance& gi, const design::Design& d,
                                            const ProverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  FixedSequenceCheck out;
  auto finish = [&] {
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };
  ucode::MicroPC base_pc;
  try {
    base_pc = d.xlate(gi.base.instr);
  } catch (const std::exception& e) {
    out.reason = e.what();
    return finish();
  }
  const unsigned base_addr = static_cast<unsigned>(base_pc.rom_addr.u64());

  Aig g;
  SymInputs in(g);
  SymbolicInstr si = instantiate(gi, in);
  ucode::MicroPC pc;
  try {
    pc = d.xlate(si.instr);
  } catch (const std::exception& e) {
    out.reason = std::string("translation needs concrete fields: ") + e.what();
    return finish();
  }
  if (pc.prelude.size() != base_pc.prelude.size()) {
    out.reason = "prelude length depends on the opened fields";
    return finish();
  }
  BitVec bad = bv_land(conjunction(si.assumptions),
                       bv_ne(pc.rom_addr, BitVec::constant(ucode::kRomAddrBits, base_addr)));
  ProofResult r = find_model(bad, options, 120.0);
  if (r.verdict == ProofVerdict::kProved) {
    out.ok = true;
    out.token = FixedSequenceToken(token_key(gi, d), base_addr);
    return finish();
  }
  if (r.verdict != ProofVerdict::kCounterexample) {
    out.reason = "fixed-sequence check ran out of budget";
    return finish();
  }
  out.bytes_a = gi.base.bytes;
  out.bytes_b = instance_bytes(gi, in.evaluate(r.counterexample));
  out.uops_a = traced_uops(out.bytes_a, d);
  out.uops_b = traced_uops(out.bytes_b, d);
  const unsigned other = static_cast<unsigned>(d.xlate(isa::x86_decode(out.bytes_b).instr).rom_addr.u64());
  std::ostringstream os;
  os << "translation depends on the opened fields: " << hex_bytes(out.bytes_a) << " enters ROM at "
     << to_hex(base_addr, 12) << ", " << hex_bytes(out.bytes_b) << " at " << to_hex(other, 12);
  out.reason = os.str();
  return finish();
}

Obligation xlate_obligation(const GeneralInstance& gi, const design::Design& d) {
  Obligation ob;
  ob.name = "xlate/" + gi.query.variant;
  ob.kind = ObligationKind::kXlateUcode;
  ob.variant = gi.query.variant;
  ob.budget_seconds = gi.query.variant.rfind("VPSHRDQ", 0) == 0 ? 1800.0 : 600.0;
  ob.build = [gi, &d](SymInputs& in) {
    SymbolicInstr si = instantiate(gi, in);
    isa::X86State s = state_from([&](const std::string& n, unsigned w) { return in.var(n, w); });
    std::vector<BitVec> parts;
    for (auto& [loc, eq] : compare_points(run_both(si.instr, s, d))) parts.push_back(eq);
    return Goal{conjunction(parts), si.assumptions};
  };
  ob.replay = [gi, &d](const Values& v) {
    auto get = [&](const std::string& n, unsigned w) {
      auto it = v.find(n);
      return BitVec::constant(w, it == v.end() ? BigUint(0) : it->second);
    };
    const auto bytes = instance_bytes(gi, v);
    const isa::DecodeResult dec = isa::x86_decode(bytes);
    Divergence div;
    if (dec.dx.u64() != 0) {
      div.location = "decode";
      div.report = "bytes: " + hex_bytes(bytes) + "\nerror: instance raises a decode exception\n";
      return div;
    }
    const isa::X86State s = state_from(get);
    const StatePair p = run_both(dec.instr, s, d);
    for (const auto& [loc, eq] : compare_points(p)) {
      if (eq.is_true()) continue;
      div.reproduced = true;
      div.location = loc;
      std::ostringstream os;
      os << "bytes: " << hex_bytes(bytes) << "\n"
         << "instruction: " << isa::describe(dec.instr) << "\n"
         << "location: " << loc << "\n"
         << "initial: " << hex_of(value_of(s, loc)) << "\n"
         << "x86_exec: " << hex_of(value_of(p.spec, loc)) << "\n"
         << "ucode: " << hex_of(value_of(p.ucode, loc)) << "\n";
      for (unsigned i = 0; i < isa::kNumKs; ++i)
        if (!s.k[i].value().is_zero()) os << "K" << i << ": " << hex_of(s.k[i]) << "\n";
      div.report = os.str();
      return div;
    }
    return div;
  };
  return ob;
}

ObligationResult prove_xlate_ucode_correctness(const GeneralInstance& gi, const design::Design& d,
                                               const std::optional<FixedSequenceToken>& token,
                                               const ProverOptions& options) {
  if (!token) throw PrecheckError("xlate proof of " + gi.query.variant + " needs a passed fixed-uop-sequence check");
  if (token->fingerprint() != token_key(gi, d))
    throw PrecheckError("fixed-uop-sequence token does not belong to this instance of " + gi.query.variant);
  return run_obligation(xlate_obligation(gi, d), options);
}

XlatePipeline run_xlate_pipeline(const VariantQuery& q, const design::Design& d, const ProverOptions& options) {
  XlatePipeline p;
  p.base = find_legal_instance(q, d, options);
  if (!p.base.consistent) {
    p.failed_stage = "find_legal_instance";
    return p;
  }
  p.general = generalize_instance(p.base, q, d, options);
  if (!p.general->ok) {
    p.failed_stage = "generalize_instance";
    return p;
  }
  p.fixed = check_fixed_uop_sequence(p.general->instance, d, options);
  if (!p.fixed->ok) {
    p.failed_stage = "check_fixed_uop_sequence";
    return p;
  }
  p.proof = prove_xlate_ucode_correctness(p.general->instance, d, p.fixed->token, options);
  return p;
}

}  // namespace ucv::prover
