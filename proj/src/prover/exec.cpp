#include <set>
#include <sstream>

#include "ucv/prover/obligations.hpp"

namespace ucv::prover {

using ucode::RegClass;
using ucode::Uop;
using ucode::UopData;
using ucode::UopOpcode;
using ucode::UopResults;

namespace {

BitVec flag_equal(const isa::FlagWrite& a, const isa::FlagWrite& b) {
  BitVec en = bv_eq(a.enable, b.enable);
  return bv_land(en, bv_lor(bv_lnot(a.enable), bv_eq(a.value, b.value)));
}

// Same value, branch outcome and flag writes; a flag value matters only
// where it is written.
BitVec results_equal(const UopResults& a, const UopResults& b) {
  BitVec ok = bv_true();
  if (a.value.has_value() != b.value.has_value() || a.branch_taken.has_value() != b.branch_taken.has_value())
    return bv_false();
  if (a.value) ok = bv_land(ok, bv_eq(*a.value, *b.value));
  if (a.branch_taken) ok = bv_land(ok, bv_eq(*a.branch_taken, *b.branch_taken));
  ok = bv_land(ok, flag_equal(a.flags.zf, b.flags.zf));
  ok = bv_land(ok, flag_equal(a.flags.sf, b.flags.sf));
  return bv_land(ok, flag_equal(a.flags.cf, b.flags.cf));
}

Uop shape_uop(const ExecShape& s) {
  Uop u;
  u.opcode = s.op;
  u.ssz = s.ssz;
  u.dsz = s.dsz;
  u.dst = ucode::RegRef::make(ucode::is_packed(s.op) ? RegClass::kT : RegClass::kG, 0);
  return u;
}

struct ExecVars {
  UopData data;
  BitVec predicate, flag_mask, maskmode, undriven;
};

ExecVars exec_vars(const ExecShape& s, const std::function<BitVec(const std::string&, unsigned)>& get) {
  const unsigned w = design::exec_width(s.op);
  ExecVars v;
  v.data.src1 = get("src1", w);
  v.data.src2 = get("src2", w);
  v.data.old_dst = get("old", w);
  v.data.zf = get("zf", 1);
  v.data.lane_mask = get("lane_mask", 4);
  v.predicate = get("pred", 2);
  v.flag_mask = get("fmask", 3);
  v.maskmode = get("maskmode", 1);
  v.undriven = get("undriven", 64);
  return v;
}

UopResults dut_side(const ExecShape& s, const ExecVars& v, const design::BugRegistry& bugs) {
  const auto& c = design::build_exec_circuits().at(s.op);
  design::ExecInputs in;
  in.src1 = v.data.src1;
  in.src2 = v.data.src2;
  in.old_dst = v.data.old_dst;
  in.zf = v.data.zf;
  in.lane_mask = v.data.lane_mask;
  in.predicate = v.predicate;
  in.flag_mask = v.flag_mask;
  in.maskmode = v.maskmode;
  in.undriven = v.undriven;
  BitVec out = c.eval(design::map_exec(in, c.width), {s.ssz, s.dsz}, bugs);
  return design::get_results(design::get_outputs(out, c.width), shape_uop(s));
}

// uop_semantics for each concrete (predicate, flag mask) pair, selected by
// the symbolic control inputs.
BitVec spec_matches(const ExecShape& s, const ExecVars& v, const UopResults& dut) {
  std::vector<BitVec> parts;
  for (unsigned p = 0; p < 4; ++p) {
    for (unsigned f = 0; f < 8; ++f) {
      Uop u = shape_uop(s);
      u.predicate = static_cast<ucode::Predicate>(p);
      u.flag_mask = f;
      u.maskmode = v.maskmode;
      BitVec sel = bv_land(bv_eq(v.predicate, BitVec::constant(2, p)), bv_eq(v.flag_mask, BitVec::constant(3, f)));
      parts.push_back(bv_lor(bv_lnot(sel), results_equal(ucode::uop_semantics(u, v.data), dut)));
    }
  }
  return conjunction(parts);
}

std::string hex_of(const BitVec& b) { return to_hex(b.value(), b.width()); }

std::string describe_results(const UopResults& r) {
  std::ostringstream os;
  if (r.value) os << "value=" << hex_of(*r.value);
  if (r.branch_taken) os << "taken=" << r.branch_taken->u64();
  const std::pair<const char*, const isa::FlagWrite*> flags[] = {
      {"ZF", &r.flags.zf}, {"SF", &r.flags.sf}, {"CF", &r.flags.cf}};
  for (auto [name, f] : flags)
    if (f->enable.is_true()) os << " " << name << "=" << f->value.u64();
  return os.str();
}

Divergence replay_exec(const ExecShape& s, const design::Design& d, const Values& values) {
  ExecVars v = exec_vars(s, [&](const std::string& name, unsigned w) {
    auto it = values.find(name);
    return BitVec::constant(w, it == values.end() ? BigUint(0) : it->second);
  });
  Uop u = shape_uop(s);
  u.predicate = static_cast<ucode::Predicate>(v.predicate.u64());
  u.flag_mask = static_cast<unsigned>(v.flag_mask.u64());
  u.maskmode = v.maskmode;
  const UopResults spec = ucode::uop_semantics(u, v.data);
  const UopResults dut = d.exec(u, v.data, v.undriven);
  Divergence div;
  if (results_equal(spec, dut).is_true()) return div;
  div.reproduced = true;
  if (spec.value && dut.value && !bv_eq(*spec.value, *dut.value).is_true()) div.location = "value";
  else if (spec.branch_taken && !bv_eq(*spec.branch_taken, *dut.branch_taken).is_true()) div.location = "taken";
  else if (!flag_equal(spec.flags.zf, dut.flags.zf).is_true()) div.location = "ZF";
  else if (!flag_equal(spec.flags.sf, dut.flags.sf).is_true()) div.location = "SF";
  else div.location = "CF";
  std::ostringstream os;
  os << "uop: " << ucode::format_uop(u) << "\n"
     << "src1: " << hex_of(v.data.src1) << "\n"
     << "src2: " << hex_of(v.data.src2) << "\n"
     << "old: " << hex_of(v.data.old_dst) << "\n"
     << "zf: " << v.data.zf.u64() << "\n"
     << "lane_mask: " << v.data.lane_mask.u64() << "\n"
     << "undriven: " << hex_of(v.undriven) << "\n"
     << "uop_semantics: " << describe_results(spec) << "\n"
     << "dut_exec: " << describe_results(dut) << "\n";
  div.report = os.str();
  return div;
}

}  // namespace

std::string ExecShape::name() const {
  return std::string(ucode::opcode_name(op)) + "@" + std::to_string(ssz) + "x" + std::to_string(dsz);
}

std::string exec_obligation_name(const ExecShape& s) { return "exec/" + s.name(); }

std::vector<std::uint8_t> canonical_bytes(const std::string& variant) {
  if (variant == "SHRD/reg64-imm8") return {0x48, 0x0F, 0xAC, 0xD1, 0x10};
  if (variant == "SHRD/reg64-cl") return {0x48, 0x0F, 0xAD, 0xD1};
  if (variant == "VPSHRDQ/zmm-imm8") return {0x62, 0xF3, 0xED, 0x49, 0x73, 0xCB, 0x10};
  throw std::invalid_argument("no canonical encoding for " + variant);
}

std::vector<ExecShape> exec_shapes_for(const std::string& variant, const design::Design& d) {
  const auto bytes = canonical_bytes(variant);
  const isa::DecodeResult dec = isa::x86_decode(bytes);
  if (dec.dx.u64() != 0) throw std::invalid_argument("canonical encoding of " + variant + " does not decode");
  const ucode::MicroPC pc = d.xlate(dec.instr);
  std::set<ExecShape> shapes;
  auto note = [&](const Uop& u) {
    if (u.opcode != UopOpcode::kNop && u.opcode != UopOpcode::kHalt) shapes.insert({u.opcode, u.ssz, u.dsz});
  };
  for (const auto& u : pc.prelude) note(u);
  std::set<unsigned> seen;
  std::vector<unsigned> work{static_cast<unsigned>(pc.rom_addr.u64())};
  while (!work.empty()) {
    const unsigned addr = work.back();
    work.pop_back();
    if (addr == ucode::kHaltAddress || !seen.insert(addr).second) continue;
    const BitVec a = BitVec::constant(ucode::kRomAddrBits, addr);
    const Uop u = d.read(a, pc.side);
    note(u);
    for (bool taken : {false, true}) {
      work.push_back(static_cast<unsigned>(d.step(a, taken ? bv_true() : bv_false()).u64()));
      if (u.opcode != UopOpcode::kJe) break;
    }
  }
  return {shapes.begin(), shapes.end()};
}

std::vector<ExecShape> exec_suite(const design::Design& d) {
  std::set<ExecShape> all;
  for (const auto& v : d.xlate_variants()) {
    auto s = exec_shapes_for(v, d);
    all.insert(s.begin(), s.end());
  }
  return {all.begin(), all.end()};
}

Obligation exec_obligation(const design::Design& d, ExecShape shape) {
  Obligation ob;
  ob.name = exec_obligation_name(shape);
  ob.kind = ObligationKind::kExec;
  ob.variant = shape.name();
  ob.budget_seconds = 120.0;
  ob.build = [shape, &d](SymInputs& in) {
    ExecVars v = exec_vars(shape, [&](const std::string& name, unsigned w) { return in.var(name, w); });
    return Goal{spec_matches(shape, v, dut_side(shape, v, d.bugs())), {}};
  };
  ob.replay = [shape, &d](const Values& values) { return replay_exec(shape, d, values); };
  return ob;
}

std::vector<Obligation> exec_obligations(const design::Design& d) {
  std::vector<Obligation> out;
  for (const auto& s : exec_suite(d)) out.push_back(exec_obligation(d, s));
  return out;
}

}  // namespace ucv::prover
