#include <sstream>

#include "ucv/isa/catalog.hpp"
#include "ucv/prover/obligations.hpp"

namespace ucv::prover {

using isa::DecodeResult;
using isa::Encoding;
using isa::OpcodeMap;

namespace {

constexpr unsigned kSegmentPrefix = 0x2E;

bool is_prefix_or_escape(unsigned b) {
  switch (b) {
    case 0xF0: case 0xF2: case 0xF3: case 0x66: case 0x67:
    case 0x2E: case 0x36: case 0x3E: case 0x26: case 0x64: case 0x65:
    case 0x0F: case 0x62:
      return true;
  }
  return (b & 0xF0) == 0x40;
}

BytePattern sym(const std::string& name) { return {0x00, 0x00, name}; }

std::vector<BytePattern> map_escape(OpcodeMap m) {
  switch (m) {
    case OpcodeMap::kOneByte: return {};
    case OpcodeMap::k0F: return {BytePattern::fixed(0x0F)};
    case OpcodeMap::k0F38: return {BytePattern::fixed(0x0F), BytePattern::fixed(0x38)};
    case OpcodeMap::k0F3A: return {BytePattern::fixed(0x0F), BytePattern::fixed(0x3A)};
  }
  return {};
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

std::vector<BitVec> materialize_all(const DecodeCase& c, SymInputs& in) {
  std::vector<BitVec> out;
  for (const auto& p : c.bytes) out.push_back(materialize(p, in));
  return out;
}

// Body of a legacy encoding after the prefixes: escape, opcode, ModR/M and
// immediate, each open byte named after `tag`.
std::vector<BytePattern> legacy_body(const isa::InstListEntry& e, const std::string& tag) {
  std::vector<BytePattern> body = map_escape(e.map);
  body.push_back(BytePattern::fixed(static_cast<std::uint8_t>(e.opcode)));
  if (e.group_digit >= 0)
    body.push_back({0x38, static_cast<std::uint8_t>(e.group_digit << 3), tag + ".modrm"});
  else
    body.push_back(sym(tag + ".modrm"));
  if (e.has_imm8()) body.push_back(sym(tag + ".imm"));
  return body;
}

std::vector<BytePattern> evex_body(const isa::InstListEntry& e, const std::string& tag) {
  std::vector<BytePattern> body{BytePattern::fixed(0x62),
                                {0x03, static_cast<std::uint8_t>(e.map), tag + ".p0"},
                                sym(tag + ".p1"), sym(tag + ".p2"),
                                BytePattern::fixed(static_cast<std::uint8_t>(e.opcode)),
                                sym(tag + ".modrm")};
  if (e.has_imm8()) body.push_back(sym(tag + ".imm"));
  return body;
}

// Replays every case concretely and reports the first disagreement.
Divergence replay_cases(const std::vector<DecodeCase>& cases, const design::Design& d, const Values& v,
                        bool require_ud) {
  Divergence div;
  for (const auto& c : cases) {
    const auto bytes = concretize(c, v);
    const DecodeResult spec = isa::x86_decode(bytes);
    const DecodeResult dut = d.decode(isa::bytes_of(bytes));
    const bool agree = isa::decode_results_equal(spec, dut).is_true();
    const bool ud_ok = !require_ud || (spec.dx.u64() == isa::kExUD && dut.dx.u64() == isa::kExUD);
    if (agree && ud_ok) continue;
    div.reproduced = true;
    std::ostringstream os;
    os << "case: " << c.label << "\n"
       << "bytes: " << hex_bytes(bytes) << "\n"
       << "x86_decode.dx: " << spec.dx.u64() << "\n"
       << "dut_decode.dx: " << dut.dx.u64() << "\n";
    if (spec.dx.u64() == 0) os << "x86_decode.instr: " << isa::describe(spec.instr) << "\n";
    if (dut.dx.u64() == 0) os << "dut_decode.instr: " << isa::describe(dut.instr) << "\n";
    div.location = spec.dx.u64() != dut.dx.u64() ? "dx" : (agree ? "expected #UD" : "instruction fields");
    div.report = os.str();
    return div;
  }
  return div;
}

Obligation make_decode_obligation(std::string name, std::string variant, std::vector<DecodeCase> cases,
                                  const design::Design& d, bool require_ud) {
  Obligation ob;
  ob.name = std::move(name);
  ob.kind = ObligationKind::kDecode;
  ob.variant = std::move(variant);
  ob.budget_seconds = 60.0;
  ob.build = [cases, &d, require_ud](SymInputs& in) {
    std::vector<BitVec> parts;
    for (const auto& c : cases) {
      const auto bytes = materialize_all(c, in);
      const DecodeResult spec = isa::x86_decode(bytes);
      const DecodeResult dut = d.decode(bytes);
      BitVec ok = isa::decode_results_equal(spec, dut);
      if (require_ud)
        ok = bv_land(ok, bv_land(bv_eq(spec.dx, BitVec::constant(8, isa::kExUD)),
                                 bv_eq(dut.dx, BitVec::constant(8, isa::kExUD))));
      parts.push_back(ok);
    }
    return Goal{conjunction(parts), {}};
  };
  ob.replay = [cases, &d, require_ud](const Values& v) { return replay_cases(cases, d, v, require_ud); };
  return ob;
}

}  // namespace

std::vector<BytePattern> encoding_pattern(const isa::InstListEntry& e, const std::string& tag) {
  return e.encoding == Encoding::kEvex ? evex_body(e, tag) : legacy_body(e, tag);
}

BitVec materialize(const BytePattern& p, SymInputs& in) {
  if (p.fixed_mask == 0xFF || p.var.empty()) return BitVec::constant(8, p.fixed_value);
  const BitVec v = in.var(p.var, 8);
  const BitVec mask = BitVec::constant(8, p.fixed_mask);
  return bv_or(bv_and(v, bv_not(mask)), BitVec::constant(8, p.fixed_value & p.fixed_mask));
}

std::vector<std::uint8_t> concretize(const DecodeCase& c, const Values& v) {
  std::vector<std::uint8_t> out;
  for (const auto& p : c.bytes) {
    unsigned open = 0;
    if (!p.var.empty()) {
      auto it = v.find(p.var);
      if (it != v.end()) open = static_cast<unsigned>(it->second & 0xFF);
    }
    out.push_back(static_cast<std::uint8_t>((open & ~p.fixed_mask) | (p.fixed_value & p.fixed_mask)));
  }
  return out;
}

std::vector<DecodeCase> decode_cases_for_entry(unsigned entry_id) {
  const auto& e = isa::entry_by_id(entry_id);
  std::vector<DecodeCase> cases;
  const std::vector<std::vector<std::uint8_t>> prefix_sets = {
      {}, {0x66}, {0xF0}, {0xF2}, {0xF3}, {0xF0, 0x66}, {kSegmentPrefix}};
  unsigned n = 0;
  for (const auto& pfx : prefix_sets) {
    for (int rex = 0; rex < 2; ++rex) {
      const std::string tag = "c" + std::to_string(n++);
      DecodeCase c;
      std::ostringstream label;
      label << "prefixes={" << hex_bytes(pfx) << "}" << (rex ? " rex" : "");
      for (auto b : pfx) c.bytes.push_back(BytePattern::fixed(b));
      if (rex) c.bytes.push_back({0xF0, 0x40, tag + ".rex"});
      auto body = e.encoding == Encoding::kEvex ? evex_body(e, tag) : legacy_body(e, tag);
      c.bytes.insert(c.bytes.end(), body.begin(), body.end());
      c.label = label.str();
      cases.push_back(c);
      // Truncated by one byte.
      DecodeCase t = c;
      t.bytes.pop_back();
      t.label += " truncated";
      cases.push_back(std::move(t));
    }
  }
  // Longer than the architectural limit.
  DecodeCase lng;
  lng.label = "over-length";
  for (unsigned i = 0; i < isa::kMaxInstructionLength - 1; ++i) lng.bytes.push_back(BytePattern::fixed(kSegmentPrefix));
  auto body = e.encoding == Encoding::kEvex ? evex_body(e, "long") : legacy_body(e, "long");
  lng.bytes.insert(lng.bytes.end(), body.begin(), body.end());
  cases.push_back(std::move(lng));
  return cases;
}

std::vector<DecodeCase> decode_no_match_cases() {
  std::vector<DecodeCase> cases;
  auto add = [&](std::string label, std::vector<BytePattern> bytes) {
    const std::string tag = "n" + std::to_string(cases.size());
    bytes.push_back(sym(tag + ".b0"));
    bytes.push_back(sym(tag + ".b1"));
    cases.push_back({std::move(label), std::move(bytes)});
  };
  const OpcodeMap maps[] = {OpcodeMap::kOneByte, OpcodeMap::k0F, OpcodeMap::k0F38, OpcodeMap::k0F3A};
  for (OpcodeMap m : maps) {
    for (unsigned op = 0; op < 256; ++op) {
      if (m == OpcodeMap::kOneByte && is_prefix_or_escape(op)) continue;
      if (m == OpcodeMap::k0F && (op == 0x38 || op == 0x3A)) continue;
      auto body = map_escape(m);
      body.push_back(BytePattern::fixed(static_cast<std::uint8_t>(op)));
      const std::string label = "map" + std::to_string(static_cast<unsigned>(m)) + " opcode " +
                                hex_bytes({static_cast<std::uint8_t>(op)});
      if (isa::is_group_opcode(Encoding::kLegacy, m, op)) {
        for (unsigned digit = 0; digit < 8; ++digit) {
          if (isa::find_entry(Encoding::kLegacy, m, op, digit)) continue;
          auto b = body;
          b.push_back({0x38, static_cast<std::uint8_t>(digit << 3), "n" + std::to_string(cases.size()) + ".modrm"});
          add(label + " /" + std::to_string(digit), b);
        }
      } else if (!isa::find_entry(Encoding::kLegacy, m, op, 0)) {
        add(label, body);
      }
    }
  }
  for (unsigned mm = 0; mm < 4; ++mm) {
    for (unsigned op = 0; op < 256; ++op) {
      if (mm != 0 && isa::find_entry(Encoding::kEvex, static_cast<OpcodeMap>(mm), op, 0)) continue;
      const std::string tag = "e" + std::to_string(mm) + "_" + std::to_string(op);
      add("evex mm=" + std::to_string(mm) + " opcode " + hex_bytes({static_cast<std::uint8_t>(op)}),
          {BytePattern::fixed(0x62), {0x03, static_cast<std::uint8_t>(mm), tag + ".p0"}, sym(tag + ".p1"),
           sym(tag + ".p2"), BytePattern::fixed(static_cast<std::uint8_t>(op))});
    }
  }
  return cases;
}

std::string decode_obligation_name(unsigned entry_id) {
  const auto& e = isa::entry_by_id(entry_id);
  return "decode/" + e.mnemonic + "/" + e.variant;
}

Obligation decode_obligation(const design::Design& d, unsigned entry_id) {
  const auto& e = isa::entry_by_id(entry_id);
  return make_decode_obligation(decode_obligation_name(entry_id), e.mnemonic + "/" + e.variant,
                                decode_cases_for_entry(entry_id), d, false);
}

Obligation decode_no_match_obligation(const design::Design& d) {
  return make_decode_obligation("decode/no-match", "", decode_no_match_cases(), d, true);
}

Obligation decode_lock_ud_obligation(const design::Design& d) {
  std::vector<DecodeCase> cases;
  for (const char* variant : {"imm8", "cl"}) {
    const auto& e = isa::lookup("SHRD", variant);
    const std::string tag = std::string("lock.") + variant;
    DecodeCase c{std::string("LOCK SHRD ") + variant, {BytePattern::fixed(0xF0), {0xF0, 0x40, tag + ".rex"}}};
    auto body = legacy_body(e, tag);
    // Register destination: ModR/M.mod = 11.
    body[map_escape(e.map).size() + 1] = {0xC0, 0xC0, tag + ".modrm"};
    c.bytes.insert(c.bytes.end(), body.begin(), body.end());
    cases.push_back(std::move(c));
  }
  return make_decode_obligation("decode/lock-ud", "SHRD", std::move(cases), d, true);
}

Obligation decode_evex_k0_obligation(const design::Design& d) {
  const auto& e = isa::lookup("VPSHRDQ");
  auto body = evex_body(e, "k0");
  // z = 1 and aaa = 000; the rest of P2 stays open.
  body[3] = {0x87, 0x80, "k0.p2"};
  return make_decode_obligation("decode/evex-zeromask-k0", "VPSHRDQ/zmm-imm8", {{"EVEX z=1 k0", body}}, d, true);
}

std::vector<Obligation> decode_obligations(const design::Design& d) {
  std::vector<Obligation> out;
  for (const auto& e : isa::load_inst_table()) out.push_back(decode_obligation(d, e.id));
  out.push_back(decode_no_match_obligation(d));
  out.push_back(decode_lock_ud_obligation(d));
  out.push_back(decode_evex_k0_obligation(d));
  return out;
}

}  // namespace ucv::prover
