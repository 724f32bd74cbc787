#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ucv/isa/catalog.hpp"
#include "ucv/isa/decode.hpp"
#include "ucv/isa/semantics.hpp"
#include "ucv/isa/state.hpp"

using namespace ucv;
using namespace ucv::isa;
using ucv::testing::mask_of;

namespace {

const std::vector<std::uint8_t> kShrdBytes = {0x48, 0x0F, 0xAC, 0xD1, 0x10};
const std::vector<std::uint8_t> kVpshrdqBytes = {0x62, 0xF3, 0xED, 0x48, 0x73, 0xCB, 0x10};

X86State example_state() {
  X86State s;
  s.ip = BitVec::constant(64, 0x1000);
  s.gpr[RCX] = BitVec::constant(64, 0x0123456789ABCDEFULL);
  s.gpr[RDX] = BitVec::constant(64, 0x1122334455667788ULL);
  load_code(s, 0x1000, kShrdBytes);
  return s;
}

BitVec c64(std::uint64_t v) { return BitVec::constant(64, v); }

BigUint broadcast(std::uint64_t lane) {
  BigUint v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 64) | lane;
  return v;
}

}  // namespace

TEST_CASE("catalog") {
  const auto& shrd = lookup("SHRD", "imm8");
  CHECK(shrd.map == OpcodeMap::k0F);
  CHECK(shrd.opcode == 0xAC);
  REQUIRE(shrd.operands.size() == 3);
  CHECK(shrd.operands[2].source == OperandSource::kImm8);
  CHECK(shrd.has_exception(ExceptionCondition::kLockPrefix));
  CHECK(lookup("VPSHRDQ").encoding == Encoding::kEvex);
  CHECK(lookup("SHRD", "cl").opcode == 0xAD);
  for (const char* m : {"AND", "OR", "XOR", "ADD", "SUB", "MOV", "MOVZX", "MOVSX", "SHR", "SHL", "ROR"}) {
    CHECK_NOTHROW(lookup(m));
  }
  for (const auto& e : load_inst_table())
    for (const auto& x : e.exceptions) CHECK(!x.text.empty());
  CHECK(variant_id(shrd, 64) == "SHRD/reg64-imm8");
  CHECK(variant_id(lookup("SHRD", "cl"), 64) == "SHRD/reg64-cl");
  CHECK(variant_id(lookup("VPSHRDQ"), 512) == "VPSHRDQ/zmm-imm8");

  auto entries = load_inst_table();
  entries.push_back(entries[0]);
  CHECK_THROWS_AS(build_inst_table(entries), CatalogError);
}

TEST_CASE("fetch") {
  X86State s = example_state();
  auto bytes = x86_fetch_code(0x1000, s.memory);
  REQUIRE(bytes.size() == 5);
  CHECK(bytes[2].u64() == 0xAC);
  CHECK(x86_fetch_code(0x1002, s.memory).size() == 3);
  CHECK_THROWS_AS(x86_fetch_code(0x2000, s.memory), FetchError);
}

TEST_CASE("decode examples") {
  DecodeResult d = x86_decode(kShrdBytes);
  REQUIRE(d.dx.u64() == 0);
  CHECK(entry_by_id(static_cast<unsigned>(d.instr.entry.u64())).mnemonic == "SHRD");
  CHECK(d.instr.size.u64() == 64);
  CHECK(d.instr.op1.u64() == RCX);
  CHECK(d.instr.op2.u64() == RDX);
  CHECK(d.instr.imm.u64() == 0x10);
  CHECK(d.instr.length.u64() == 5);

  std::vector<std::uint8_t> locked = {0xF0};
  locked.insert(locked.end(), kShrdBytes.begin(), kShrdBytes.end());
  CHECK(x86_decode(locked).dx.u64() == kExUD);

  DecodeResult v = x86_decode(kVpshrdqBytes);
  REQUIRE(v.dx.u64() == 0);
  CHECK(entry_by_id(static_cast<unsigned>(v.instr.entry.u64())).mnemonic == "VPSHRDQ");
  CHECK(v.instr.op1.u64() == 1);
  CHECK(v.instr.op2.u64() == 2);
  CHECK(v.instr.op3.u64() == 3);
  CHECK(v.instr.imm.u64() == 0x10);
  CHECK(v.instr.opmask.u64() == 0);
  CHECK(v.instr.zeroing.u64() == 0);
  CHECK(v.instr.size.u64() == 512);

  CHECK(x86_decode({0x62, 0xF3, 0xED, 0xC8, 0x73, 0xCB, 0x10}).dx.u64() == kExUD);
  CHECK(x86_decode({0x62, 0xF3, 0xED, 0xC9, 0x73, 0xCB, 0x10}).dx.u64() == 0);

  std::vector<std::uint8_t> longest(15, 0x66);
  longest.push_back(0x21);
  longest.push_back(0xC0);
  CHECK(x86_decode(longest).dx.u64() == kExUD);

  CHECK(x86_decode({0x48, 0x0F, 0xAC, 0x11, 0x10}).dx.u64() == kExUnsupported);
  CHECK(x86_decode({0x48, 0x0F, 0xAC}).dx.u64() == kExIncomplete);
  CHECK(x86_decode({0x0F, 0x0B}).dx.u64() == kExUD);
  CHECK(x86_decode({0xF0, 0x21, 0x08}).dx.u64() == kExUnsupported);  // LOCK AND with memory destination
  CHECK(x86_decode({0xF0, 0x21, 0xC8}).dx.u64() == kExUD);
  CHECK(x86_decode({0x66, 0x62, 0xF3, 0xED, 0x48, 0x73, 0xCB, 0x10}).dx.u64() == kExUD);
  CHECK(x86_decode({0x62, 0xF3, 0xED, 0x58, 0x73, 0xCB, 0x10}).dx.u64() == kExUD);  // b on register form
  CHECK(x86_decode({0x62, 0xF3, 0x6D, 0x48, 0x73, 0xCB, 0x10}).dx.u64() == kExUD);  // W0 is not in the table

  DecodeResult movzx = x86_decode({0x0F, 0xB6, 0xC4});  // MOVZX EAX, AH
  REQUIRE(movzx.dx.u64() == 0);
  CHECK(movzx.instr.high8.u64() == 1);
  CHECK(movzx.instr.size.u64() == 32);
  CHECK(x86_decode({0x40, 0x0F, 0xB6, 0xC4}).instr.high8.u64() == 0);  // SPL with REX

  Aig g;
  std::vector<BitVec> sym = bytes_of(kShrdBytes);
  sym[4] = bv_var(g, 8, "imm8");
  DecodeResult s = x86_decode(std::span<const BitVec>(sym));
  CHECK(s.dx.is_concrete());
  CHECK(s.instr.imm.same_as(sym[4]));
  sym[2] = bv_var(g, 8, "opcode");
  CHECK_THROWS_AS(x86_decode(std::span<const BitVec>(sym)), SymbolicBranchError);
}

TEST_CASE("decode is total over random byte strings") {
  std::mt19937_64 rng(99);
  const std::uint8_t interesting[] = {0x48, 0x4C, 0x0F, 0xAC, 0xAD, 0x62, 0xF3, 0xED, 0x73, 0x66, 0xF0,
                                      0x21, 0xC1, 0xB6, 0xBE, 0x89, 0xC8, 0xD1, 0x3A, 0x40};
  int bad = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<std::uint8_t> bytes(1 + rng() % 15);
    for (auto& b : bytes) b = (rng() % 2) ? interesting[rng() % std::size(interesting)] : static_cast<std::uint8_t>(rng());
    DecodeResult d = x86_decode(bytes);
    if (!d.dx.is_concrete()) ++bad;
    bool zero_fields = true;
    for (const BitVec* f : d.instr.fields()) zero_fields = zero_fields && f->value() == 0;
    if (d.dx.u64() != 0 && !zero_fields) ++bad;
    if (d.dx.u64() == 0 && (d.instr.length.u64() == 0 || d.instr.length.u64() > bytes.size())) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("encode round-trips every catalog variant") {
  std::mt19937_64 rng(5);
  int mismatches = 0;
  for (const auto& e : load_inst_table()) {
    for (int i = 0; i < 200; ++i) {
      Instruction in;
      in.entry = BitVec::constant(8, e.id);
      unsigned size = e.sizes[rng() % e.sizes.size()];
      in.size = BitVec::constant(10, size);
      unsigned bound = e.encoding == Encoding::kEvex ? 32 : 16;
      BitVec* slots[3] = {&in.op1, &in.op2, &in.op3};
      unsigned slot = 0;
      for (const auto& op : e.operands) {
        if (op.source == OperandSource::kImm8) continue;
        *slots[slot++] = BitVec::constant(5, op.source == OperandSource::kRegCL ? RCX : rng() % bound);
      }
      if (e.has_imm8()) in.imm = BitVec::constant(8, rng() % 256);
      if (e.encoding == Encoding::kEvex) {
        in.opmask = BitVec::constant(3, rng() % 8);
        in.zeroing = BitVec::constant(1, in.opmask.u64() != 0 ? rng() % 2 : 0);
      } else {
        in.prefixes = BitVec::constant(4, size == 16 ? 2 : 0);
      }
      if (e.mnemonic == "MOVZX" || e.mnemonic == "MOVSX") {
        bool legacy_high = (in.op2.u64() & 0xC) == 4 && rng() % 2;
        in.high8 = BitVec::constant(1, legacy_high ? 1 : 0);
        // AH..BH cannot be combined with a REX prefix.
        if (legacy_high && (size == 64 || in.op1.u64() >= 8)) in.high8 = BitVec::zeros(1);
      }
      auto bytes = encode(in);
      in.length = BitVec::constant(4, bytes.size());
      DecodeResult d = x86_decode(bytes);
      if (d.dx.u64() != 0 || !decode_results_equal(d, DecodeResult{BitVec::zeros(8), in}).is_true()) {
        ++mismatches;
        MESSAGE(describe(in));
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("shrd_spec") {
  ShrdResult r = shrd_spec(c64(0x0123456789ABCDEFULL), c64(0x1122334455667788ULL), BitVec::constant(8, 16), 64);
  CHECK(r.result.u64() == 0x77880123456789ABULL);
  CHECK(r.flags.cf.value.u64() == 1);  // bit 15 of dest (0xCDEF)
  ShrdResult z = shrd_spec(c64(0xABCD), c64(0x1234), BitVec::constant(8, 0), 64);
  CHECK(z.result.u64() == 0xABCD);
  CHECK(z.flags.zf.enable.is_false());
  CHECK(z.flags.cf.enable.is_false());
  ShrdResult r80 = shrd_spec(c64(0x0123456789ABCDEFULL), c64(0x1122334455667788ULL), BitVec::constant(8, 80), 64);
  CHECK(r80.result.u64() == r.result.u64());

  // Exhaustive 4-bit toy width against the concat-shift oracle.
  Aig g;
  BitVec d = bv_var(g, 4, "d"), s = bv_var(g, 4, "s"), a = bv_var(g, 3, "a");
  ShrdResult sym = shrd_spec(d, s, a, 4);
  int disagreements = 0;
  for (unsigned dv = 0; dv < 16; ++dv)
    for (unsigned sv = 0; sv < 16; ++sv)
      for (unsigned av = 0; av < 8; ++av) {
        Env env;
        ucv::testing::assign(env, d, dv);
        ucv::testing::assign(env, s, sv);
        ucv::testing::assign(env, a, av);
        BigUint expect = ucv::testing::oracle_shrd(dv, sv, av, 4);
        if (bv_eval(sym.result, env) != expect) ++disagreements;
        if (av != 0 && bv_eval(sym.flags.cf.value, env) != ((((sv << 4 | dv) >> (av - 1)) & 1))) ++disagreements;
      }
  CHECK(disagreements == 0);

  std::mt19937_64 rng(42);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t dv = rng(), sv = rng();
    unsigned av = static_cast<unsigned>(rng() % 256);
    ShrdResult c = shrd_spec(c64(dv), c64(sv), BitVec::constant(8, av), 64);
    if (c.result.value() != ucv::testing::oracle_shrd(dv, sv, av, 64)) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("vpshrdq_spec") {
  std::array<BitVec, kNumKs> k;
  k.fill(BitVec::zeros(64));
  BitVec src1 = BitVec::constant(512, broadcast(0x0123456789ABCDEFULL));
  BitVec src2 = BitVec::constant(512, broadcast(0x1122334455667788ULL));
  BitVec old = BitVec::constant(512, broadcast(0xDEADBEEFULL));
  BitVec r = vpshrdq_spec(src1, src2, BitVec::constant(8, 16), BitVec::zeros(3), bv_false(), k, old);
  CHECK(r.value() == broadcast(0x77880123456789ABULL));

  k[3] = BitVec::constant(64, 0xFE);  // lane 0 inactive
  BitVec zeroed = vpshrdq_spec(src1, src2, BitVec::constant(8, 16), BitVec::constant(3, 3), bv_true(), k, old);
  CHECK(ucv::testing::lane_of(zeroed.value(), 0) == 0);
  CHECK(ucv::testing::lane_of(zeroed.value(), 1) == 0x77880123456789ABULL);
  BitVec merged = vpshrdq_spec(src1, src2, BitVec::constant(8, 16), BitVec::constant(3, 3), bv_false(), k, old);
  CHECK(ucv::testing::lane_of(merged.value(), 0) == 0xDEADBEEFULL);

  std::mt19937_64 rng(8);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    BigUint a = ucv::testing::random_value(rng, 512), b = ucv::testing::random_value(rng, 512),
            o = ucv::testing::random_value(rng, 512);
    std::vector<BigUint> kv;
    std::array<BitVec, kNumKs> kr;
    for (unsigned j = 0; j < kNumKs; ++j) {
      kv.push_back(rng());
      kr[j] = BitVec::constant(64, kv.back());
    }
    unsigned imm = static_cast<unsigned>(rng() % 256), idx = static_cast<unsigned>(rng() % 8);
    bool zero = rng() % 2;
    BitVec got = vpshrdq_spec(BitVec::constant(512, a), BitVec::constant(512, b), BitVec::constant(8, imm),
                              BitVec::constant(3, idx), BitVec::constant(1, zero), kr, BitVec::constant(512, o));
    if (got.value() != ucv::testing::oracle_vpshrdq(a, b, imm, idx, zero, kv, o)) ++bad;

    // With every K bit set and merge-masking each lane is SHRD of (src1, src2).
    std::array<BitVec, kNumKs> all;
    all.fill(BitVec::ones(64));
    BitVec full = vpshrdq_spec(BitVec::constant(512, a), BitVec::constant(512, b), BitVec::constant(8, imm),
                               BitVec::constant(3, 1 + idx % 7), bv_false(), all, BitVec::constant(512, o));
    for (unsigned lane = 0; lane < 8; ++lane) {
      ShrdResult sh = shrd_spec(BitVec::constant(64, ucv::testing::lane_of(a, lane)),
                                BitVec::constant(64, ucv::testing::lane_of(b, lane)), BitVec::constant(8, imm), 64);
      if (ucv::testing::lane_of(full.value(), lane) != sh.result.value()) ++bad;
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("gpr_alu_spec") {
  AluResult a = gpr_alu_spec(AluOp::kAnd, c64(0x1FF), c64(0x0FF), 8, 64);
  CHECK(a.result.u64() == 0xFF);
  CHECK(gpr_alu_spec(AluOp::kMovzx, BitVec::constant(8, 16), BitVec::constant(8, 16), 8, 64).result.u64() == 16);
  AluResult s = gpr_alu_spec(AluOp::kSub, c64(0), c64(16), 32, 32);
  CHECK(s.result.u64() == 0xFFFFFFF0u);
  CHECK(s.flags.zf.value.is_false());
  CHECK(s.flags.zf.enable.is_true());
  CHECK(gpr_alu_spec(AluOp::kMovsx, BitVec::constant(8, 0x80), BitVec::zeros(8), 8, 64).result.u64() ==
        0xFFFFFFFFFFFFFF80ULL);
  AluResult shr = gpr_alu_spec(AluOp::kShr, c64(0x3), c64(1), 64, 64);
  CHECK(shr.result.u64() == 1);
  CHECK(shr.flags.cf.value.is_true());
  CHECK(shr.flags.zf.value.is_false());
  CHECK(gpr_alu_spec(AluOp::kRor, c64(1), c64(1), 64, 64).flags.zf.enable.is_false());
  CHECK(gpr_alu_spec(AluOp::kShl, BitVec::constant(8, 0x81), BitVec::constant(8, 1), 8, 8).flags.cf.value.is_true());
  CHECK(gpr_alu_spec(AluOp::kSub, c64(1), c64(2), 64, 64).flags.cf.value.is_true());
  CHECK(gpr_alu_spec(AluOp::kMov, c64(1), c64(2), 64, 64).flags.cf.enable.is_false());
  CHECK(gpr_alu_spec(AluOp::kShr, c64(0x3), c64(64), 64, 64).flags.cf.enable.is_false());
  CHECK(gpr_alu_spec(AluOp::kRor, c64(0x0123456789AB7788ULL), c64(16), 64, 64).result.u64() == 0x77880123456789ABULL);
  CHECK_THROWS(alu_op_from_mnemonic("IMUL"));
}

TEST_CASE("exec, update and step") {
  X86State s = example_state();
  DecodeResult d = x86_decode(kShrdBytes);
  ExecResult r = x86_exec(d.instr, s);
  REQUIRE(r.writes.size() == 1);
  CHECK(r.writes[0].index.u64() == RCX);
  CHECK(r.writes[0].value.u64() == 0x77880123456789ABULL);

  X86State next = x86_model_step(s);
  CHECK(next.gpr[RCX].u64() == 0x77880123456789ABULL);
  CHECK(next.gpr[RDX].u64() == 0x1122334455667788ULL);
  CHECK(next.ip.u64() == 0x1005);
  CHECK(next.fault.u64() == 0);

  X86State locked = s;
  load_code(locked, 0x1000, {0xF0, 0x48, 0x0F, 0xAC, 0xD1, 0x10});
  X86State after = x86_model_step(locked);
  CHECK(after.fault.u64() == kExUD);
  CHECK(after.gpr[RCX].u64() == 0x0123456789ABCDEFULL);
  CHECK(after.ip.u64() == 0x1000);

  X86State m = s;
  m.gpr[RAX] = c64(0x55);
  load_code(m, 0x1000, {0x48, 0x89, 0xC0});
  CHECK(x86_model_step(m).gpr[RAX].u64() == 0x55);

  X86State v;
  v.ip = c64(0x2000);
  v.zmm[2] = BitVec::constant(512, broadcast(0x0123456789ABCDEFULL));
  v.zmm[3] = BitVec::constant(512, broadcast(0x1122334455667788ULL));
  load_code(v, 0x2000, kVpshrdqBytes);
  X86State vn = x86_model_step(v);
  CHECK(vn.zmm[1].value() == broadcast(0x77880123456789ABULL));
  CHECK(vn.ip.u64() == 0x2007);

  X86State w = s;  // 32-bit AND zero-extends, 16-bit merges
  w.gpr[RAX] = c64(0xFFFFFFFFFFFFFFFFULL);
  w.gpr[RBX] = c64(0x0F0F);
  load_code(w, 0x1000, {0x21, 0xD8});
  CHECK(x86_model_step(w).gpr[RAX].u64() == 0x0F0F);
  load_code(w, 0x1000, {0x66, 0x21, 0xD8});
  CHECK(x86_model_step(w).gpr[RAX].u64() == 0xFFFFFFFFFFFF0F0FULL);
}

TEST_CASE("state files") {
  std::istringstream in(
      "# SHRD example\nIP=0x1000\nGPR[RCX]=0x0123456789ABCDEF\nGPR[RDX]=0x1122334455667788\nZF=0x0\n"
      "MEM[0x1000]=0x48\nK[1]=0xFF\nZMM[2]=0x1\n");
  X86State s = parse_state(in);
  CHECK(s.gpr[RCX].u64() == 0x0123456789ABCDEFULL);
  CHECK(s.memory.at(0x1000).u64() == 0x48);
  CHECK(s.k[1].u64() == 0xFF);
  CHECK(s.zmm[2].value() == 1);
  std::ostringstream out;
  write_state(s, out);
  std::istringstream back(out.str());
  CHECK(parse_state(back).gpr[RDX].u64() == 0x1122334455667788ULL);

  std::istringstream unknown("GPR[RXX]=0x1\n");
  CHECK_THROWS_AS(parse_state(unknown), StateFileError);
  std::istringstream bogus("FOO=0x1\n");
  CHECK_THROWS_AS(parse_state(bogus), StateFileError);
  std::istringstream wide("ZF=0x2\n");
  CHECK_THROWS_AS(parse_state(wide), StateFileError);
}
