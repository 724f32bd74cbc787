#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "ucv/design/design.hpp"
#include "ucv/isa/semantics.hpp"
#include "ucv/ucode/model.hpp"

using namespace ucv;
using namespace ucv::ucode;
using namespace ucv::testing;

namespace {

const std::vector<std::uint8_t> kShrdBytes = {0x48, 0x0F, 0xAC, 0xD1, 0x10};

isa::X86State example_state() {
  isa::X86State s = isa::parse_state_file(std::string(UCV_DATA_DIR) + "/shrd_example.state");
  isa::load_code(s, 0x1000, kShrdBytes);
  return s;
}

isa::Instruction decoded(const std::vector<std::uint8_t>& bytes) {
  auto r = isa::x86_decode(bytes);
  REQUIRE(r.dx.u64() == 0);
  return r.instr;
}

std::string value_after_bar(const std::string& line) { return line.substr(line.find('|') + 2); }

Uop scalar(UopOpcode op, unsigned ssz, unsigned dsz) {
  Uop u;
  u.opcode = op;
  u.dst = RegRef::make(RegClass::kG, 1);
  u.src1 = RegRef::make(RegClass::kG, 2);
  u.src2 = RegRef::make(RegClass::kG, 3);
  u.ssz = ssz;
  u.dsz = dsz;
  return u;
}

UopData data(std::uint64_t a, std::uint64_t b, std::uint64_t old = 0, bool zf = false) {
  UopData d;
  d.src1 = BitVec::constant(64, a);
  d.src2 = BitVec::constant(64, b);
  d.old_dst = BitVec::constant(64, old);
  d.zf = zf ? bv_true() : bv_false();
  return d;
}

}  // namespace

TEST_CASE("SHRD concrete run reproduces the published micro-trace") {
  const design::Design d;
  isa::X86State s = example_state();
  std::vector<TraceEntry> trace;
  RunOptions opt;
  opt.trace = &trace;
  isa::ExecResult r = run_xlate_ucode(decoded(kShrdBytes), s, d, opt);

  REQUIRE(trace.size() == 14);  // two prelude uops plus twelve ROM rows
  const char* expected[] = {
      "G2=0x0123456789ABCDEF", "G3=0x0000000000000010", "G3=0x0000000000000010", "G10=0xFFFFFFFFFFFFFFFF",
      "taken=0",               "G5=0xFFFFFFF0 ZF=0",    "G10=0x000000000000FFFF", "G10=0x000000000000FFFF",
      "G6=0x0000000000007788", "G7=0x00000123456789AB", "G2=0x0123456789AB0000", "G2=0x0123456789AB7788",
      "G7=0x77880123456789AB", "RCX=0x77880123456789AB"};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CAPTURE(trace[i].line);
    CHECK(value_after_bar(trace[i].line).rfind(expected[i], 0) == 0);
  }

  std::ifstream golden(std::string(UCV_TESTS_DIR) + "/golden/shrd_example.trace");
  REQUIRE(golden);
  std::string line;
  for (std::size_t i = 0; std::getline(golden, line); ++i) {
    REQUIRE(i < trace.size());
    CHECK(trace[i].line == line);
  }

  isa::X86State after = isa::x86_update(BitVec::zeros(8), r, s);
  CHECK(after.gpr[isa::RCX].u64() == 0x77880123456789ABULL);
  CHECK(after.gpr[isa::RDX].u64() == 0x1122334455667788ULL);
  CHECK(after.ip.u64() == 0x1005);
}

TEST_CASE("extraction reports only architectural registers") {
  const design::Design d;
  isa::X86State s = example_state();
  isa::ExecResult r = run_xlate_ucode(decoded(kShrdBytes), s, d);
  REQUIRE(r.writes.size() == 1);
  CHECK(r.writes[0].file == isa::RegFile::kGpr);
  CHECK(r.writes[0].index.u64() == isa::RCX);
}

TEST_CASE("SHRD through microcode agrees with x86_exec on random operands") {
  const design::Design d;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const unsigned imm = static_cast<unsigned>(rng() % 256);
    const unsigned rm = static_cast<unsigned>(rng() % 16), reg = static_cast<unsigned>(rng() % 16);
    std::vector<std::uint8_t> bytes = {static_cast<std::uint8_t>(0x48 | (reg >> 3) << 2 | (rm >> 3)), 0x0F, 0xAC,
                                       static_cast<std::uint8_t>(0xC0 | (reg & 7) << 3 | (rm & 7)),
                                       static_cast<std::uint8_t>(imm)};
    isa::X86State s;
    for (auto& g : s.gpr) g = BitVec::constant(64, rng());
    s.zf = BitVec::constant(1, rng() & 1);
    s.sf = BitVec::constant(1, rng() & 1);
    s.cf = BitVec::constant(1, rng() & 1);
    isa::Instruction in = decoded(bytes);
    isa::X86State want = isa::x86_update(BitVec::zeros(8), isa::x86_exec(in, s), s);
    isa::X86State got = isa::x86_update(BitVec::zeros(8), run_xlate_ucode(in, s, d), s);
    CAPTURE(imm);
    for (unsigned g = 0; g < isa::kNumGprs; ++g) CHECK(got.gpr[g].u64() == want.gpr[g].u64());
    CHECK(got.zf.u64() == want.zf.u64());
    CHECK(got.sf.u64() == want.sf.u64());
    if ((imm & 63) != 0) CHECK(got.cf.u64() == want.cf.u64());
  }
}

TEST_CASE("VPSHRDQ through microcode agrees with the lane-wise oracle") {
  const design::Design d;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 60; ++i) {
    const unsigned imm = static_cast<unsigned>(rng() % 256), aaa = static_cast<unsigned>(rng() % 8);
    const bool z = (rng() & 1) && aaa != 0;
    // EVEX 0F3A 73 /r ib, ZMM1 <- ZMM2, ZMM3.
    std::vector<std::uint8_t> bytes = {0x62, 0xF3, 0xED, static_cast<std::uint8_t>((z ? 0x80 : 0) | 0x48 | aaa),
                                       0x73, 0xCB, static_cast<std::uint8_t>(imm)};
    isa::X86State s;
    for (auto& v : s.zmm) v = BitVec::constant(512, random_value(rng, 512));
    std::vector<BigUint> k;
    for (auto& v : s.k) {
      v = BitVec::constant(64, rng());
      k.push_back(v.value());
    }
    isa::Instruction in = decoded(bytes);
    isa::ExecResult r = run_xlate_ucode(in, s, d);
    isa::X86State got = isa::x86_update(BitVec::zeros(8), r, s);
    BigUint want = oracle_vpshrdq(s.zmm[2].value(), s.zmm[3].value(), imm, aaa, z, k, s.zmm[1].value());
    CAPTURE(imm);
    CAPTURE(aaa);
    CHECK(got.zmm[1].value() == want);
  }
}

TEST_CASE("VPSHRDQ halts after five prelude uops and two ROM rows") {
  const design::Design d;
  isa::X86State s;
  std::vector<TraceEntry> trace;
  RunOptions opt;
  opt.trace = &trace;
  run_xlate_ucode(decoded({0x62, 0xF3, 0xED, 0x48, 0x73, 0xCB, 0x10}), s, d, opt);
  REQUIRE(trace.size() == 7);
  CHECK(trace[4].uop.opcode == UopOpcode::kPsllvq);
  CHECK(trace[5].uop.opcode == UopOpcode::kPorq);
  CHECK(trace[6].uop.opcode == UopOpcode::kPorq);
}

TEST_CASE("uop semantics") {
  SUBCASE("predicated-false uops keep the destination") {
    Uop u = scalar(UopOpcode::kAnd, 64, 64);
    u.predicate = Predicate::kZF;
    UopResults r = uop_semantics(u, data(0xFFFF, 0, 0xFFFF, false));
    CHECK(r.value->u64() == 0xFFFF);
    CHECK(r.flags.zf.enable.is_false());
  }
  SUBCASE("SUB writes the flags its mask selects") {
    Uop u = scalar(UopOpcode::kSub, 32, 32);
    u.flag_mask = kFlagZF;
    UopResults r = uop_semantics(u, data(0, 16));
    CHECK(r.value->u64() == 0xFFFFFFF0ULL);
    CHECK(r.flags.zf.enable.is_true());
    CHECK(r.flags.zf.value.is_false());
    CHECK(r.flags.cf.enable.is_false());
  }
  SUBCASE("JE compares at the source size") {
    Uop u = scalar(UopOpcode::kJe, 16, 16);
    CHECK(uop_semantics(u, data(0x10000, 0)).branch_taken->is_true());
    CHECK(uop_semantics(u, data(0x10001, 0)).branch_taken->is_false());
  }
  SUBCASE("DLSHFTCNT yields 64 - imm mod 64, and 64 for imm mod 64 = 0") {
    Uop u;
    u.opcode = UopOpcode::kDlshftcnt;
    u.dst = RegRef::make(RegClass::kT, 26);
    u.src1 = RegRef::imm();
    for (auto [imm, lane] : {std::pair{16u, 48u}, std::pair{0u, 64u}, std::pair{64u, 64u}, std::pair{63u, 1u}}) {
      UopData dd;
      dd.src1 = BitVec::constant(64, imm);
      dd.src2 = dd.src1;
      dd.old_dst = BitVec::zeros(256);
      dd.zf = bv_false();
      BigUint v = uop_semantics(u, dd).value->value();
      for (unsigned l = 0; l < 4; ++l) CHECK(lane_of(v, l) == lane);
    }
  }
  SUBCASE("PSLLVQ clears lanes whose count is 64 or more") {
    Uop u;
    u.opcode = UopOpcode::kPsllvq;
    u.dst = RegRef::make(RegClass::kT, 28);
    u.src1 = RegRef::make(RegClass::kT, 1);
    u.src2 = RegRef::make(RegClass::kT, 2);
    UopData dd;
    dd.src1 = BitVec::ones(256);
    BigUint counts = (BigUint(64) << 192) | (BigUint(1000) << 128) | (BigUint(63) << 64) | 4;
    dd.src2 = BitVec::constant(256, counts);
    dd.old_dst = BitVec::zeros(256);
    dd.zf = bv_false();
    BigUint v = uop_semantics(u, dd).value->value();
    CHECK(lane_of(v, 0) == BigUint(0xFFFFFFFFFFFFFFF0ULL));
    CHECK(lane_of(v, 1) == BigUint(0x8000000000000000ULL));
    CHECK(lane_of(v, 2) == 0);
    CHECK(lane_of(v, 3) == 0);
  }
}

TEST_CASE("symbolic branch forks and merges") {
  const design::Design d;
  Aig g;
  isa::X86State s = example_state();
  s.gpr[isa::RCX] = bv_var(g, 64, "rcx");
  s.gpr[isa::RDX] = bv_var(g, 64, "rdx");
  isa::Instruction in = decoded(kShrdBytes);
  in.imm = bv_var(g, 8, "imm");
  isa::ExecResult sym = run_xlate_ucode(in, s, d);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 64; ++i) {
    Env env;
    const std::uint64_t rcx = rng(), rdx = rng();
    const unsigned imm = i < 4 ? i * 64 : static_cast<unsigned>(rng() % 256);
    assign(env, s.gpr[isa::RCX], rcx);
    assign(env, s.gpr[isa::RDX], rdx);
    assign(env, in.imm, imm);
    BigUint got = rcx;
    for (const auto& w : sym.writes)
      if (w.file == isa::RegFile::kGpr && w.index.u64() == isa::RCX) got = bv_eval(w.value, env);
    CAPTURE(imm);
    CHECK(got == oracle_shrd(rcx, rdx, imm, 64));
  }
}

TEST_CASE("step bound") {
  const design::Design d;
  isa::X86State s = example_state();
  RunOptions opt;
  opt.step_bound = 5;
  CHECK_THROWS_AS(run_xlate_ucode(decoded(kShrdBytes), s, d, opt), StepBoundExceeded);
}

TEST_CASE("halted states step to themselves") {
  const design::Design d;
  UcodeState s = init_ucode_state(MicroPC{}, isa::X86State{});
  CHECK(s.pc.halted());
  UcodeState n = ucode_model_step(s, d);
  CHECK(n.pc.halted());
  CHECK_THROWS_AS(ucode_get_uop(s.pc, d), UcodeError);
}
