#include <algorithm>

#include <doctest.h>

#include "oracles.hpp"
#include "ucv/prover/session.hpp"

using namespace ucv;
using namespace ucv::prover;

namespace {

ProverOptions quick() {
  ProverOptions o;
  o.budget_seconds = 120;
  return o;
}

}  // namespace

TEST_CASE("decode lemmas hold on the clean design") {
  design::Design d;
  for (const auto& ob : decode_obligations(d)) {
    auto r = run_obligation(ob, quick());
    INFO(ob.name << " " << r.error << (r.replay ? r.replay->report : ""));
    MESSAGE(ob.name << " " << r.seconds << "s vars=" << r.cnf_vars << " clauses=" << r.cnf_clauses);
    CHECK(r.proved());
  }
}

TEST_CASE("missing EVEX exception bug is caught and replayed") {
  design::Design d;
  d.inject_bug(design::kBugMissingEvexException, true);
  auto r = run_obligation(decode_evex_k0_obligation(d), quick());
  REQUIRE(r.verdict == ProofVerdict::kCounterexample);
  REQUIRE(r.replay);
  CHECK(r.replay->reproduced);
  CHECK(r.error.empty());
  CHECK(r.replay->location == "dx");
}

TEST_CASE("exec suite covers the routines' uop shapes") {
  design::Design d;
  std::vector<std::string> names;
  for (const auto& s : exec_suite(d)) names.push_back(s.name());
  CHECK(names.size() >= 15);
  for (const char* want : {"PSRLQ@256x256", "PSLLVQ@256x256", "PORQ@256x256", "SUB@32x32", "JE@16x16", "MOVZX@8x64"}) {
    INFO(want);
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
}

TEST_CASE("exec lemmas hold on the clean design") {
  design::Design d;
  for (const auto& ob : exec_obligations(d)) {
    auto r = run_obligation(ob, quick());
    INFO(ob.name << " " << r.error << (r.replay ? r.replay->report : ""));
    MESSAGE(ob.name << " " << r.seconds << "s vars=" << r.cnf_vars << " clauses=" << r.cnf_clauses);
    CHECK(r.proved());
    CHECK(r.seconds < 120);
  }
}

TEST_CASE("don't-care source bug is caught and replayed") {
  design::Design d;
  d.inject_bug(design::kBugDontCareSrc2, true);
  auto r = run_obligation(exec_obligation(d, {ucode::UopOpcode::kAnd, 64, 64}), quick());
  REQUIRE(r.verdict == ProofVerdict::kCounterexample);
  REQUIRE(r.replay);
  CHECK(r.replay->reproduced);
  CHECK(r.replay->location == "value");
}

TEST_CASE("SHRD xlate proof") {
  design::Design d;
  auto p = run_xlate_pipeline(default_query("SHRD/reg64-imm8"), d, quick());
  INFO(p.failed_stage << " " << (p.general ? p.general->reason : "") << (p.fixed ? p.fixed->reason : ""));
  REQUIRE(p.failed_stage.empty());
  INFO(p.proof->error << (p.proof->replay ? p.proof->replay->report : ""));
  MESSAGE("xlate SHRD " << p.proof->seconds << "s vars=" << p.proof->cnf_vars);
  CHECK(p.proof->proved());
}

TEST_CASE("VPSHRDQ xlate proof") {
  design::Design d;
  auto p = run_xlate_pipeline(default_query("VPSHRDQ/zmm-imm8"), d, quick());
  INFO(p.failed_stage << " " << (p.general ? p.general->reason : "") << (p.fixed ? p.fixed->reason : ""));
  REQUIRE(p.failed_stage.empty());
  INFO(p.proof->error << (p.proof->replay ? p.proof->replay->report : ""));
  MESSAGE("xlate VPSHRDQ " << p.proof->seconds << "s vars=" << p.proof->cnf_vars);
  CHECK(p.proof->proved());
}

TEST_CASE("PORQ opmask bug is caught by the VPSHRDQ xlate proof") {
  design::Design d;
  d.inject_bug(design::kBugPorqIgnoresOpmask, true);
  auto p = run_xlate_pipeline(default_query("VPSHRDQ/zmm-imm8"), d, quick());
  REQUIRE(p.failed_stage.empty());
  REQUIRE(p.proof->verdict == ProofVerdict::kCounterexample);
  REQUIRE(p.proof->replay);
  CHECK(p.proof->replay->reproduced);
  CHECK(p.proof->replay->location == "ZMM1");
  MESSAGE(p.proof->replay->report);
}

TEST_CASE("immediate-dependent translation is refused") {
  design::Design d;
  d.add_xlate_rule("SHRD/reg64-imm8", design::imm_dependent_trap_rule());
  const auto q = default_query("SHRD/reg64-imm8");
  auto base = find_legal_instance(q, d);
  REQUIRE(base.consistent);
  auto gen = generalize_instance(base, q, d);
  REQUIRE(gen.ok);
  auto fixed = check_fixed_uop_sequence(gen.instance, d);
  CHECK_FALSE(fixed.ok);
  CHECK_FALSE(fixed.token);
  CHECK_FALSE(fixed.uops_a.empty());
  CHECK_FALSE(fixed.uops_b.empty());
  CHECK(fixed.uops_a != fixed.uops_b);
  CHECK_THROWS_AS(prove_xlate_ucode_correctness(gen.instance, d, fixed.token), PrecheckError);
}

TEST_CASE("a token does not transfer to another design") {
  design::Design d, other;
  const auto q = default_query("SHRD/reg64-imm8");
  auto gen = generalize_instance(find_legal_instance(q, d), q, d);
  auto fixed = check_fixed_uop_sequence(gen.instance, d);
  REQUIRE(fixed.ok);
  CHECK_THROWS_AS(prove_xlate_ucode_correctness(gen.instance, other, fixed.token), PrecheckError);
}

TEST_CASE("instance search and generalization edge cases") {
  design::Design d;
  auto q = default_query("SHRD/reg64-imm8");
  q.lock = true;
  CHECK_FALSE(find_legal_instance(q, d).consistent);

  q = default_query("SHRD/reg64-imm8");
  auto base = find_legal_instance(q, d);
  REQUIRE(base.consistent);
  CHECK(base.instr.op1.u64() == isa::RCX);
  CHECK(base.instr.op2.u64() == isa::RDX);
  q.symbolic.insert("opcode");
  auto gen = generalize_instance(base, q, d);
  CHECK_FALSE(gen.ok);
  CHECK_FALSE(gen.witness.empty());

  // Opmask alone is not enough when the base instance zero-masks.
  auto v = default_query("VPSHRDQ/zmm-imm8");
  v.fixed["zeroing"] = 1;
  v.symbolic = {"opmask"};
  auto vb = find_legal_instance(v, d);
  REQUIRE(vb.consistent);
  auto vg = generalize_instance(vb, v, d);
  CHECK_FALSE(vg.ok);
  CHECK(isa::x86_decode(vg.witness).dx.u64() == isa::kExUD);

  auto cl = default_query("SHRD/reg64-cl");
  cl.symbolic = {"op3"};
  CHECK_FALSE(generalize_instance(find_legal_instance(cl, d), cl, d).ok);
}

TEST_CASE("single-instruction proof needs its lemmas and then certifies") {
  design::Design d;
  ProofSession s(d, quick());
  auto early = s.prove_single_instruction("SHRD/reg64-imm8", 8);
  CHECK_FALSE(early.result.proved());
  CHECK(std::find(early.missing.begin(), early.missing.end(), "xlate/SHRD/reg64-imm8") != early.missing.end());
  CHECK(early.result.error.find("decode/SHRD/imm8") != std::string::npos);

  s.run("decode");
  s.run("exec");
  s.run("xlate/SHRD/reg64-imm8");
  auto r = s.prove_single_instruction("SHRD/reg64-imm8", 32);
  INFO(r.result.error);
  CHECK(r.result.proved());
  REQUIRE(r.certificate);
  CHECK(r.certificate->text().find("xlate-ucode: xlate/SHRD/reg64-imm8 proved") != std::string::npos);
  CHECK(r.samples == 32);

  const auto text = text_report(s.all_results());
  CHECK(text.find("instr/SHRD/reg64-imm8: proved") != std::string::npos);
  CHECK(html_report(s.all_results(), "t").find("<table>") != std::string::npos);
}

TEST_CASE("session reports the violating translation as refused") {
  design::Design d;
  d.add_xlate_rule("SHRD/reg64-imm8", design::imm_dependent_trap_rule());
  ProofSession s(d, quick());
  auto r = s.run("xlate/SHRD/reg64-imm8");
  REQUIRE(r.size() == 1);
  CHECK_FALSE(r[0].proved());
  CHECK(r[0].error.rfind("check_fixed_uop_sequence", 0) == 0);
  CHECK(r[0].notes.size() == 2);
  CHECK_THROWS_AS(s.run("bogus"), std::invalid_argument);
}
