#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ucv/sat/cnf.hpp"
#include "ucv/sat/dimacs.hpp"
#include "ucv/sat/equiv.hpp"
#include "ucv/sat/solver.hpp"

using namespace ucv;
using namespace ucv::sat;

namespace {

// Truth of a CNF under a full assignment, by direct enumeration.
bool brute_satisfiable(const Cnf& cnf) {
  const int n = cnf.num_vars;
  REQUIRE(n <= 22);
  std::vector<bool> m(static_cast<std::size_t>(n) + 1);
  for (std::uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    for (int v = 1; v <= n; ++v) m[static_cast<std::size_t>(v)] = ((bits >> (v - 1)) & 1) != 0;
    if (check_model(cnf, m)) return true;
  }
  return false;
}

// Random AIG over `inputs` inputs, returns a 1-bit goal.
BitVec random_goal(Aig& g, unsigned inputs, int gates, std::mt19937_64& rng) {
  BitVec xs = bv_var(g, inputs, "x");
  std::vector<Lit> pool(xs.bits());
  for (int i = 0; i < gates; ++i) {
    Lit a = pool[rng() % pool.size()] ^ static_cast<Lit>(rng() & 1);
    Lit b = pool[rng() % pool.size()] ^ static_cast<Lit>(rng() & 1);
    pool.push_back(g.land(a, b));
  }
  return BitVec::bit(&g, pool.back() ^ static_cast<Lit>(rng() & 1));
}

Cnf pigeonhole(int pigeons, int holes) {
  Cnf cnf;
  cnf.num_vars = pigeons * holes;
  auto p = [&](int i, int j) { return i * holes + j + 1; };
  for (int i = 0; i < pigeons; ++i) {
    Clause c;
    for (int j = 0; j < holes; ++j) c.push_back(p(i, j));
    cnf.add(c);
  }
  for (int j = 0; j < holes; ++j)
    for (int a = 0; a < pigeons; ++a)
      for (int b = a + 1; b < pigeons; ++b) cnf.add({-p(a, j), -p(b, j)});
  return cnf;
}

Cnf random_3sat(int vars, int clauses, std::mt19937_64& rng) {
  Cnf cnf;
  cnf.num_vars = vars;
  for (int i = 0; i < clauses; ++i) {
    Clause c;
    for (int k = 0; k < 3; ++k) {
      int v = 1 + static_cast<int>(rng() % static_cast<unsigned>(vars));
      c.push_back((rng() & 1) ? v : -v);
    }
    cnf.add(c);
  }
  return cnf;
}

BitVec ripple_add(const BitVec& a, const BitVec& b) {
  Aig* g = a.graph();
  std::vector<Lit> out;
  Lit carry = kFalse;
  for (unsigned i = 0; i < a.width(); ++i) {
    Lit x = g->lxor(a[i], b[i]);
    out.push_back(g->lxor(x, carry));
    carry = g->lor(g->land(a[i], b[i]), g->land(x, carry));
  }
  return BitVec(g, out);
}

// Logarithmic shifter with the stage for count bit 2 left out.
BitVec buggy_shr(const BitVec& a, const BitVec& count) {
  BitVec cur = a;
  for (unsigned k = 0; k < count.width(); ++k) {
    if (k == 2) continue;
    BitVec shifted = (1u << k) >= a.width() ? BitVec::zeros(a.width()) : bv_shr(cur, 1u << k);
    cur = bv_mux(BitVec::bit(a.graph(), count[k]), shifted, cur);
  }
  return cur;
}

}  // namespace

TEST_CASE("constant goals") {
  Cnf t = tseitin_encode(bv_true());
  CHECK(t.clauses.empty());
  CHECK(solve(t).verdict == Verdict::kSat);
  Cnf f = tseitin_encode(bv_false());
  CHECK(solve(f).verdict == Verdict::kUnsat);
  Aig g;
  BitVec x = bv_var(g, 1, "x");
  CHECK(bv_land(x, bv_lnot(x)).is_false());
  SatResult r = solve(tseitin_encode(x));
  REQUIRE(r.verdict == Verdict::kSat);
  CHECK(r.env.get(0));
  CHECK_THROWS_AS(tseitin_encode(bv_var(g, 2, "y")), BitVecError);
}

TEST_CASE("each AND contributes three clauses plus the goal unit") {
  Aig g;
  BitVec x = bv_var(g, 2, "x");
  Cnf cnf = tseitin_encode(bv_land(BitVec::bit(&g, x[0]), BitVec::bit(&g, x[1])));
  CHECK(cnf.clauses.size() == 4);
  CHECK(cnf.num_vars == 3);
  CHECK(cnf.input_vars.size() == 2);
}

TEST_CASE("tseitin exhaustive oracle up to twelve inputs") {
  std::mt19937_64 rng(3);
  int disagreements = 0;
  for (int round = 0; round < 40; ++round) {
    Aig g;
    unsigned inputs = 1 + static_cast<unsigned>(round % 12);
    BitVec goal = random_goal(g, inputs, 25, rng);
    Cnf cnf = tseitin_encode(goal);
    bool any_true = false;
    for (std::uint64_t bits = 0; bits < (1ULL << inputs); ++bits) {
      Env env;
      for (unsigned i = 0; i < inputs; ++i) env.set(i, ((bits >> i) & 1) != 0);
      bool truth = bv_eval(goal, env) == 1;
      any_true = any_true || truth;
      if (cnf.num_vars == 0) continue;
      // Internal variables are forced to their node values.
      std::vector<bool> model(static_cast<std::size_t>(cnf.num_vars) + 1);
      for (const auto& [node, var] : cnf.var_map) {
        model[static_cast<std::size_t>(var)] = bv_eval(BitVec::bit(&g, make_lit(node)), env) == 1;
      }
      if (check_model(cnf, model) != truth) ++disagreements;
    }
    SatResult r = solve(cnf);
    if ((r.verdict == Verdict::kSat) != any_true) ++disagreements;
    if (r.verdict == Verdict::kSat && bv_eval(goal, r.env) != 1) ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("pigeonhole 4 into 3 is unsat") {
  Cnf php = pigeonhole(4, 3);
  CHECK_FALSE(brute_satisfiable(php));
  CHECK(solve(php).verdict == Verdict::kUnsat);
  CHECK(solve(pigeonhole(3, 3)).verdict == Verdict::kSat);
}

TEST_CASE("solver agrees with enumeration on random 3-SAT") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    Cnf cnf = random_3sat(14, 50 + i % 30, rng);
    SatResult r = solve(cnf);
    CHECK((r.verdict == Verdict::kSat) == brute_satisfiable(cnf));
    if (r.verdict == Verdict::kSat) CHECK(check_model(cnf, r.model));
  }
}

TEST_CASE("larger instances and determinism") {
  std::mt19937_64 rng(23);
  Cnf cnf = random_3sat(120, 511, rng);
  Budget b;
  b.seed = 5;
  SatResult r1 = solve(cnf, b), r2 = solve(cnf, b);
  CHECK(r1.verdict == r2.verdict);
  CHECK(r1.stats.conflicts == r2.stats.conflicts);
  CHECK(r1.stats.decisions == r2.stats.decisions);
  CHECK(r1.verdict != Verdict::kTimeout);
  CHECK(solve(pigeonhole(7, 6)).verdict == Verdict::kUnsat);
}

TEST_CASE("conflict budget yields timeout") {
  Budget b;
  b.max_conflicts = 5;
  CHECK(solve(pigeonhole(8, 7), b).verdict == Verdict::kTimeout);
}

TEST_CASE("check_model") {
  Cnf empty;
  empty.num_vars = 1;
  CHECK(check_model(empty, {false, true}));
  Cnf unit;
  unit.num_vars = 1;
  unit.add({1});
  CHECK_FALSE(check_model(unit, {false, false}));
  CHECK_THROWS(check_model(unit, {false}));
}

TEST_CASE("dimacs export and import") {
  Cnf cnf;
  cnf.num_vars = 1;
  cnf.add({1});
  std::ostringstream out;
  write_dimacs(cnf, out);
  CHECK(out.str() == "p cnf 1 1\n1 0\n");

  std::istringstream back(out.str());
  Cnf again = read_dimacs(back);
  CHECK(again.num_vars == 1);
  CHECK(again.clauses == cnf.clauses);

  std::istringstream model("v 1 0\n");
  SatResult r = parse_solver_output(model, cnf);
  CHECK(r.verdict == Verdict::kSat);
  CHECK(r.model.at(1));

  std::istringstream wrong("s SATISFIABLE\nv -1 0\n");
  CHECK_THROWS_AS(parse_solver_output(wrong, cnf), DimacsError);
  std::istringstream garbage("s MAYBE\n");
  CHECK_THROWS_AS(parse_solver_output(garbage, cnf), DimacsError);
  std::istringstream unsat("s UNSATISFIABLE\n");
  SatResult u = parse_solver_output(unsat, cnf);
  CHECK(u.verdict == Verdict::kUnsat);
  CHECK(u.externally_claimed);

  auto path = std::filesystem::temp_directory_path() / "ucv_sat_test.cnf";
  export_dimacs(cnf, path);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == "p cnf 1 1\n1 0\n");
  std::filesystem::remove(path);

  std::istringstream bad_header("p cnf 1 2\n1 0\n");
  CHECK_THROWS_AS(read_dimacs(bad_header), DimacsError);
}

TEST_CASE("external solver cross-check") {
  const std::string cmd = std::string("python3 ") + UCV_TOOLS_DIR + "/brute_sat.py";
  Cnf php = pigeonhole(4, 3);
  SatResult ext = run_external_solver(cmd, php);
  CHECK(ext.verdict == Verdict::kUnsat);
  CHECK(solve(php).verdict == ext.verdict);
  Cnf ok = pigeonhole(3, 3);
  SatResult ext_ok = run_external_solver(cmd, ok);
  CHECK(ext_ok.verdict == Verdict::kSat);
  CHECK(check_model(ok, ext_ok.model));
}

TEST_CASE("prove_equal") {
  Aig g;
  BitVec a = bv_var(g, 8, "a"), b = bv_var(g, 8, "b");
  ProofResult same = prove_equal(bv_add(a, b), bv_add(a, b));
  CHECK(same.verdict == ProofVerdict::kProved);
  CHECK_FALSE(same.solver_called);

  ProofResult adder = prove_equal(ripple_add(a, b), bv_add(a, b));
  CHECK(adder.verdict == ProofVerdict::kProved);
  // Exhaustive oracle over all 16 input bits.
  int bad = 0;
  BitVec r = ripple_add(a, b);
  for (unsigned x = 0; x < 256; ++x)
    for (unsigned y = 0; y < 256; ++y) {
      Env env;
      ucv::testing::assign(env, a, x);
      ucv::testing::assign(env, b, y);
      if (bv_eval(r, env) != ((x + y) & 0xFF)) ++bad;
    }
  CHECK(bad == 0);

  BitVec count = bv_var(g, 4, "c");
  BitVec good = bv_shr(a, count), buggy = buggy_shr(a, count);
  ProofResult cex = prove_equal(buggy, good);
  REQUIRE(cex.verdict == ProofVerdict::kCounterexample);
  CHECK(bv_eval(buggy, cex.counterexample) != bv_eval(good, cex.counterexample));

  BitVec c2 = bv_slice(count, 2, 2);
  ProofResult assumed = prove_equal(buggy, good, {bv_lnot(c2)});
  CHECK(assumed.verdict == ProofVerdict::kProved);
  CHECK_THROWS_AS(prove_equal(a, count), BitVecError);
}
