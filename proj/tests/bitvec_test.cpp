#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ucv/bitvec/bitvec.hpp"

using namespace ucv;
using ucv::testing::assign;
using ucv::testing::mask_of;

namespace {

BitVec c64(std::uint64_t v) { return BitVec::constant(64, v); }

}  // namespace

TEST_CASE("constants round-trip") {
  CHECK(bv_const(8, 0x00).value() == 0);
  CHECK(bv_const(8, 0xFF).value() == 0xFF);
  for (unsigned i = 0; i < 8; ++i) CHECK(bv_const(8, 0xFF)[i] == kTrue);
  CHECK(c64(0x1122334455667788ULL).u64() == 0x1122334455667788ULL);
  CHECK_THROWS_AS(bv_const(8, 256), BitVecError);
  BigUint wide = (BigUint(1) << 511) | 5;
  CHECK(bv_const(512, wide).value() == wide);
}

TEST_CASE("fresh variables") {
  Aig g;
  BitVec a = bv_var(g, 8, "imm8");
  BitVec b = bv_var(g, 8, "imm8");
  BitVec m = bv_var(g, 1, "maskmode");
  CHECK(a.width() == 8);
  CHECK(m.width() == 1);
  for (unsigned i = 0; i < 8; ++i)
    for (unsigned j = 0; j < 8; ++j) CHECK(a[i] != b[j]);
  CHECK(g.num_inputs() == 17);
}

TEST_CASE("bitwise examples") {
  CHECK(bv_and(bv_const(8, 0xFF), bv_const(8, 0x0F)).value() == 0x0F);
  CHECK(bv_and(c64(0x1122334455667788ULL), c64(0xFFFF)).u64() == 0x7788);
  Aig g;
  BitVec x = bv_var(g, 16, "x");
  CHECK(bv_or(x, BitVec::zeros(16)).same_as(x));
  CHECK_THROWS_AS(bv_and(x, BitVec::zeros(8)), BitVecError);
}

TEST_CASE("arithmetic examples") {
  CHECK(bv_sub(bv_const(32, 0), bv_const(32, 16)).value() == 0xFFFFFFF0u);
  CHECK(bv_sub(bv_const(4, 5), bv_const(4, 7)).value() == 0xE);
  Aig g;
  BitVec x = bv_var(g, 8, "x");
  CHECK(bv_add(x, BitVec::zeros(8)).same_as(x));
}

TEST_CASE("shift examples") {
  CHECK(bv_shr(c64(~0ULL), bv_const(8, 48)).u64() == 0xFFFF);
  CHECK(bv_ror(c64(0x0123456789AB7788ULL), bv_const(64, 16)).u64() == 0x77880123456789ABULL);
  CHECK(bv_shl(c64(0x1234), bv_const(8, 64)).u64() == 0);
  Aig g;
  BitVec x = bv_var(g, 64, "x");
  CHECK(bv_shl(x, BitVec::zeros(6)).same_as(x));
  Env env;
  BitVec y = bv_var(g, 8, "y");
  assign(env, y, 0xF0);
  CHECK(bv_eval(bv_shr(y, 4u), env) == 0x0F);
}

TEST_CASE("structural examples") {
  BitVec v = c64(0x0123456789ABCDEFULL);
  CHECK(bv_slice(v, 0, 7).value() == 0xEF);
  CHECK(bv_zext(bv_const(8, 16), 64).u64() == 16);
  CHECK(bv_sext(bv_const(8, 0x80), 64).u64() == 0xFFFFFFFFFFFFFF80ULL);
  CHECK(bv_concat(bv_const(8, 0x34), bv_const(8, 0x12)).value() == 0x1234);
  CHECK_THROWS_AS(bv_slice(v, 3, 64), BitVecError);
  CHECK_THROWS_AS(bv_zext(v, 32), BitVecError);
}

TEST_CASE("mux and eq examples") {
  BitVec a = bv_const(8, 1), b = bv_const(8, 2);
  CHECK(bv_mux(bv_true(), a, b).value() == 1);
  CHECK(bv_mux(bv_false(), a, b).value() == 2);
  CHECK(bv_mux(bv_const(1, 0), c64(0), c64(0xFFFF)).u64() == 0xFFFF);
  Aig g;
  BitVec x = bv_var(g, 16, "x");
  CHECK(bv_eq(x, x).is_true());
  CHECK(bv_eq(bv_const(16, 16), bv_const(16, 0)).is_false());
  CHECK(bv_eq(bv_const(16, 0), bv_const(16, 0)).is_true());
  CHECK_THROWS_AS(bv_mux(bv_true(), a, c64(0)), BitVecError);
}

TEST_CASE("eval requires a total environment") {
  CHECK(bv_eval(bv_const(8, 42), Env{}) == 42);
  Aig g;
  BitVec x = bv_var(g, 4, "x");
  CHECK_THROWS(bv_eval(x, Env{}));
}

TEST_CASE("concrete and symbolic paths agree with the big-integer oracle") {
  for (auto op : ucv::testing::all_kernel_ops()) {
    for (unsigned w : {1u, 4u, 8u, 64u}) {
      if (op == ucv::testing::KernelOp::kSlice && w == 1) continue;  // no proper slice of one bit
      CAPTURE(ucv::testing::kernel_op_name(op));
      CAPTURE(w);
      CHECK(ucv::testing::kernel_agreement_failures(op, w, 10000, 1000 + w) == 0);
    }
  }
}

TEST_CASE("hash-consing keeps rebuilt expressions at the same size") {
  Aig g;
  BitVec a = bv_var(g, 32, "a"), b = bv_var(g, 32, "b"), c = bv_var(g, 5, "c");
  auto build = [&] { return bv_xor(bv_add(a, b), bv_ror(bv_and(a, b), c)); };
  BitVec first = build();
  std::size_t nodes = g.num_nodes();
  BitVec second = build();
  CHECK(g.num_nodes() == nodes);
  CHECK(first.same_as(second));
  Lit x = a[0];
  CHECK(g.land(x, kFalse) == kFalse);
  CHECK(g.land(x, kTrue) == x);
  CHECK(g.land(x, x) == x);
  CHECK(g.land(x, lit_not(x)) == kFalse);
  CHECK(g.land(x, a[1]) == g.land(a[1], x));
}

namespace {

// Random expression trees evaluated both through the graph and directly on
// booleans, so local rewrites are checked against unsimplified semantics.
struct Expr {
  int kind;  // 0 var, 1 not, 2 and, 3 or, 4 xor, 5 mux, 6 const
  int a = -1, b = -1, c = -1;
  unsigned var = 0;
  bool konst = false;
};

bool eval_expr(const std::vector<Expr>& es, int i, const std::vector<bool>& xs) {
  const Expr& e = es[static_cast<std::size_t>(i)];
  switch (e.kind) {
    case 0: return xs[e.var];
    case 1: return !eval_expr(es, e.a, xs);
    case 2: return eval_expr(es, e.a, xs) && eval_expr(es, e.b, xs);
    case 3: return eval_expr(es, e.a, xs) || eval_expr(es, e.b, xs);
    case 4: return eval_expr(es, e.a, xs) != eval_expr(es, e.b, xs);
    case 5: return eval_expr(es, e.a, xs) ? eval_expr(es, e.b, xs) : eval_expr(es, e.c, xs);
    default: return e.konst;
  }
}

}  // namespace

TEST_CASE("local simplification is sound") {
  std::mt19937_64 rng(7);
  const unsigned nvars = 6;
  int mismatches = 0;
  for (int round = 0; round < 20; ++round) {
    Aig g;
    BitVec xs = bv_var(g, nvars, "x");
    std::vector<Expr> es;
    std::vector<Lit> lits;
    for (unsigned v = 0; v < nvars; ++v) {
      es.push_back({0, -1, -1, -1, v});
      lits.push_back(xs[v]);
    }
    es.push_back({6, -1, -1, -1, 0, true});
    lits.push_back(kTrue);
    for (int n = 0; n < 60; ++n) {
      int sz = static_cast<int>(es.size());
      // Favour recent nodes and repeated operands to trigger rewrites.
      auto pick = [&] { return (rng() % 3 == 0) ? sz - 1 : static_cast<int>(rng() % static_cast<unsigned>(sz)); };
      Expr e{static_cast<int>(1 + rng() % 5), pick(), pick(), pick()};
      if (rng() % 4 == 0) e.b = e.a;
      Lit la = lits[static_cast<std::size_t>(e.a)], lb = lits[static_cast<std::size_t>(e.b)],
          lc = lits[static_cast<std::size_t>(e.c)];
      Lit out = 0;
      switch (e.kind) {
        case 1: out = lit_not(la); break;
        case 2: out = g.land(la, lb); break;
        case 3: out = g.lor(la, lb); break;
        case 4: out = g.lxor(la, lb); break;
        default: out = g.mux(la, lb, lc); break;
      }
      es.push_back(e);
      lits.push_back(out);
    }
    for (int s = 0; s < 500; ++s) {
      std::vector<bool> vals(nvars);
      Env env;
      for (unsigned v = 0; v < nvars; ++v) {
        vals[v] = (rng() & 1) != 0;
        env.set(v, vals[v]);
      }
      for (std::size_t i = 0; i < es.size(); ++i) {
        if (bv_eval(BitVec::bit(&g, lits[i]), env) != (eval_expr(es, static_cast<int>(i), vals) ? 1 : 0)) ++mismatches;
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("shift laws") {
  std::mt19937_64 rng(11);
  for (unsigned w : {4u, 8u, 64u}) {
    Aig g;
    BitVec a = bv_var(g, w, "a");
    for (unsigned i = 0; i < w; ++i) {
      unsigned j = static_cast<unsigned>(rng() % (w - i));
      BitVec lhs = bv_shr(bv_shr(a, i), j);
      BitVec rhs = bv_shr(a, i + j);
      Env env;
      BigUint av = ucv::testing::random_value(rng, w);
      assign(env, a, av);
      CHECK(bv_eval(lhs, env) == bv_eval(rhs, env));
    }
    BitVec rot = bv_ror(a, bv_const(16, w));
    CHECK(rot.same_as(a));
  }
}

TEST_CASE("to_hex pads to the width") {
  CHECK(to_hex(0x7788, 64) == "0x0000000000007788");
  CHECK(to_hex(mask_of(8), 8) == "0xFF");
}
