#pragma once

// Independent big-integer oracles shared by the unit and acceptance suites.
// Nothing here goes through the and-inverter graph.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ucv/bitvec/bitvec.hpp"

namespace ucv::testing {

inline BigUint mask_of(unsigned width) { return (BigUint(1) << width) - 1; }

inline BigUint random_value(std::mt19937_64& rng, unsigned width) {
  BigUint v = 0;
  for (unsigned done = 0; done < width; done += 64) {
    v <<= 64;
    v |= rng();
  }
  return v & mask_of(width);
}

// Writes `value` into the input variables that make up `vars`.
inline void assign(Env& env, const BitVec& vars, const BigUint& value) {
  for (unsigned i = 0; i < vars.width(); ++i) {
    const Aig& g = *vars.graph();
    env.set(g.node(lit_node(vars[i])).var, boost::multiprecision::bit_test(value, i));
  }
}

inline BigUint oracle_shl(const BigUint& a, const BigUint& c, unsigned w) {
  if (c >= w) return 0;
  return (a << static_cast<unsigned>(c)) & mask_of(w);
}

inline BigUint oracle_shr(const BigUint& a, const BigUint& c, unsigned w) {
  if (c >= w) return 0;
  return a >> static_cast<unsigned>(c);
}

inline BigUint oracle_ror(const BigUint& a, const BigUint& c, unsigned w) {
  auto r = static_cast<unsigned>(c % w);
  if (r == 0) return a;
  return ((a >> r) | (a << (w - r))) & mask_of(w);
}

inline BigUint oracle_sext(const BigUint& a, unsigned from, unsigned to) {
  if (boost::multiprecision::bit_test(a, from - 1)) return a | (mask_of(to) ^ mask_of(from));
  return a;
}

// SHRD on an n-bit toy or real width: shift the 2n-bit concatenation
// src:dest right by the masked count.
inline BigUint oracle_shrd(const BigUint& dest, const BigUint& src, unsigned amt, unsigned n) {
  unsigned m = amt & (n == 64 ? 63u : 31u);
  if (n < 16) m = amt % (2 * n);  // toy widths keep every count reachable
  if (m == 0) return dest;
  BigUint cat = (src << n) | dest;
  return (cat >> m) & mask_of(n);
}

enum class KernelOp { kAnd, kOr, kXor, kNot, kAdd, kSub, kShl, kShr, kRor, kSlice, kConcat, kZext, kSext, kMux, kEq };

inline const std::vector<KernelOp>& all_kernel_ops() {
  static const std::vector<KernelOp> ops = {KernelOp::kAnd, KernelOp::kOr,    KernelOp::kXor,  KernelOp::kNot,
                                            KernelOp::kAdd, KernelOp::kSub,   KernelOp::kShl,  KernelOp::kShr,
                                            KernelOp::kRor, KernelOp::kSlice, KernelOp::kConcat, KernelOp::kZext,
                                            KernelOp::kSext, KernelOp::kMux,  KernelOp::kEq};
  return ops;
}

inline const char* kernel_op_name(KernelOp op) {
  switch (op) {
    case KernelOp::kAnd: return "and";
    case KernelOp::kOr: return "or";
    case KernelOp::kXor: return "xor";
    case KernelOp::kNot: return "not";
    case KernelOp::kAdd: return "add";
    case KernelOp::kSub: return "sub";
    case KernelOp::kShl: return "shl";
    case KernelOp::kShr: return "shr";
    case KernelOp::kRor: return "ror";
    case KernelOp::kSlice: return "slice";
    case KernelOp::kConcat: return "concat";
    case KernelOp::kZext: return "zext";
    case KernelOp::kSext: return "sext";
    case KernelOp::kMux: return "mux";
    case KernelOp::kEq: return "eq";
  }
  return "?";
}

// Applies `op` through the kernel to operands a, b (width w), count c
// (8 bits) and select s (1 bit).
inline BitVec apply_kernel(KernelOp op, const BitVec& a, const BitVec& b, const BitVec& c, const BitVec& s) {
  unsigned w = a.width();
  switch (op) {
    case KernelOp::kAnd: return bv_and(a, b);
    case KernelOp::kOr: return bv_or(a, b);
    case KernelOp::kXor: return bv_xor(a, b);
    case KernelOp::kNot: return bv_not(a);
    case KernelOp::kAdd: return bv_add(a, b);
    case KernelOp::kSub: return bv_sub(a, b);
    case KernelOp::kShl: return bv_shl(a, c);
    case KernelOp::kShr: return bv_shr(a, c);
    case KernelOp::kRor: return bv_ror(a, c);
    case KernelOp::kSlice: return bv_slice(a, w / 4, w - 1);
    case KernelOp::kConcat: return bv_concat(a, b);
    case KernelOp::kZext: return bv_zext(a, w + 5);
    case KernelOp::kSext: return bv_sext(a, w + 5);
    case KernelOp::kMux: return bv_mux(s, a, b);
    case KernelOp::kEq: return bv_eq(a, b);
  }
  return {};
}

inline BigUint apply_oracle(KernelOp op, unsigned w, const BigUint& a, const BigUint& b, const BigUint& c,
                            const BigUint& s) {
  BigUint m = mask_of(w);
  switch (op) {
    case KernelOp::kAnd: return a & b;
    case KernelOp::kOr: return a | b;
    case KernelOp::kXor: return a ^ b;
    case KernelOp::kNot: return a ^ m;
    case KernelOp::kAdd: return (a + b) & m;
    case KernelOp::kSub: return (a + (m + 1) - b) & m;
    case KernelOp::kShl: return oracle_shl(a, c, w);
    case KernelOp::kShr: return oracle_shr(a, c, w);
    case KernelOp::kRor: return oracle_ror(a, c, w);
    case KernelOp::kSlice: return (a >> (w / 4)) & mask_of(w - w / 4);
    case KernelOp::kConcat: return a | (b << w);
    case KernelOp::kZext: return a;
    case KernelOp::kSext: return oracle_sext(a, w, w + 5);
    case KernelOp::kMux: return s != 0 ? a : b;
    case KernelOp::kEq: return a == b ? 1 : 0;
  }
  return 0;
}

// Builds the symbolic expression once and checks it, and the all-concrete
// path, against the oracle on `samples` random inputs. Returns failures.
inline int kernel_agreement_failures(KernelOp op, unsigned width, int samples, std::uint64_t seed) {
  Aig g;
  BitVec a = BitVec::var(g, width, "a");
  BitVec b = BitVec::var(g, width, "b");
  BitVec c = BitVec::var(g, 8, "c");
  BitVec s = BitVec::var(g, 1, "s");
  BitVec sym = apply_kernel(op, a, b, c, s);
  std::mt19937_64 rng(seed);
  int failures = 0;
  for (int i = 0; i < samples; ++i) {
    BigUint av = random_value(rng, width), bv = random_value(rng, width);
    // Bias half the counts below the width so shifts are exercised.
    BigUint cv = (i % 2 == 0) ? BigUint(rng() % (width + 1)) : random_value(rng, 8);
    BigUint sv = rng() & 1;
    if (i % 7 == 0) bv = av;
    Env env;
    assign(env, a, av);
    assign(env, b, bv);
    assign(env, c, cv);
    assign(env, s, sv);
    BigUint expected = apply_oracle(op, width, av, bv, cv, sv);
    BigUint concrete = apply_kernel(op, BitVec::constant(width, av), BitVec::constant(width, bv),
                                    BitVec::constant(8, cv), BitVec::constant(1, sv))
                           .value();
    if (bv_eval(sym, env) != expected || concrete != expected) ++failures;
  }
  return failures;
}

}  // namespace ucv::testing

namespace ucv::testing {

inline BigUint lane_of(const BigUint& v, unsigned lane) { return (v >> (64 * lane)) & mask_of(64); }

// Lane-wise VPSHRDQ with opmask merge/zeroing, on plain integers.
inline BigUint oracle_vpshrdq(const BigUint& src1, const BigUint& src2, unsigned imm, unsigned opmask_index,
                              bool zeroing, const std::vector<BigUint>& k, const BigUint& old) {
  BigUint out = 0;
  unsigned m = imm % 64;
  for (unsigned lane = 0; lane < 8; ++lane) {
    BigUint both = (lane_of(src2, lane) << 64) | lane_of(src1, lane);
    BigUint r = (both >> m) & mask_of(64);
    bool active = opmask_index == 0 || boost::multiprecision::bit_test(k[opmask_index], lane);
    BigUint v = active ? r : (zeroing ? BigUint(0) : lane_of(old, lane));
    out |= v << (64 * lane);
  }
  return out;
}

}  // namespace ucv::testing
