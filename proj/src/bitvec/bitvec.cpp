#include "ucv/bitvec/bitvec.hpp"

#include <algorithm>
#include <cstdio>

namespace ucv {

bool Env::get(VarId var) const {
  auto it = assignment_.find(var);
  if (it == assignment_.end()) throw BitVecError("env: no value for var " + std::to_string(var));
  return it->second;
}

BitVec::BitVec(Aig* graph, std::vector<Lit> bits) : graph_(graph), bits_(std::move(bits)) {
  if (graph_ == nullptr) {
    for (Lit l : bits_) {
      if (!lit_is_const(l)) throw BitVecError("bitvec: symbolic bit without a graph");
    }
  }
}

BitVec BitVec::constant(unsigned width, const BigUint& value) {
  if (width == 0) throw BitVecError("bv_const: width must be positive");
  if (value < 0 || (value != 0 && boost::multiprecision::msb(value) >= width)) {
    throw BitVecError("bv_const: value does not fit in " + std::to_string(width) + " bits");
  }
  std::vector<Lit> bits(width, kFalse);
  for (unsigned i = 0; i < width; ++i) {
    if (boost::multiprecision::bit_test(value, i)) bits[i] = kTrue;
  }
  return BitVec(nullptr, std::move(bits));
}

BitVec BitVec::ones(unsigned width) { return BitVec(nullptr, std::vector<Lit>(width, kTrue)); }

BitVec BitVec::var(Aig& graph, unsigned width, std::string_view name) {
  if (width == 0) throw BitVecError("bv_var: width must be positive");
  std::vector<Lit> bits;
  bits.reserve(width);
  for (unsigned i = 0; i < width; ++i) {
    bits.push_back(graph.new_input(std::string(name) + "[" + std::to_string(i) + "]"));
  }
  return BitVec(&graph, std::move(bits));
}

bool BitVec::is_concrete() const {
  return std::all_of(bits_.begin(), bits_.end(), [](Lit l) { return lit_is_const(l); });
}

BigUint BitVec::value() const {
  BigUint v = 0;
  for (unsigned i = width(); i-- > 0;) {
    Lit l = bits_[i];
    if (!lit_is_const(l)) throw BitVecError("bitvec: value() on symbolic bit " + std::to_string(i));
    v <<= 1;
    if (l == kTrue) v |= 1;
  }
  return v;
}

std::uint64_t BitVec::u64() const {
  if (width() > 64) {
    BigUint v = value();
    if (v != 0 && boost::multiprecision::msb(v) >= 64) throw BitVecError("bitvec: value exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width(); ++i) {
    Lit l = bits_[i];
    if (!lit_is_const(l)) throw BitVecError("bitvec: u64() on symbolic bit " + std::to_string(i));
    if (l == kTrue) v |= std::uint64_t{1} << i;
  }
  return v;
}

namespace {

Aig* pick_graph(const BitVec& a, const BitVec& b) {
  if (a.graph() != nullptr && b.graph() != nullptr && a.graph() != b.graph()) {
    throw BitVecError("bitvec: operands belong to different graphs");
  }
  return a.graph() != nullptr ? a.graph() : b.graph();
}

void require_same_width(const BitVec& a, const BitVec& b, const char* op) {
  if (a.width() != b.width()) {
    throw BitVecError(std::string(op) + ": width mismatch (" + std::to_string(a.width()) + " vs " +
                      std::to_string(b.width()) + ")");
  }
}

void require_bit(const BitVec& a, const char* op) {
  if (a.width() != 1) throw BitVecError(std::string(op) + ": expected a 1-bit operand");
}

template <typename F>
BitVec lanewise(const BitVec& a, const BitVec& b, const char* op, F f) {
  require_same_width(a, b, op);
  Aig* g = pick_graph(a, b);
  std::vector<Lit> out(a.width());
  for (unsigned i = 0; i < a.width(); ++i) out[i] = f(g, a[i], b[i]);
  return BitVec(g, std::move(out));
}

unsigned ceil_log2(unsigned n) {
  unsigned k = 0;
  while ((1u << k) < n) ++k;
  return k;
}

// Shift by a constant amount; `right` selects direction. Zero-filling.
std::vector<Lit> shift_const(const std::vector<Lit>& a, std::uint64_t amount, bool right) {
  const auto w = a.size();
  std::vector<Lit> out(w, kFalse);
  if (amount >= w) return out;
  for (std::size_t i = 0; i < w; ++i) {
    if (right) {
      if (i + amount < w) out[i] = a[i + amount];
    } else {
      if (i >= amount) out[i] = a[i - amount];
    }
  }
  return out;
}

std::vector<Lit> rotate_right_const(const std::vector<Lit>& a, std::uint64_t amount) {
  const auto w = a.size();
  std::vector<Lit> out(w);
  for (std::size_t i = 0; i < w; ++i) out[i] = a[(i + amount) % w];
  return out;
}

}  // namespace

BitVec bv_const(unsigned width, const BigUint& value) { return BitVec::constant(width, value); }
BitVec bv_var(Aig& graph, unsigned width, std::string_view name) { return BitVec::var(graph, width, name); }

BitVec bv_and(const BitVec& a, const BitVec& b) { return lanewise(a, b, "and", and_lit); }
BitVec bv_or(const BitVec& a, const BitVec& b) { return lanewise(a, b, "or", or_lit); }
BitVec bv_xor(const BitVec& a, const BitVec& b) { return lanewise(a, b, "xor", xor_lit); }

BitVec bv_not(const BitVec& a) {
  std::vector<Lit> out(a.width());
  for (unsigned i = 0; i < a.width(); ++i) out[i] = lit_not(a[i]);
  return BitVec(a.graph(), std::move(out));
}

BitVec bv_bitwise(BitwiseOp op, const BitVec& a, const BitVec& b) {
  switch (op) {
    case BitwiseOp::kAnd: return bv_and(a, b);
    case BitwiseOp::kOr: return bv_or(a, b);
    case BitwiseOp::kXor: return bv_xor(a, b);
    case BitwiseOp::kNot: return bv_not(a);
  }
  throw BitVecError("bv_bitwise: unknown op");
}

BitVec bv_add(const BitVec& a, const BitVec& b) {
  require_same_width(a, b, "add");
  Aig* g = pick_graph(a, b);
  std::vector<Lit> out(a.width());
  Lit carry = kFalse;
  for (unsigned i = 0; i < a.width(); ++i) {
    Lit p = xor_lit(g, a[i], b[i]);
    out[i] = xor_lit(g, p, carry);
    carry = or_lit(g, and_lit(g, a[i], b[i]), and_lit(g, p, carry));
  }
  return BitVec(g, std::move(out));
}

// Borrow-propagating subtractor.
BitVec bv_sub(const BitVec& a, const BitVec& b) {
  require_same_width(a, b, "sub");
  Aig* g = pick_graph(a, b);
  std::vector<Lit> out(a.width());
  Lit borrow = kFalse;
  for (unsigned i = 0; i < a.width(); ++i) {
    Lit d = xor_lit(g, a[i], b[i]);
    out[i] = xor_lit(g, d, borrow);
    borrow = or_lit(g, and_lit(g, lit_not(a[i]), b[i]), and_lit(g, lit_not(d), borrow));
  }
  return BitVec(g, std::move(out));
}

BitVec bv_arith(ArithOp op, const BitVec& a, const BitVec& b) {
  return op == ArithOp::kAdd ? bv_add(a, b) : bv_sub(a, b);
}

BitVec bv_shift(ShiftOp op, const BitVec& a, const BitVec& count) {
  if (a.empty() || count.empty()) throw BitVecError("shift: empty operand");
  Aig* g = pick_graph(a, count);
  const unsigned w = a.width();
  std::vector<Lit> cur = a.bits();

  if (op == ShiftOp::kRor) {
    // Rotation composes additively mod w, so every count bit contributes
    // a fixed rotation of 2^k mod w.
    BigUint step = 1;
    for (unsigned k = 0; k < count.width(); ++k, step <<= 1) {
      auto amount = static_cast<std::uint64_t>(step % w);
      if (amount == 0) continue;
      auto rotated = rotate_right_const(cur, amount);
      for (unsigned i = 0; i < w; ++i) cur[i] = mux_lit(g, count[k], rotated[i], cur[i]);
    }
    return BitVec(g, std::move(cur));
  }

  const bool right = op == ShiftOp::kShr;
  const unsigned stages = ceil_log2(w);
  for (unsigned k = 0; k < std::min(stages, count.width()); ++k) {
    auto shifted = shift_const(cur, std::uint64_t{1} << k, right);
    for (unsigned i = 0; i < w; ++i) cur[i] = mux_lit(g, count[k], shifted[i], cur[i]);
  }
  Lit overflow = kFalse;
  for (unsigned k = stages; k < count.width(); ++k) overflow = or_lit(g, overflow, count[k]);
  for (unsigned i = 0; i < w; ++i) cur[i] = and_lit(g, lit_not(overflow), cur[i]);
  return BitVec(g, std::move(cur));
}

BitVec bv_shl(const BitVec& a, const BitVec& count) { return bv_shift(ShiftOp::kShl, a, count); }
BitVec bv_shr(const BitVec& a, const BitVec& count) { return bv_shift(ShiftOp::kShr, a, count); }
BitVec bv_ror(const BitVec& a, const BitVec& count) { return bv_shift(ShiftOp::kRor, a, count); }

BitVec bv_shl(const BitVec& a, unsigned count) { return BitVec(a.graph(), shift_const(a.bits(), count, false)); }
BitVec bv_shr(const BitVec& a, unsigned count) { return BitVec(a.graph(), shift_const(a.bits(), count, true)); }

BitVec bv_slice(const BitVec& a, unsigned lo, unsigned hi) {
  if (lo > hi || hi >= a.width()) {
    throw BitVecError("slice: bounds [" + std::to_string(lo) + "," + std::to_string(hi) + "] outside width " +
                      std::to_string(a.width()));
  }
  return BitVec(a.graph(), std::vector<Lit>(a.bits().begin() + lo, a.bits().begin() + hi + 1));
}

BitVec bv_concat(const BitVec& low, const BitVec& high) {
  Aig* g = pick_graph(low, high);
  std::vector<Lit> out = low.bits();
  out.insert(out.end(), high.bits().begin(), high.bits().end());
  return BitVec(g, std::move(out));
}

BitVec bv_zext(const BitVec& a, unsigned width) {
  if (width < a.width()) throw BitVecError("zext: target narrower than source");
  std::vector<Lit> out = a.bits();
  out.resize(width, kFalse);
  return BitVec(a.graph(), std::move(out));
}

BitVec bv_sext(const BitVec& a, unsigned width) {
  if (width < a.width()) throw BitVecError("sext: target narrower than source");
  if (a.empty()) throw BitVecError("sext: empty operand");
  std::vector<Lit> out = a.bits();
  out.resize(width, a[a.width() - 1]);
  return BitVec(a.graph(), std::move(out));
}

BitVec bv_resize(const BitVec& a, unsigned width) {
  if (width <= a.width()) return bv_slice(a, 0, width - 1);
  return bv_zext(a, width);
}

BitVec bv_mux(const BitVec& sel, const BitVec& then_v, const BitVec& else_v) {
  require_bit(sel, "mux");
  require_same_width(then_v, else_v, "mux");
  Aig* g = pick_graph(sel, then_v);
  g = pick_graph(BitVec(g, {}), else_v);
  std::vector<Lit> out(then_v.width());
  for (unsigned i = 0; i < then_v.width(); ++i) out[i] = mux_lit(g, sel[0], then_v[i], else_v[i]);
  return BitVec(g, std::move(out));
}

namespace {

Lit and_tree(Aig* g, std::vector<Lit> lits) {
  if (lits.empty()) return kTrue;
  while (lits.size() > 1) {
    std::vector<Lit> next;
    for (std::size_t i = 0; i + 1 < lits.size(); i += 2) next.push_back(and_lit(g, lits[i], lits[i + 1]));
    if (lits.size() % 2 == 1) next.push_back(lits.back());
    lits = std::move(next);
  }
  return lits[0];
}

}  // namespace

BitVec bv_eq(const BitVec& a, const BitVec& b) {
  require_same_width(a, b, "eq");
  Aig* g = pick_graph(a, b);
  std::vector<Lit> same(a.width());
  for (unsigned i = 0; i < a.width(); ++i) same[i] = lit_not(xor_lit(g, a[i], b[i]));
  return BitVec(g, {and_tree(g, std::move(same))});
}

BitVec bv_ne(const BitVec& a, const BitVec& b) { return bv_not(bv_eq(a, b)); }

BitVec bv_ult(const BitVec& a, const BitVec& b) {
  require_same_width(a, b, "ult");
  Aig* g = pick_graph(a, b);
  Lit lt = kFalse;
  for (unsigned i = 0; i < a.width(); ++i) {
    // From LSB up: a < b at bits [0..i] iff (~a_i & b_i) | (a_i == b_i & lt)
    Lit eq = lit_not(xor_lit(g, a[i], b[i]));
    lt = or_lit(g, and_lit(g, lit_not(a[i]), b[i]), and_lit(g, eq, lt));
  }
  return BitVec(g, {lt});
}

BitVec bv_reduce_or(const BitVec& a) {
  std::vector<Lit> neg(a.width());
  for (unsigned i = 0; i < a.width(); ++i) neg[i] = lit_not(a[i]);
  return BitVec(a.graph(), {lit_not(and_tree(a.graph(), std::move(neg)))});
}

BitVec bv_reduce_and(const BitVec& a) { return BitVec(a.graph(), {and_tree(a.graph(), a.bits())}); }

BitVec bv_land(const BitVec& a, const BitVec& b) {
  require_bit(a, "land");
  require_bit(b, "land");
  return bv_and(a, b);
}

BitVec bv_lor(const BitVec& a, const BitVec& b) {
  require_bit(a, "lor");
  require_bit(b, "lor");
  return bv_or(a, b);
}

BitVec bv_lnot(const BitVec& a) {
  require_bit(a, "lnot");
  return bv_not(a);
}

BitVec bv_true() { return BitVec(nullptr, {kTrue}); }
BitVec bv_false() { return BitVec(nullptr, {kFalse}); }

namespace {

// Evaluates the cones of `roots`; returns one boolean per root.
std::vector<bool> eval_lits(const Aig* g, const std::vector<Lit>& roots, const Env& env) {
  std::vector<bool> out(roots.size());
  std::uint32_t max_node = 0;
  for (Lit l : roots) max_node = std::max(max_node, lit_node(l));
  if (max_node == 0) {
    for (std::size_t i = 0; i < roots.size(); ++i) out[i] = roots[i] == kTrue;
    return out;
  }
  if (g == nullptr) throw BitVecError("eval: symbolic literal without a graph");

  // 0 = unknown, 1 = false, 2 = true
  std::vector<std::uint8_t> val(max_node + 1, 0);
  val[0] = 1;
  std::vector<std::uint32_t> stack;
  auto lit_val = [&](Lit l) { return (val[lit_node(l)] == 2) != lit_is_neg(l); };

  for (Lit root : roots) {
    stack.push_back(lit_node(root));
    while (!stack.empty()) {
      std::uint32_t n = stack.back();
      if (val[n] != 0) {
        stack.pop_back();
        continue;
      }
      const auto& node = g->node(n);
      if (node.kind == Aig::Kind::kInput) {
        val[n] = env.get(node.var) ? 2 : 1;
        stack.pop_back();
        continue;
      }
      std::uint32_t l = lit_node(node.left), r = lit_node(node.right);
      bool ready = true;
      if (val[l] == 0) {
        stack.push_back(l);
        ready = false;
      }
      if (val[r] == 0) {
        stack.push_back(r);
        ready = false;
      }
      if (ready) {
        val[n] = (lit_val(node.left) && lit_val(node.right)) ? 2 : 1;
        stack.pop_back();
      }
    }
  }
  for (std::size_t i = 0; i < roots.size(); ++i) out[i] = lit_val(roots[i]);
  return out;
}

}  // namespace

BigUint bv_eval(const BitVec& v, const Env& env) {
  auto bits = eval_lits(v.graph(), v.bits(), env);
  BigUint out = 0;
  for (unsigned i = v.width(); i-- > 0;) {
    out <<= 1;
    if (bits[i]) out |= 1;
  }
  return out;
}

BitVec bv_concretize(const BitVec& v, const Env& env) {
  auto bits = eval_lits(v.graph(), v.bits(), env);
  std::vector<Lit> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? kTrue : kFalse;
  return BitVec(nullptr, std::move(out));
}

std::vector<VarId> bv_support(const BitVec& v) {
  std::vector<VarId> vars;
  const Aig* g = v.graph();
  if (g == nullptr) return vars;
  std::vector<bool> seen(g->num_nodes(), false);
  std::vector<std::uint32_t> stack;
  for (Lit l : v.bits()) stack.push_back(lit_node(l));
  while (!stack.empty()) {
    auto n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = true;
    const auto& node = g->node(n);
    if (node.kind == Aig::Kind::kInput) {
      vars.push_back(node.var);
    } else if (node.kind == Aig::Kind::kAnd) {
      stack.push_back(lit_node(node.left));
      stack.push_back(lit_node(node.right));
    }
  }
  std::sort(vars.begin(), vars.end());
  return vars;
}

std::string to_hex(const BigUint& value, unsigned width) {
  unsigned digits = std::max(1u, (width + 3) / 4);
  std::string out(digits, '0');
  BigUint v = value;
  for (unsigned i = 0; i < digits; ++i) {
    auto nibble = static_cast<unsigned>(v & 0xF);
    out[digits - 1 - i] = "0123456789ABCDEF"[nibble];
    v >>= 4;
  }
  return "0x" + out;
}

}  // namespace ucv
