#include "ucv/bitvec/aig.hpp"

#include <stdexcept>
#include <utility>

namespace ucv {

bool fold_and(Lit a, Lit b, Lit& out) {
  if (a == kFalse || b == kFalse || a == lit_not(b)) {
    out = kFalse;
    return true;
  }
  if (a == kTrue) {
    out = b;
    return true;
  }
  if (b == kTrue || a == b) {
    out = a;
    return true;
  }
  return false;
}

Aig::Aig() { nodes_.push_back(Node{Kind::kConst, 0, 0, 0}); }

Lit Aig::new_input(std::string name) {
  auto index = static_cast<std::uint32_t>(nodes_.size());
  auto var = static_cast<VarId>(inputs_.size());
  nodes_.push_back(Node{Kind::kInput, 0, 0, var});
  inputs_.push_back(index);
  names_.push_back(std::move(name));
  return make_lit(index);
}

Lit Aig::land(Lit a, Lit b) {
  Lit folded;
  if (fold_and(a, b, folded)) return folded;
  if (a > b) std::swap(a, b);
  std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
  auto it = strash_.find(key);
  if (it != strash_.end()) return make_lit(it->second);
  auto index = static_cast<std::uint32_t>(nodes_.size());
  if (index >= (1u << 31)) throw std::length_error("aig: node limit reached");
  nodes_.push_back(Node{Kind::kAnd, a, b, 0});
  strash_.emplace(key, index);
  return make_lit(index);
}

Lit Aig::lxor(Lit a, Lit b) {
  if (lit_is_const(a)) return a == kTrue ? lit_not(b) : b;
  if (lit_is_const(b)) return b == kTrue ? lit_not(a) : a;
  if (a == b) return kFalse;
  if (a == lit_not(b)) return kTrue;
  // a ^ b = !(a & b) & !(!a & !b)
  return land(lit_not(land(a, b)), lit_not(land(lit_not(a), lit_not(b))));
}

Lit Aig::mux(Lit sel, Lit t, Lit e) {
  if (sel == kTrue || t == e) return t;
  if (sel == kFalse) return e;
  if (t == kTrue && e == kFalse) return sel;
  if (t == kFalse && e == kTrue) return lit_not(sel);
  return lor(land(sel, t), land(lit_not(sel), e));
}

std::size_t Aig::num_nodes() const { return nodes_.size(); }
std::size_t Aig::num_inputs() const { return inputs_.size(); }

Lit Aig::input_lit(VarId var) const { return make_lit(inputs_.at(var)); }
const std::string& Aig::input_name(VarId var) const { return names_.at(var); }

namespace {

[[noreturn]] void need_graph() {
  throw std::logic_error("aig: symbolic literal without a graph");
}

}  // namespace

Lit and_lit(Aig* g, Lit a, Lit b) {
  Lit folded;
  if (fold_and(a, b, folded)) return folded;
  if (g == nullptr) need_graph();
  return g->land(a, b);
}

Lit or_lit(Aig* g, Lit a, Lit b) { return lit_not(and_lit(g, lit_not(a), lit_not(b))); }

Lit xor_lit(Aig* g, Lit a, Lit b) {
  if (lit_is_const(a) && lit_is_const(b)) return a ^ b;
  if (lit_is_const(a)) return a == kTrue ? lit_not(b) : b;
  if (lit_is_const(b)) return b == kTrue ? lit_not(a) : a;
  if (g == nullptr) need_graph();
  return g->lxor(a, b);
}

Lit mux_lit(Aig* g, Lit sel, Lit t, Lit e) {
  if (sel == kTrue || t == e) return t;
  if (sel == kFalse) return e;
  if (g == nullptr) need_graph();
  return g->mux(sel, t, e);
}

}  // namespace ucv
