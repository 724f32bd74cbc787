#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace ucv {

// A literal is an edge into the graph: node index in the high bits, the
// complement flag in bit 0. Node 0 is the constant-false node.
using Lit = std::uint32_t;

inline constexpr Lit kFalse = 0;
inline constexpr Lit kTrue = 1;

inline constexpr Lit lit_not(Lit l) { return l ^ 1u; }
inline constexpr std::uint32_t lit_node(Lit l) { return l >> 1; }
inline constexpr bool lit_is_neg(Lit l) { return (l & 1u) != 0; }
inline constexpr bool lit_is_const(Lit l) { return l <= kTrue; }
inline constexpr Lit make_lit(std::uint32_t node, bool neg = false) { return (node << 1) | (neg ? 1u : 0u); }

using VarId = std::uint32_t;

// Hash-consed and-inverter graph. Append-only; nodes are stored in
// topological order (children always have smaller indices). A graph has a
// single writer; each proof job builds into its own instance.
class Aig {
 public:
  enum class Kind : std::uint8_t { kConst, kInput, kAnd };

  struct Node {
    Kind kind;
    Lit left;   // kAnd only
    Lit right;  // kAnd only
    VarId var;  // kInput only
  };

  Aig();
  Aig(const Aig&) = delete;
  Aig& operator=(const Aig&) = delete;

  // Fresh primary input labelled `name`; returns its positive literal.
  Lit new_input(std::string name);

  Lit land(Lit a, Lit b);
  Lit lor(Lit a, Lit b) { return lit_not(land(lit_not(a), lit_not(b))); }
  Lit lxor(Lit a, Lit b);
  Lit mux(Lit sel, Lit t, Lit e);

  std::size_t num_nodes() const;
  std::size_t num_inputs() const;
  const Node& node(std::uint32_t index) const { return nodes_[index]; }
  Lit input_lit(VarId var) const;
  const std::string& input_name(VarId var) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> inputs_;  // var id -> node index
  std::vector<std::string> names_;
  std::unordered_map<std::uint64_t, std::uint32_t> strash_;
};

// Constant folding shared by the graph and the concrete-only path. Returns
// true and sets `out` when the conjunction simplifies without a new node.
bool fold_and(Lit a, Lit b, Lit& out);

// AND on literals when `g` may be null (all-concrete evaluation).
Lit and_lit(Aig* g, Lit a, Lit b);
Lit or_lit(Aig* g, Lit a, Lit b);
Lit xor_lit(Aig* g, Lit a, Lit b);
Lit mux_lit(Aig* g, Lit sel, Lit t, Lit e);

}  // namespace ucv
