#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ucv/bitvec/aig.hpp"

namespace ucv {

using BigUint = boost::multiprecision::cpp_int;

class BitVecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Assignment of primary inputs, used both to evaluate expressions and to
// carry counterexamples out of the solver.
class Env {
 public:
  void set(VarId var, bool value) { assignment_[var] = value; }
  bool get(VarId var) const;
  bool contains(VarId var) const { return assignment_.count(var) != 0; }
  std::size_t size() const { return assignment_.size(); }
  const std::map<VarId, bool>& assignment() const { return assignment_; }

 private:
  std::map<VarId, bool> assignment_;
};

// Fixed-width bitvector; bit 0 is least significant. Each bit is a literal
// that is either constant or refers into `graph()`. Values are immutable.
class BitVec {
 public:
  BitVec() = default;
  BitVec(Aig* graph, std::vector<Lit> bits);

  static BitVec constant(unsigned width, const BigUint& value);
  static BitVec constant(unsigned width, std::uint64_t value) { return constant(width, BigUint(value)); }
  static BitVec zeros(unsigned width) { return constant(width, 0); }
  static BitVec ones(unsigned width);
  static BitVec var(Aig& graph, unsigned width, std::string_view name);
  static BitVec bit(Aig* graph, Lit l) { return BitVec(graph, {l}); }

  unsigned width() const { return static_cast<unsigned>(bits_.size()); }
  bool empty() const { return bits_.empty(); }
  Lit operator[](unsigned i) const { return bits_.at(i); }
  const std::vector<Lit>& bits() const { return bits_; }
  Aig* graph() const { return graph_; }

  bool is_concrete() const;
  // Unsigned value; throws BitVecError if any bit is symbolic.
  BigUint value() const;
  std::uint64_t u64() const;
  bool is_true() const { return width() == 1 && bits_[0] == kTrue; }
  bool is_false() const { return width() == 1 && bits_[0] == kFalse; }

  // Same literals bit for bit (hash-consed identity).
  bool same_as(const BitVec& other) const { return bits_ == other.bits_; }

 private:
  Aig* graph_ = nullptr;
  std::vector<Lit> bits_;
};

enum class BitwiseOp { kAnd, kOr, kXor, kNot };
enum class ArithOp { kAdd, kSub };
enum class ShiftOp { kShl, kShr, kRor };

BitVec bv_const(unsigned width, const BigUint& value);
BitVec bv_var(Aig& graph, unsigned width, std::string_view name);

BitVec bv_bitwise(BitwiseOp op, const BitVec& a, const BitVec& b = {});
BitVec bv_and(const BitVec& a, const BitVec& b);
BitVec bv_or(const BitVec& a, const BitVec& b);
BitVec bv_xor(const BitVec& a, const BitVec& b);
BitVec bv_not(const BitVec& a);

BitVec bv_arith(ArithOp op, const BitVec& a, const BitVec& b);
BitVec bv_add(const BitVec& a, const BitVec& b);
BitVec bv_sub(const BitVec& a, const BitVec& b);

// SHL/SHR zero-fill and yield zero once count >= width; ROR rotates by
// count mod width. `count` may have any width.
BitVec bv_shift(ShiftOp op, const BitVec& a, const BitVec& count);
BitVec bv_shl(const BitVec& a, const BitVec& count);
BitVec bv_shr(const BitVec& a, const BitVec& count);
BitVec bv_ror(const BitVec& a, const BitVec& count);
BitVec bv_shl(const BitVec& a, unsigned count);
BitVec bv_shr(const BitVec& a, unsigned count);

// Bits lo..hi inclusive.
BitVec bv_slice(const BitVec& a, unsigned lo, unsigned hi);
// `low` occupies the least significant bits.
BitVec bv_concat(const BitVec& low, const BitVec& high);
BitVec bv_zext(const BitVec& a, unsigned width);
BitVec bv_sext(const BitVec& a, unsigned width);
// Truncate or zero-extend to `width`.
BitVec bv_resize(const BitVec& a, unsigned width);

BitVec bv_mux(const BitVec& sel, const BitVec& then_v, const BitVec& else_v);
BitVec bv_eq(const BitVec& a, const BitVec& b);
BitVec bv_ne(const BitVec& a, const BitVec& b);
BitVec bv_ult(const BitVec& a, const BitVec& b);
BitVec bv_reduce_or(const BitVec& a);
BitVec bv_reduce_and(const BitVec& a);
BitVec bv_land(const BitVec& a, const BitVec& b);  // 1-bit and
BitVec bv_lor(const BitVec& a, const BitVec& b);   // 1-bit or
BitVec bv_lnot(const BitVec& a);                   // 1-bit not
BitVec bv_true();
BitVec bv_false();

BigUint bv_eval(const BitVec& v, const Env& env);
// Substitute `env` and return an all-concrete vector.
BitVec bv_concretize(const BitVec& v, const Env& env);

// Variables in the cone of influence of `v`, ascending.
std::vector<VarId> bv_support(const BitVec& v);

std::string to_hex(const BigUint& value, unsigned width);

}  // namespace ucv
