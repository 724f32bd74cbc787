#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucv/isa/catalog.hpp"
#include "ucv/isa/state.hpp"

namespace ucv::isa {

inline constexpr unsigned kMaxInstructionLength = 15;

// Decoded instruction. Every field is a BitVec so decoding can run over
// partially symbolic bytes; all fields are zero when dx != 0.
struct Instruction {
  BitVec entry = BitVec::zeros(8);    // catalog id
  BitVec size = BitVec::zeros(10);    // operand size in bits
  BitVec op1 = BitVec::zeros(5);      // register indices in operand order
  BitVec op2 = BitVec::zeros(5);
  BitVec op3 = BitVec::zeros(5);
  BitVec imm = BitVec::zeros(8);
  BitVec opmask = BitVec::zeros(3);   // EVEX.aaa
  BitVec zeroing = BitVec::zeros(1);  // EVEX.z
  BitVec high8 = BitVec::zeros(1);    // byte operand names AH/CH/DH/BH
  BitVec length = BitVec::zeros(4);
  BitVec prefixes = BitVec::zeros(4);  // F0, 66, F2, F3 seen

  std::vector<BitVec*> fields();
  std::vector<const BitVec*> fields() const;
};

struct DecodeResult {
  BitVec dx = BitVec::zeros(8);
  Instruction instr;
};

// Raised when a structural decode decision depends on a symbolic bit.
class SymbolicBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FetchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Up to 15 mapped bytes from `ip`; the first must be mapped.
std::vector<BitVec> x86_fetch_code(std::uint64_t ip, const std::map<std::uint64_t, BitVec>& memory);

DecodeResult x86_decode(std::span<const BitVec> bytes, const Config& config = {});
DecodeResult x86_decode(const std::vector<std::uint8_t>& bytes, const Config& config = {});

// 1 iff both results agree: same dx, and same instruction when dx = 0.
BitVec decode_results_equal(const DecodeResult& a, const DecodeResult& b);

// Canonical encoding of a concrete, exception-free instruction.
std::vector<std::uint8_t> encode(const Instruction& instr);

std::string describe(const Instruction& instr);
std::vector<BitVec> bytes_of(const std::vector<std::uint8_t>& bytes);

}  // namespace ucv::isa
