#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ucv/bitvec/bitvec.hpp"

namespace ucv::isa {

inline constexpr unsigned kNumGprs = 16;
inline constexpr unsigned kNumZmms = 32;
inline constexpr unsigned kNumKs = 8;

enum Gpr : unsigned { RAX, RCX, RDX, RBX, RSP, RBP, RSI, RDI, R8, R9, R10, R11, R12, R13, R14, R15 };

const char* gpr_name(unsigned index);

// Decode/execute exception codes carried in 8-bit dx/ex fields.
enum ExceptionCode : std::uint8_t {
  kExNone = 0,
  kExUD = 6,
  kExGP = 13,
  kExUnsupported = 0x80,  // memory-operand form: outside the modelled subset
  kExIncomplete = 0x81,   // byte stream ended before the instruction did
};

const char* exception_name(unsigned code);

struct Config {
  unsigned mode = 64;  // only 64-bit mode is modelled
};

// Every field is a BitVec so the same state drives concrete and symbolic
// runs. Concrete states use BitVecs without a graph.
struct X86State {
  BitVec ip = BitVec::zeros(64);
  Config config;
  std::array<BitVec, kNumGprs> gpr;
  std::array<BitVec, kNumZmms> zmm;
  std::array<BitVec, kNumKs> k;
  BitVec zf = bv_false(), sf = bv_false(), cf = bv_false();
  std::map<std::uint64_t, BitVec> memory;  // byte map, instruction fetch only
  BitVec fault = BitVec::zeros(8);         // last dx/ex, 0 when none

  X86State();
};

class StateFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `NAME=0x<hex>` per line; names are IP, GPR[<name>], ZMM[<n>], K[<n>],
// ZF, SF, CF, MEM[0x<addr>]. Blank lines and '#' comments are skipped.
X86State parse_state(std::istream& in);
X86State parse_state_file(const std::string& path);
// Emits every register (concrete states only) in the same format.
void write_state(const X86State& s, std::ostream& out);

// Places `bytes` at consecutive addresses from `addr`.
void load_code(X86State& s, std::uint64_t addr, const std::vector<std::uint8_t>& bytes);

// Fresh symbolic registers named after their architectural location.
X86State symbolic_state(Aig& g, std::string_view prefix = "");

}  // namespace ucv::isa
