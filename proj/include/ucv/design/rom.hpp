#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucv/ucode/uop.hpp"

namespace ucv::design {

// Operand template codes stored in the 6-bit dst/src fields of a ROM word.
enum Template : unsigned {
  kTplG0 = 0,      // G0..G15
  kTplT0 = 16,     // T0..T31
  kTplArg0 = 48,
  kTplArg1 = 49,
  kTplArg2 = 50,
  kTplArg0L = 51,
  kTplArg0H = 52,
  kTplArg1L = 53,
  kTplArg1H = 54,
  kTplArg2L = 55,
  kTplArg2H = 56,
  kTplImm = 57,       // side-params immediate
  kTplSmallImm = 58,  // the word's own 16-bit immediate
  kTplNone = 63,
};

std::string template_name(unsigned code);

enum class SeqControl : unsigned { kFallthrough = 0, kBranch = 1, kHalt = 2 };

// One packed microcode word, LSB first:
//   opcode(5) dst(6) src1(6) src2(6) imm-sext(1) small-imm(16) pred(2)
//   ssz(3) dsz(3) seq(2) target(10) flag-mask(3) reserved(1)
struct RomWord {
  unsigned opcode = static_cast<unsigned>(ucode::UopOpcode::kNop);
  unsigned dst = kTplNone, src1 = kTplNone, src2 = kTplNone;
  bool imm_sext = false;
  std::uint16_t small_imm = 0;
  unsigned predicate = 0;
  unsigned ssz_code = 3, dsz_code = 3;
  SeqControl seq = SeqControl::kFallthrough;
  unsigned target = 0;
  unsigned flag_mask = 0;

  std::uint64_t pack() const;
  static RomWord unpack(std::uint64_t word);  // throws RomError on a set reserved bit
  bool operator==(const RomWord&) const = default;
};

// Operand size codes: 0..4 = 8, 16, 32, 64, 256 bits.
unsigned size_code(unsigned bits);
unsigned size_bits(unsigned code);

class RomError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RomImage {
  std::map<unsigned, std::uint64_t> words;
  std::map<std::string, unsigned> entries;

  unsigned entry(const std::string& name) const;  // throws RomError
  RomWord word(unsigned addr) const;              // throws RomError
  // Every branch target is populated and every entry reaches a halt word.
  void validate() const;
};

// Routine source: `@<hex>` origin lines, `<label>:` lines and one row per
// line in the Tables' syntax, e.g. `AND G3, G3, 63 (SSZ:8 DSZ:64)`,
// optionally followed by a flag list `[ZF SF]` and `HALT`. `#` starts a
// comment.
RomImage assemble_rom(const std::string& source);
RomImage load_rom_source(const std::string& path);

// Text form of a single row, the inverse of the assembler for that row.
std::string disassemble(const RomWord& w, const RomImage* image = nullptr);

// ROM image file: `@<hex-addr> <16-hex-digit word>` lines plus
// `# entry <name> <hex-addr>` lines.
std::string write_rom_image(const RomImage& image);
RomImage parse_rom_image(const std::string& text);

// Routines shipped in data/routines.usrc.
std::string default_routine_path();
const RomImage& default_rom();

}  // namespace ucv::design
