#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "ucv/design/bugs.hpp"
#include "ucv/design/decoder.hpp"
#include "ucv/design/exec.hpp"
#include "ucv/design/rom.hpp"
#include "ucv/isa/semantics.hpp"

namespace ucv::design {

class UnsupportedVariant : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The design under test: decoder, translator, microsequencer over the ROM,
// and execution circuits, with the seeded-bug switches.
class Design : public ucode::UcodeDesign {
 public:
  using XlateRule = std::function<ucode::MicroPC(const isa::Instruction&, const Design&)>;

  explicit Design(RomImage rom = default_rom());

  const RomImage& rom() const { return rom_; }
  BugRegistry& bugs() { return bugs_; }
  const BugRegistry& bugs() const { return bugs_; }
  void inject_bug(const std::string& name, bool enabled) { bugs_.inject(name, enabled); }

  isa::DecodeResult decode(std::span<const BitVec> bytes, const isa::Config& config = {}) const;

  // Translation keyed by variant id (e.g. "SHRD/reg64-imm8"). The entry and
  // size fields of `instr` must be concrete.
  ucode::MicroPC xlate(const isa::Instruction& instr) const override;
  bool supports_xlate(const std::string& variant) const { return rules_.count(variant) != 0; }
  std::vector<std::string> xlate_variants() const;
  void add_xlate_rule(const std::string& variant, XlateRule rule) { rules_[variant] = std::move(rule); }

  // Microsequencer: expands the ROM word at a concrete address.
  ucode::Uop read(const BitVec& rom_addr, const ucode::SideParams& side) const override;
  BitVec step(const BitVec& rom_addr, const BitVec& taken) const override;

  ucode::UopResults exec(const ucode::Uop& uop, const ucode::UopData& data,
                         const std::optional<BitVec>& undriven = std::nullopt) const;

  // Instruction-level step built only from design blocks: dut_decode, the
  // translator, the microsequencer and the execution circuits.
  isa::X86State rtl_step(const isa::X86State& state, const isa::Config& config = {}) const;

 private:
  RomImage rom_;
  BugRegistry bugs_;
  std::map<std::string, XlateRule> rules_;
};

std::string variant_of(const isa::Instruction& instr);

// A hypothetical SHRD translation whose trap address depends on imm8 bit 5;
// it violates the fixed-uop-sequence assumption.
Design::XlateRule imm_dependent_trap_rule();

}  // namespace ucv::design
