#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucv/isa/decode.hpp"
#include "ucv/isa/semantics.hpp"
#include "ucv/isa/state.hpp"
#include "ucv/ucode/uop.hpp"

namespace ucv::ucode {

struct UcodeState {
  MicroPC pc;
  isa::X86State arch;            // architectural registers, flags, memory
  std::array<BitVec, kNumG> g;   // 64-bit internal registers
  std::array<BitVec, kNumT> t;   // 256-bit internal registers

  UcodeState();
};

UcodeState init_ucode_state(const MicroPC& pc, const isa::X86State& arch);

// Operand values read for one uop.
struct UopData {
  BitVec src1, src2;
  BitVec old_dst;
  BitVec zf;
  BitVec lane_mask = BitVec::ones(4);  // PORQ: active lanes of the destination half
};

struct UopResults {
  RegRef dst;
  std::optional<BitVec> value;  // full width of the destination register
  isa::Flags flags;
  std::optional<BitVec> branch_taken;
};

// The design functions the model consults: translation, ROM expansion and
// microsequencing.
class UcodeDesign {
 public:
  virtual ~UcodeDesign() = default;
  virtual MicroPC xlate(const isa::Instruction& instr) const = 0;
  virtual Uop read(const BitVec& rom_addr, const SideParams& side) const = 0;
  virtual BitVec step(const BitVec& rom_addr, const BitVec& taken) const = 0;
};

class UcodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepBoundExceeded : public UcodeError {
 public:
  using UcodeError::UcodeError;
};

UopResults uop_semantics(const Uop& uop, const UopData& data);

Uop ucode_get_uop(const MicroPC& pc, const UcodeDesign& design);
UopData ucode_fetch_data(const Uop& uop, const UcodeState& s);
MicroPC ucode_next_pc(const MicroPC& pc, const UopResults& results, const UcodeDesign& design);
UcodeState ucode_update_state(const UopResults& results, MicroPC next_pc, const UcodeState& s);
UcodeState ucode_model_step(const UcodeState& s, const UcodeDesign& design);

struct TraceEntry {
  unsigned step = 0;
  Uop uop;
  std::string line;  // "#<n> <uop> | <dst>=0x<hex> [flags]"
};

// Evaluates one uop; defaults to uop_semantics.
using ExecHook = std::function<UopResults(const Uop&, const UopData&)>;

struct RunOptions {
  unsigned step_bound = 256;
  std::vector<TraceEntry>* trace = nullptr;
  ExecHook exec;
};

// Steps to the halt sentinel. A symbolic branch forks the run and the two
// halted states are merged under the branch condition.
UcodeState run_ucode_model(const UcodeState& s, const UcodeDesign& design, const RunOptions& options = {});

// Architectural writes of a halted run relative to `initial`.
isa::ExecResult extract_instr_results(const UcodeState& final_state, const isa::X86State& initial);

isa::ExecResult run_xlate_ucode(const isa::Instruction& instr, const isa::X86State& state,
                                const UcodeDesign& design, const RunOptions& options = {});

BitVec read_reg(const UcodeState& s, const RegRef& r, const BitVec& imm);
UcodeState merge_states(const BitVec& cond, const UcodeState& a, const UcodeState& b);

}  // namespace ucv::ucode
