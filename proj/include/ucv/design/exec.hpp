#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ucv/design/bugs.hpp"
#include "ucv/design/ports.hpp"

namespace ucv::design {

struct CircuitParams {
  unsigned ssz = 64, dsz = 64;
};

// Combinational netlist for one uop opcode over flat ports.
struct ExecCircuit {
  ucode::UopOpcode opcode = ucode::UopOpcode::kNop;
  unsigned latency = 1;
  unsigned width = 64;  // 64 scalar, 256 packed
  std::function<BitVec(const BitVec& in, const CircuitParams&, const BugRegistry&)> eval;
};

using ExecCircuits = std::map<ucode::UopOpcode, ExecCircuit>;

const ExecCircuits& build_exec_circuits();

// Evaluates the circuit for `uop`, concretely or symbolically. `undriven`
// feeds the floating bus; it defaults to zero.
ucode::UopResults dut_exec(const ucode::Uop& uop, const ucode::UopData& data, const BugRegistry& bugs,
                           const std::optional<BitVec>& undriven = std::nullopt);

unsigned uop_latency(ucode::UopOpcode op);

struct Dispatch {
  unsigned cycle = 0;
  unsigned latency = 1;
};

// Two dispatches collide when they reach the single writeback port in the
// same cycle.
struct ScheduleCheck {
  bool ok = true;
  unsigned cycle = 0;
  std::size_t first = 0, second = 0;
};

ScheduleCheck check_dispatch_schedule(const std::vector<Dispatch>& dispatches);
ScheduleCheck check_dispatch_schedule(const std::vector<std::pair<unsigned, ucode::UopOpcode>>& dispatches);

}  // namespace ucv::design
