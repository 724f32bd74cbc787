#pragma once

#include <span>

#include "ucv/design/bugs.hpp"
#include "ucv/design/ports.hpp"

namespace ucv::design {

// Byte-level decoder. Returns the flat output port (dx followed by the
// instruction fields, see map_decode). Structural bytes must be concrete;
// ModR/M, immediate and REX payload bits may be symbolic.
BitVec dut_decode_port(std::span<const BitVec> bytes, const isa::Config& config, const BugRegistry& bugs);

isa::DecodeResult dut_decode(std::span<const BitVec> bytes, const isa::Config& config, const BugRegistry& bugs);
isa::DecodeResult dut_decode(const std::vector<std::uint8_t>& bytes, const isa::Config& config,
                             const BugRegistry& bugs);

}  // namespace ucv::design
