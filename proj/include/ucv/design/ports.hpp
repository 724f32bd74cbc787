#pragma once

#include "ucv/isa/decode.hpp"
#include "ucv/ucode/model.hpp"

namespace ucv::design {

// Flat port vectors of the DUT blocks and the structured values they carry.
// Each map_* packs fields LSB first; the matching get_* unpacks them.

inline constexpr unsigned kInstrPortWidth = 8 + 10 + 5 + 5 + 5 + 8 + 3 + 1 + 1 + 4 + 4;

BitVec map_instr(const isa::Instruction& instr);
isa::Instruction get_instr(const BitVec& port);

// Decoder output port: dx(8) followed by the instruction port.
BitVec map_decode(const isa::DecodeResult& r);
isa::DecodeResult get_decode(const BitVec& port);

// Execution unit inputs. `width` is 64 for scalar units and 256 for packed
// units; src1, src2 and old_dst occupy `width` bits each.
struct ExecInputs {
  BitVec src1, src2, old_dst;
  BitVec zf = BitVec::zeros(1);
  BitVec lane_mask = BitVec::ones(4);
  BitVec predicate = BitVec::zeros(2);
  BitVec flag_mask = BitVec::zeros(3);
  BitVec maskmode = BitVec::zeros(1);
  BitVec undriven = BitVec::zeros(64);  // floating bus; only a seeded defect reads it
};

unsigned exec_width(ucode::UopOpcode op);
unsigned exec_input_width(unsigned width);
BitVec map_exec(const ExecInputs& in, unsigned width);
ExecInputs get_exec(const BitVec& port, unsigned width);
ExecInputs exec_inputs(const ucode::Uop& uop, const ucode::UopData& data);

struct ExecOutputs {
  BitVec value;
  BitVec zf_en = BitVec::zeros(1), zf = BitVec::zeros(1);
  BitVec sf_en = BitVec::zeros(1), sf = BitVec::zeros(1);
  BitVec cf_en = BitVec::zeros(1), cf = BitVec::zeros(1);
  BitVec taken = BitVec::zeros(1);
};

unsigned exec_output_width(unsigned width);
BitVec map_outputs(const ExecOutputs& out, unsigned width);
ExecOutputs get_outputs(const BitVec& port, unsigned width);

// Structured uop results as the ucode model sees them.
ucode::UopResults get_results(const ExecOutputs& out, const ucode::Uop& uop);

}  // namespace ucv::design
