#include "ucv/design/ports.hpp"

namespace ucv::design {

namespace {

// Appends fields LSB first.
struct Packer {
  BitVec out;
  void put(const BitVec& v, unsigned width) {
    BitVec f = bv_resize(v, width);
    out = out.empty() ? f : bv_concat(out, f);
  }
};

struct Unpacker {
  const BitVec& in;
  unsigned pos = 0;
  BitVec take(unsigned width) {
    BitVec f = bv_slice(in, pos, pos + width - 1);
    pos += width;
    return f;
  }
  void done() const {
    if (pos != in.width()) throw BitVecError("port width mismatch");
  }
};

}  // namespace

BitVec map_instr(const isa::Instruction& in) {
  Packer p;
  for (const BitVec* f : in.fields()) p.put(*f, f->width());
  return p.out;
}

isa::Instruction get_instr(const BitVec& port) {
  isa::Instruction in;
  Unpacker u{port};
  for (BitVec* f : in.fields()) *f = u.take(f->width());
  u.done();
  return in;
}

BitVec map_decode(const isa::DecodeResult& r) { return bv_concat(bv_resize(r.dx, 8), map_instr(r.instr)); }

isa::DecodeResult get_decode(const BitVec& port) {
  return {bv_slice(port, 0, 7), get_instr(bv_slice(port, 8, port.width() - 1))};
}

unsigned exec_width(ucode::UopOpcode op) { return ucode::is_packed(op) ? 256 : 64; }

unsigned exec_input_width(unsigned width) { return 3 * width + 1 + 4 + 2 + 3 + 1 + 64; }

BitVec map_exec(const ExecInputs& in, unsigned width) {
  Packer p;
  p.put(in.src1, width);
  p.put(in.src2, width);
  p.put(in.old_dst, width);
  p.put(in.zf, 1);
  p.put(in.lane_mask, 4);
  p.put(in.predicate, 2);
  p.put(in.flag_mask, 3);
  p.put(in.maskmode, 1);
  p.put(in.undriven, 64);
  return p.out;
}

ExecInputs get_exec(const BitVec& port, unsigned width) {
  Unpacker u{port};
  ExecInputs in;
  in.src1 = u.take(width);
  in.src2 = u.take(width);
  in.old_dst = u.take(width);
  in.zf = u.take(1);
  in.lane_mask = u.take(4);
  in.predicate = u.take(2);
  in.flag_mask = u.take(3);
  in.maskmode = u.take(1);
  in.undriven = u.take(64);
  u.done();
  return in;
}

ExecInputs exec_inputs(const ucode::Uop& uop, const ucode::UopData& d) {
  const unsigned w = exec_width(uop.opcode);
  ExecInputs in;
  in.src1 = bv_resize(d.src1, w);
  in.src2 = bv_resize(d.src2, w);
  in.old_dst = bv_resize(d.old_dst, w);
  in.zf = d.zf;
  in.lane_mask = d.lane_mask;
  in.predicate = BitVec::constant(2, static_cast<unsigned>(uop.predicate));
  in.flag_mask = BitVec::constant(3, uop.flag_mask);
  in.maskmode = uop.maskmode;
  return in;
}

unsigned exec_output_width(unsigned width) { return width + 7; }

BitVec map_outputs(const ExecOutputs& o, unsigned width) {
  Packer p;
  p.put(o.value, width);
  for (const BitVec* b : {&o.zf_en, &o.zf, &o.sf_en, &o.sf, &o.cf_en, &o.cf, &o.taken}) p.put(*b, 1);
  return p.out;
}

ExecOutputs get_outputs(const BitVec& port, unsigned width) {
  Unpacker u{port};
  ExecOutputs o;
  o.value = u.take(width);
  for (BitVec* b : {&o.zf_en, &o.zf, &o.sf_en, &o.sf, &o.cf_en, &o.cf, &o.taken}) *b = u.take(1);
  u.done();
  return o;
}

ucode::UopResults get_results(const ExecOutputs& o, const ucode::Uop& uop) {
  using ucode::UopOpcode;
  ucode::UopResults r;
  r.dst = uop.dst;
  if (uop.opcode == UopOpcode::kNop || uop.opcode == UopOpcode::kHalt) return r;
  if (uop.opcode == UopOpcode::kJe) {
    r.branch_taken = o.taken;
    return r;
  }
  r.value = bv_resize(o.value, ucode::reg_width(uop.dst.cls));
  r.flags.zf = {o.zf_en, o.zf};
  r.flags.sf = {o.sf_en, o.sf};
  r.flags.cf = {o.cf_en, o.cf};
  return r;
}

}  // namespace ucv::design
