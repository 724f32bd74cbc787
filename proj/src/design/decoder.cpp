#include "ucv/design/decoder.hpp"

#include <array>
#include <optional>

namespace ucv::design {

namespace {

// Opcode spaces: legacy one-byte, 0F, 0F38, 0F3A, then EVEX maps 1..3.
enum Space : unsigned { kOneByte = 0, k0F = 1, k0F38 = 2, k0F3A = 3, kEvexBase = 4 };

enum RowFlag : unsigned {
  kImm8 = 1u << 0,
  kLockAlways = 1u << 1,  // LOCK is #UD for every form
  kLockRegDst = 1u << 2,  // LOCK is #UD when the destination is a register
  kRm8 = 1u << 3,         // r/m operand is a byte register
  kCl = 1u << 4,          // third operand is CL
  kRegFirst = 1u << 5,    // ModR/M.reg is the first operand
  kNoReg = 1u << 6,       // ModR/M.reg is an opcode extension
};

struct OpRow {
  unsigned space;
  unsigned opcode;
  int digit;
  unsigned id;
  unsigned flags;
  unsigned evex_pp = 0, evex_w = 0, evex_ll = 0;
};

constexpr OpRow kRows[] = {
    {k0F, 0xAC, -1, 0, kImm8 | kLockAlways},
    {k0F, 0xAD, -1, 1, kCl | kLockAlways},
    {kEvexBase + 3, 0x73, -1, 2, kImm8 | kRegFirst, 1, 1, 2},
    {kOneByte, 0x21, -1, 3, kLockRegDst},
    {kOneByte, 0x09, -1, 4, kLockRegDst},
    {kOneByte, 0x31, -1, 5, kLockRegDst},
    {kOneByte, 0x01, -1, 6, kLockRegDst},
    {kOneByte, 0x29, -1, 7, kLockRegDst},
    {kOneByte, 0x89, -1, 8, kLockAlways},
    {k0F, 0xB6, -1, 9, kRegFirst | kRm8 | kLockAlways},
    {k0F, 0xBE, -1, 10, kRegFirst | kRm8 | kLockAlways},
    {kOneByte, 0xC1, 5, 11, kNoReg | kImm8 | kLockAlways},
    {kOneByte, 0xC1, 4, 12, kNoReg | kImm8 | kLockAlways},
    {kOneByte, 0xC1, 1, 13, kNoReg | kImm8 | kLockAlways},
};

bool is_group(unsigned space, unsigned opcode) {
  for (const auto& r : kRows)
    if (r.space == space && r.opcode == opcode && r.digit >= 0) return true;
  return false;
}

const OpRow* find_row(unsigned space, unsigned opcode, int digit) {
  for (const auto& r : kRows)
    if (r.space == space && r.opcode == opcode && r.digit == digit) return &r;
  return nullptr;
}

enum ByteClass : std::uint8_t { kPlain, kLock, kOpsize, kRepne, kRep, kSegment, kRex, kEscape, kEvex };

const std::array<ByteClass, 256>& byte_classes() {
  static const std::array<ByteClass, 256> table = [] {
    std::array<ByteClass, 256> t{};
    t.fill(kPlain);
    for (unsigned b = 0x40; b <= 0x4F; ++b) t[b] = kRex;
    for (unsigned b : {0x2E, 0x36, 0x3E, 0x26, 0x64, 0x65}) t[b] = kSegment;
    t[0xF0] = kLock;
    t[0x66] = kOpsize;
    t[0xF2] = kRepne;
    t[0xF3] = kRep;
    t[0x0F] = kEscape;
    t[0x62] = kEvex;
    return t;
  }();
  return table;
}

BitVec bit(const BitVec& v, unsigned i) { return bv_slice(v, i, i); }
BitVec g_and(const BitVec& a, const BitVec& b) { return bv_and(a, b); }
BitVec g_or(const BitVec& a, const BitVec& b) { return bv_or(a, b); }
BitVec g_not(const BitVec& a) { return bv_not(a); }

BitVec join(std::initializer_list<BitVec> lsb_first) {
  BitVec out;
  for (const auto& p : lsb_first) out = out.empty() ? p : bv_concat(out, p);
  return out;
}

unsigned concrete(const BitVec& v, unsigned lo, unsigned hi, const char* what) {
  BitVec s = bv_slice(v, lo, hi);
  if (!s.is_concrete()) throw isa::SymbolicBranchError(std::string("dut_decode: symbolic ") + what);
  return static_cast<unsigned>(s.u64());
}

isa::DecodeResult faulted(unsigned code) { return {BitVec::constant(8, code), isa::Instruction{}}; }

// Clears every field unless `ok` holds.
isa::Instruction gate(isa::Instruction in, const BitVec& ok) {
  for (BitVec* f : in.fields()) *f = g_and(*f, bv_sext(ok, f->width()));
  return in;
}

class Machine {
 public:
  Machine(std::span<const BitVec> bytes, const BugRegistry& bugs) : bytes_(bytes), bugs_(bugs) {}

  isa::DecodeResult run() {
    enum class Phase { kPrefix, kEscape, kOpcode3, kLookup, kEvex } phase = Phase::kPrefix;
    unsigned space = kOneByte, opcode = 0;
    for (;;) {
      switch (phase) {
        case Phase::kPrefix: {
          const BitVec* b = take();
          if (!b) return faulted(stop_);
          if (concrete(*b, 4, 7, "prefix byte") == 4) {
            rex_ = true;
            rex_bits_ = bv_slice(*b, 0, 3);
            break;
          }
          unsigned v = concrete(*b, 0, 7, "prefix byte");
          ByteClass c = byte_classes()[v];
          if (c >= kLock && c <= kSegment) {
            rex_ = false;
            rex_bits_ = BitVec::zeros(4);
            if (c != kSegment) prefix_mask_ |= 1u << (c - kLock);
            break;
          }
          if (c == kEscape) phase = Phase::kEscape;
          else if (c == kEvex) phase = Phase::kEvex;
          else {
            opcode = v;
            phase = Phase::kLookup;
          }
          break;
        }
        case Phase::kEscape: {
          const BitVec* b = take();
          if (!b) return faulted(stop_);
          unsigned v = concrete(*b, 0, 7, "opcode byte");
          space = k0F;
          if (v == 0x38 || v == 0x3A) {
            space = v == 0x38 ? k0F38 : k0F3A;
            phase = Phase::kOpcode3;
          } else {
            opcode = v;
            phase = Phase::kLookup;
          }
          break;
        }
        case Phase::kOpcode3: {
          const BitVec* b = take();
          if (!b) return faulted(stop_);
          opcode = concrete(*b, 0, 7, "opcode byte");
          phase = Phase::kLookup;
          break;
        }
        case Phase::kLookup: return legacy(space, opcode);
        case Phase::kEvex: return evex();
      }
    }
  }

 private:
  const BitVec* take() {
    if (pos_ >= isa::kMaxInstructionLength) {
      stop_ = isa::kExUD;
      return nullptr;
    }
    if (pos_ >= bytes_.size()) {
      stop_ = isa::kExIncomplete;
      return nullptr;
    }
    return &bytes_[pos_++];
  }

  isa::DecodeResult legacy(unsigned space, unsigned opcode) {
    const BitVec* modrm = nullptr;
    const OpRow* row = nullptr;
    if (is_group(space, opcode)) {
      modrm = take();
      if (!modrm) return faulted(stop_);
      row = find_row(space, opcode, static_cast<int>(concrete(*modrm, 3, 5, "ModR/M.reg")));
    } else {
      row = find_row(space, opcode, -1);
    }
    if (!row) return faulted(isa::kExUD);
    if (!modrm) {
      modrm = take();
      if (!modrm) return faulted(stop_);
    }

    const bool lock = prefix_mask_ & 1;
    BitVec reg_form = g_and(bit(*modrm, 6), bit(*modrm, 7));
    BitVec lock_ud = bv_false();
    if (lock && (row->flags & kLockAlways)) lock_ud = bv_true();
    if (lock && (row->flags & kLockRegDst)) lock_ud = reg_form;

    BitVec mod = bv_slice(*modrm, 6, 7);
    if (mod.is_concrete() && mod.u64() != 3) return faulted(lock_ud.is_true() ? isa::kExUD : isa::kExUnsupported);

    BitVec imm = BitVec::zeros(8);
    if (row->flags & kImm8) {
      const BitVec* ib = take();
      if (!ib) return faulted(stop_);
      imm = *ib;
    }

    BitVec no_lock = g_not(lock_ud);
    BitVec memory = g_and(no_lock, g_not(reg_form));
    // #UD = 0x06 and unsupported = 0x80 share no bits.
    BitVec dx = join({bv_false(), lock_ud, lock_ud, BitVec::zeros(4), memory});

    BitVec W = bit(rex_bits_, 3), R = bit(rex_bits_, 2), B = bit(rex_bits_, 0);
    const bool p66 = prefix_mask_ & 2;
    BitVec narrow = g_not(W);
    BitVec size = join({BitVec::zeros(4), g_and(narrow, p66 ? bv_true() : bv_false()),
                        g_and(narrow, p66 ? bv_false() : bv_true()), W, BitVec::zeros(3)});
    BitVec reg = join({bv_slice(*modrm, 3, 5), R, bv_false()});
    BitVec rm = join({bv_slice(*modrm, 0, 2), B, bv_false()});

    isa::Instruction in;
    in.entry = BitVec::constant(8, row->id);
    in.size = size;
    if (row->flags & kRegFirst) {
      in.op1 = reg;
      in.op2 = rm;
    } else {
      in.op1 = rm;
      if (!(row->flags & kNoReg)) in.op2 = reg;
    }
    if (row->flags & kCl) in.op3 = BitVec::constant(5, isa::RCX);
    if (row->flags & kImm8) in.imm = imm;
    if ((row->flags & kRm8) && !rex_) in.high8 = bit(*modrm, 2);
    in.length = BitVec::constant(4, pos_);
    in.prefixes = BitVec::constant(4, prefix_mask_ & 0xF);
    return {dx, gate(in, g_and(no_lock, reg_form))};
  }

  isa::DecodeResult evex() {
    const BitVec* p[3];
    for (auto& b : p) {
      b = take();
      if (!b) return faulted(stop_);
    }
    const BitVec &p0 = *p[0], &p1 = *p[1], &p2 = *p[2];
    unsigned map = concrete(p0, 0, 1, "EVEX map");
    const BitVec* ob = take();
    if (!ob) return faulted(stop_);
    unsigned opcode = concrete(*ob, 0, 7, "EVEX opcode");
    if (map == 0) return faulted(isa::kExUD);
    const OpRow* row = find_row(kEvexBase + map, opcode, -1);
    if (!row) return faulted(isa::kExUD);
    const BitVec* modrm = take();
    if (!modrm) return faulted(stop_);
    BitVec imm = BitVec::zeros(8);
    if (row->flags & kImm8) {
      const BitVec* ib = take();
      if (!ib) return faulted(stop_);
      imm = *ib;
    }

    auto is = [](const BitVec& b, unsigned v) { return v ? b : g_not(b); };
    BitVec match = g_and(g_and(is(bit(p1, 0), row->evex_pp & 1), is(bit(p1, 1), row->evex_pp >> 1)),
                         g_and(is(bit(p1, 7), row->evex_w),
                               g_and(is(bit(p2, 5), row->evex_ll & 1), is(bit(p2, 6), row->evex_ll >> 1))));
    BitVec reg_form = g_and(bit(*modrm, 6), bit(*modrm, 7));
    BitVec aaa_zero = g_not(g_or(bit(p2, 0), g_or(bit(p2, 1), bit(p2, 2))));
    BitVec illegal = (prefix_mask_ & 0xF) || rex_ ? bv_true() : bv_false();
    illegal = g_or(illegal, g_or(g_or(bit(p0, 2), bit(p0, 3)), g_not(bit(p1, 2))));
    if (!bugs_.enabled(kBugMissingEvexException)) illegal = g_or(illegal, g_and(bit(p2, 7), aaa_zero));
    illegal = g_or(illegal, g_and(bit(p2, 4), reg_form));

    BitVec ud = g_or(g_not(match), illegal);
    BitVec memory = g_and(g_not(ud), g_not(reg_form));
    BitVec dx = join({bv_false(), ud, ud, BitVec::zeros(4), memory});

    isa::Instruction in;
    in.entry = BitVec::constant(8, row->id);
    in.size = BitVec::constant(10, 512);
    in.op1 = join({bv_slice(*modrm, 3, 5), g_not(bit(p0, 7)), g_not(bit(p0, 4))});
    in.op2 = join({g_not(bv_slice(p1, 3, 6)), g_not(bit(p2, 3))});
    in.op3 = join({bv_slice(*modrm, 0, 2), g_not(bit(p0, 5)), g_not(bit(p0, 6))});
    in.imm = imm;
    in.opmask = bv_slice(p2, 0, 2);
    in.zeroing = bit(p2, 7);
    in.length = BitVec::constant(4, pos_);
    return {dx, gate(in, g_and(g_not(ud), reg_form))};
  }

  std::span<const BitVec> bytes_;
  const BugRegistry& bugs_;
  unsigned pos_ = 0;
  unsigned stop_ = 0;
  unsigned prefix_mask_ = 0;  // F0, 66, F2, F3
  bool rex_ = false;
  BitVec rex_bits_ = BitVec::zeros(4);
};

}  // namespace

BitVec dut_decode_port(std::span<const BitVec> bytes, const isa::Config& config, const BugRegistry& bugs) {
  if (config.mode != 64) throw std::invalid_argument("dut_decode: only 64-bit mode is modelled");
  for (const auto& b : bytes)
    if (b.width() != 8) throw BitVecError("dut_decode: bytes must be 8 bits wide");
  return map_decode(Machine(bytes, bugs).run());
}

isa::DecodeResult dut_decode(std::span<const BitVec> bytes, const isa::Config& config, const BugRegistry& bugs) {
  return get_decode(dut_decode_port(bytes, config, bugs));
}

isa::DecodeResult dut_decode(const std::vector<std::uint8_t>& bytes, const isa::Config& config,
                             const BugRegistry& bugs) {
  auto bvs = isa::bytes_of(bytes);
  return dut_decode(std::span<const BitVec>(bvs), config, bugs);
}

}  // namespace ucv::design
