#include "ucv/isa/catalog.hpp"

#include <set>
#include <tuple>

#include "ucv/isa/state.hpp"

namespace ucv::isa {

namespace {

using OS = OperandSource;
using OK = OperandKind;
using EC = ExceptionCondition;

ExceptionSpec lock_ud() { return {EC::kLockPrefix, kExUD, Phase::kDecode, "#UD: if LOCK prefix used"}; }

InstListEntry legacy(std::string mnemonic, std::string variant, OpcodeMap map, unsigned opcode, int digit,
                     std::vector<OperandSpec> ops) {
  InstListEntry e;
  e.mnemonic = std::move(mnemonic);
  e.variant = std::move(variant);
  e.map = map;
  e.opcode = opcode;
  e.group_digit = digit;
  e.operands = std::move(ops);
  e.sizes = {16, 32, 64};
  return e;
}

InstListEntry alu(std::string mnemonic, unsigned opcode) {
  auto e = legacy(std::move(mnemonic), "reg", OpcodeMap::kOneByte, opcode, -1,
                  {{OS::kModrmRm, OK::kGpr}, {OS::kModrmReg, OK::kGpr}});
  e.lockable = true;
  e.exceptions = {{EC::kLockRegisterDest, kExUD, Phase::kDecode, "#UD: if LOCK prefix used with a register destination"}};
  return e;
}

InstListEntry unlockable(InstListEntry e) {
  e.exceptions = {lock_ud()};
  return e;
}

std::vector<InstListEntry> default_entries() {
  std::vector<InstListEntry> t;

  auto shrd_imm = legacy("SHRD", "imm8", OpcodeMap::k0F, 0xAC, -1,
                         {{OS::kModrmRm, OK::kGpr}, {OS::kModrmReg, OK::kGpr}, {OS::kImm8, OK::kImm, 8}});
  shrd_imm.exceptions = {lock_ud(),
                         {EC::kNonCanonicalAddress, kExGP, Phase::kOutOfScope,
                          "#GP(0): if a memory address is in non-canonical form"}};
  t.push_back(shrd_imm);
  auto shrd_cl = legacy("SHRD", "cl", OpcodeMap::k0F, 0xAD, -1,
                        {{OS::kModrmRm, OK::kGpr}, {OS::kModrmReg, OK::kGpr}, {OS::kRegCL, OK::kGpr, 8}});
  shrd_cl.exceptions = shrd_imm.exceptions;
  t.push_back(shrd_cl);

  InstListEntry vp;
  vp.mnemonic = "VPSHRDQ";
  vp.variant = "imm8";
  vp.encoding = Encoding::kEvex;
  vp.map = OpcodeMap::k0F3A;
  vp.opcode = 0x73;
  vp.operands = {{OS::kModrmReg, OK::kZmm}, {OS::kEvexVvvv, OK::kZmm}, {OS::kModrmRm, OK::kZmm}, {OS::kImm8, OK::kImm, 8}};
  vp.sizes = {512};
  vp.evex_class = "E4";
  vp.evex_pp = 1;
  vp.evex_w = 1;
  vp.evex_ll = 2;
  vp.exceptions = {
      {EC::kEvexLegacyPrefix, kExUD, Phase::kDecode, "#UD: if any of 66/F2/F3/F0 or REX precede EVEX"},
      {EC::kEvexReservedBits, kExUD, Phase::kDecode, "#UD: if reserved EVEX payload bits are not as required"},
      {EC::kEvexZeroMaskK0, kExUD, Phase::kDecode, "#UD: if EVEX.z is set and the opmask is k0"},
      {EC::kEvexBroadcastRegister, kExUD, Phase::kDecode, "#UD: if EVEX.b is set on a register form"},
      {EC::kNonCanonicalAddress, kExGP, Phase::kOutOfScope, "#GP(0): if a memory address is in non-canonical form"},
  };
  t.push_back(vp);

  t.push_back(alu("AND", 0x21));
  t.push_back(alu("OR", 0x09));
  t.push_back(alu("XOR", 0x31));
  t.push_back(alu("ADD", 0x01));
  t.push_back(alu("SUB", 0x29));
  t.push_back(unlockable(legacy("MOV", "reg", OpcodeMap::kOneByte, 0x89, -1,
                                {{OS::kModrmRm, OK::kGpr}, {OS::kModrmReg, OK::kGpr}})));
  t.push_back(unlockable(legacy("MOVZX", "reg-r8", OpcodeMap::k0F, 0xB6, -1,
                                {{OS::kModrmReg, OK::kGpr}, {OS::kModrmRm, OK::kGpr, 8}})));
  t.push_back(unlockable(legacy("MOVSX", "reg-r8", OpcodeMap::k0F, 0xBE, -1,
                                {{OS::kModrmReg, OK::kGpr}, {OS::kModrmRm, OK::kGpr, 8}})));
  const std::tuple<const char*, int> shifts[] = {{"SHR", 5}, {"SHL", 4}, {"ROR", 1}};
  for (auto [name, digit] : shifts) {
    t.push_back(unlockable(legacy(name, "imm8", OpcodeMap::kOneByte, 0xC1, digit,
                                  {{OS::kModrmRm, OK::kGpr}, {OS::kImm8, OK::kImm, 8}})));
  }
  return t;
}

}  // namespace

bool InstListEntry::has_exception(ExceptionCondition c) const {
  for (const auto& x : exceptions)
    if (x.condition == c && x.phase == Phase::kDecode) return true;
  return false;
}

bool InstListEntry::has_imm8() const {
  for (const auto& op : operands)
    if (op.source == OperandSource::kImm8) return true;
  return false;
}

std::vector<InstListEntry> build_inst_table(std::vector<InstListEntry> entries) {
  std::set<std::tuple<int, unsigned, unsigned, int>> keys;
  std::set<std::string> names;
  for (unsigned i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    e.id = i;
    auto key = std::make_tuple(static_cast<int>(e.encoding), static_cast<unsigned>(e.map), e.opcode, e.group_digit);
    if (!keys.insert(key).second) throw CatalogError("duplicate opcode key for " + e.mnemonic);
    if (!names.insert(e.mnemonic + "/" + e.variant).second) throw CatalogError("duplicate variant " + e.mnemonic);
    std::set<OperandSource> sources;
    for (const auto& op : e.operands) {
      if (!sources.insert(op.source).second) throw CatalogError("operand source reused in " + e.mnemonic);
    }
  }
  // A group opcode may not also appear ungrouped.
  for (const auto& a : entries)
    for (const auto& b : entries)
      if (a.encoding == b.encoding && a.map == b.map && a.opcode == b.opcode && (a.group_digit < 0) != (b.group_digit < 0))
        throw CatalogError("opcode used both with and without a group digit");
  return entries;
}

const std::vector<InstListEntry>& load_inst_table() {
  static const std::vector<InstListEntry> table = build_inst_table(default_entries());
  return table;
}

const InstListEntry& lookup(std::string_view mnemonic, std::string_view variant) {
  for (const auto& e : load_inst_table()) {
    if (e.mnemonic == mnemonic && (variant.empty() || e.variant == variant)) return e;
  }
  throw CatalogError("no catalog entry for " + std::string(mnemonic));
}

const InstListEntry& entry_by_id(unsigned id) {
  const auto& t = load_inst_table();
  if (id >= t.size()) throw CatalogError("entry id out of range");
  return t[id];
}

std::optional<unsigned> find_entry(Encoding enc, OpcodeMap map, unsigned opcode, unsigned digit) {
  for (const auto& e : load_inst_table()) {
    if (e.encoding != enc || e.map != map || e.opcode != opcode) continue;
    if (e.group_digit < 0 || static_cast<unsigned>(e.group_digit) == digit) return e.id;
  }
  return std::nullopt;
}

bool is_group_opcode(Encoding enc, OpcodeMap map, unsigned opcode) {
  for (const auto& e : load_inst_table()) {
    if (e.encoding == enc && e.map == map && e.opcode == opcode && e.group_digit >= 0) return true;
  }
  return false;
}

std::string variant_id(const InstListEntry& e, unsigned size) {
  if (e.encoding == Encoding::kEvex) return e.mnemonic + "/zmm-" + e.variant;
  std::string base = e.mnemonic + "/reg" + std::to_string(size);
  auto dash = e.variant.find('-');
  if (e.variant == "reg") return base;
  if (dash != std::string::npos) return base + e.variant.substr(dash);
  return base + "-" + e.variant;
}

}  // namespace ucv::isa
