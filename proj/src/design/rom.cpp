#include "ucv/design/rom.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace ucv::design {

namespace {

constexpr unsigned kSizes[] = {8, 16, 32, 64, 256};

std::uint64_t field(std::uint64_t w, unsigned lo, unsigned bits) { return (w >> lo) & ((1ull << bits) - 1); }

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

unsigned parse_hex(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    unsigned long v = std::stoul(s, &used, 16);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw RomError("bad " + what + ": '" + s + "'");
  }
}

const std::map<std::string, unsigned>& named_templates() {
  static const std::map<std::string, unsigned> m = {
      {"ARG0", kTplArg0},   {"ARG1", kTplArg1},   {"ARG2", kTplArg2},   {"ARG0L", kTplArg0L},
      {"ARG0H", kTplArg0H}, {"ARG1L", kTplArg1L}, {"ARG1H", kTplArg1H}, {"ARG2L", kTplArg2L},
      {"ARG2H", kTplArg2H}, {"IMM", kTplImm}};
  return m;
}

struct RowParser {
  RomWord w;
  bool have_small = false;

  unsigned operand(const std::string& tok, unsigned line) {
    static const std::regex greg(R"(G(\d+))"), treg(R"(T(\d+))"), num(R"(-?(0x[0-9A-Fa-f]+|\d+))");
    std::smatch m;
    if (auto it = named_templates().find(tok); it != named_templates().end()) return it->second;
    if (std::regex_match(tok, m, greg) && std::stoul(m[1]) < ucode::kNumG) return kTplG0 + std::stoul(m[1]);
    if (std::regex_match(tok, m, treg) && std::stoul(m[1]) < ucode::kNumT) return kTplT0 + std::stoul(m[1]);
    if (std::regex_match(tok, num)) {
      long long v = std::stoll(tok, nullptr, 0);
      if (v < -32768 || v > 0xFFFF) throw RomError("line " + std::to_string(line) + ": immediate out of range");
      std::uint16_t small = static_cast<std::uint16_t>(v & 0xFFFF);
      bool sext = v < 0;
      if (have_small && (small != w.small_imm || sext != w.imm_sext))
        throw RomError("line " + std::to_string(line) + ": two different immediates in one row");
      have_small = true;
      w.small_imm = small;
      w.imm_sext = sext;
      return kTplSmallImm;
    }
    throw RomError("line " + std::to_string(line) + ": unknown operand '" + tok + "'");
  }
};

struct SourceLine {
  unsigned number;
  std::string text;
  unsigned addr;
};

}  // namespace

std::string template_name(unsigned code) {
  if (code < kTplT0) return "G" + std::to_string(code - kTplG0);
  if (code < kTplArg0) return "T" + std::to_string(code - kTplT0);
  for (const auto& [name, c] : named_templates())
    if (c == code) return name;
  if (code == kTplNone) return "-";
  return "?" + std::to_string(code);
}

std::uint64_t RomWord::pack() const {
  auto check = [](std::uint64_t v, unsigned bits, const char* what) {
    if (v >> bits) throw RomError(std::string("RomWord: field out of range: ") + what);
    return v;
  };
  std::uint64_t w = 0;
  w |= check(opcode, 5, "opcode");
  w |= check(dst, 6, "dst") << 5;
  w |= check(src1, 6, "src1") << 11;
  w |= check(src2, 6, "src2") << 17;
  w |= std::uint64_t(imm_sext) << 23;
  w |= std::uint64_t(small_imm) << 24;
  w |= check(predicate, 2, "predicate") << 40;
  w |= check(ssz_code, 3, "ssz") << 42;
  w |= check(dsz_code, 3, "dsz") << 45;
  w |= check(static_cast<unsigned>(seq), 2, "seq") << 48;
  w |= check(target, ucode::kRomAddrBits, "target") << 50;
  w |= check(flag_mask, 3, "flag mask") << 60;
  return w;
}

RomWord RomWord::unpack(std::uint64_t v) {
  if (field(v, 63, 1)) throw RomError("RomWord: reserved bit set");
  RomWord w;
  w.opcode = static_cast<unsigned>(field(v, 0, 5));
  w.dst = static_cast<unsigned>(field(v, 5, 6));
  w.src1 = static_cast<unsigned>(field(v, 11, 6));
  w.src2 = static_cast<unsigned>(field(v, 17, 6));
  w.imm_sext = field(v, 23, 1) != 0;
  w.small_imm = static_cast<std::uint16_t>(field(v, 24, 16));
  w.predicate = static_cast<unsigned>(field(v, 40, 2));
  w.ssz_code = static_cast<unsigned>(field(v, 42, 3));
  w.dsz_code = static_cast<unsigned>(field(v, 45, 3));
  w.seq = static_cast<SeqControl>(field(v, 48, 2));
  w.target = static_cast<unsigned>(field(v, 50, ucode::kRomAddrBits));
  w.flag_mask = static_cast<unsigned>(field(v, 60, 3));
  if (w.opcode >= ucode::kNumUopOpcodes) throw RomError("RomWord: bad opcode");
  if (w.ssz_code > 4 || w.dsz_code > 4) throw RomError("RomWord: bad size code");
  if (static_cast<unsigned>(w.seq) > 2) throw RomError("RomWord: bad sequencing code");
  if (w.seq != SeqControl::kBranch) w.target = 0;
  return w;
}

unsigned size_code(unsigned bits) {
  for (unsigned i = 0; i < 5; ++i)
    if (kSizes[i] == bits) return i;
  throw RomError("no size code for " + std::to_string(bits) + " bits");
}

unsigned size_bits(unsigned code) {
  if (code > 4) throw RomError("bad size code " + std::to_string(code));
  return kSizes[code];
}

unsigned RomImage::entry(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw RomError("no ROM entry named " + name);
  return it->second;
}

RomWord RomImage::word(unsigned addr) const {
  auto it = words.find(addr);
  if (it == words.end()) throw RomError("unpopulated ROM address " + std::to_string(addr));
  return RomWord::unpack(it->second);
}

void RomImage::validate() const {
  for (const auto& [addr, raw] : words) {
    RomWord w = RomWord::unpack(raw);
    if (w.seq == SeqControl::kBranch && !words.count(w.target))
      throw RomError("branch at " + std::to_string(addr) + " targets an unpopulated address");
  }
  for (const auto& [name, start] : entries) {
    // Depth-first walk; routines are loop-free so a revisit on the current
    // path is an error.
    std::set<unsigned> done;
    std::vector<std::pair<unsigned, std::set<unsigned>>> stack = {{start, {}}};
    while (!stack.empty()) {
      auto [addr, path] = stack.back();
      stack.pop_back();
      if (path.count(addr)) throw RomError("routine " + name + " loops");
      if (done.count(addr)) continue;
      auto it = words.find(addr);
      if (it == words.end()) throw RomError("routine " + name + " runs off the populated ROM");
      done.insert(addr);
      path.insert(addr);
      RomWord w = RomWord::unpack(it->second);
      if (w.seq == SeqControl::kHalt) continue;
      stack.push_back({addr + 1, path});
      if (w.seq == SeqControl::kBranch) stack.push_back({w.target, path});
    }
  }
}

RomImage assemble_rom(const std::string& source) {
  static const std::regex row_re(
      R"(^([A-Z]+)(<(!?ZF|NEVER)>)?\s*(.*?)\s*\(SSZ:(\d+)\s+DSZ:(\d+)\)\s*(\[([A-Z ,]*)\])?\s*(HALT)?$)");
  RomImage img;
  std::vector<SourceLine> rows;
  unsigned addr = 0, number = 0;
  std::stringstream in(source);
  std::string raw;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line[0] == '@') {
      addr = parse_hex(line.substr(1), "origin on line " + std::to_string(number));
      continue;
    }
    if (line.back() == ':') {
      std::string label = trim(line.substr(0, line.size() - 1));
      if (!img.entries.emplace(label, addr).second) throw RomError("duplicate label " + label);
      continue;
    }
    if (addr >= ucode::kHaltAddress) throw RomError("line " + std::to_string(number) + ": ROM full");
    rows.push_back({number, line, addr++});
  }

  for (const auto& row : rows) {
    std::smatch m;
    const std::string where = "line " + std::to_string(row.number);
    if (!std::regex_match(row.text, m, row_re)) throw RomError(where + ": cannot parse '" + row.text + "'");
    auto op = ucode::opcode_from_name(m[1]);
    if (!op) throw RomError(where + ": unknown uop " + m[1].str());
    RowParser p;
    p.w.opcode = static_cast<unsigned>(*op);
    if (m[3].matched) {
      std::string pr = m[3];
      p.w.predicate = pr == "ZF" ? 1 : pr == "!ZF" ? 2 : 3;
    }
    auto ops = split_operands(m[4]);
    if (*op == ucode::UopOpcode::kJe) {
      if (ops.size() != 3) throw RomError(where + ": JE takes src1, src2, target");
      p.w.src1 = p.operand(ops[0], row.number);
      p.w.src2 = p.operand(ops[1], row.number);
      auto t = img.entries.find(ops[2]);
      p.w.target = t != img.entries.end() ? t->second : parse_hex(ops[2], where + " target");
      p.w.seq = SeqControl::kBranch;
    } else if (*op == ucode::UopOpcode::kNop || *op == ucode::UopOpcode::kHalt) {
      if (!ops.empty()) throw RomError(where + ": " + m[1].str() + " takes no operands");
    } else {
      if (*op == ucode::UopOpcode::kPorq) {
        if (ops.size() != 5 || ops[3] != "MASKMODE" || ops[4] != "OPMSK")
          throw RomError(where + ": PORQ takes dst, src1, src2, MASKMODE, OPMSK");
        ops.resize(3);
      }
      if (ops.empty() || ops.size() > 3) throw RomError(where + ": expected dst and up to two sources");
      p.w.dst = p.operand(ops[0], row.number);
      if (p.w.dst == kTplImm || p.w.dst == kTplSmallImm) throw RomError(where + ": immediate destination");
      if (ops.size() > 1) p.w.src1 = p.operand(ops[1], row.number);
      if (ops.size() > 2) p.w.src2 = p.operand(ops[2], row.number);
    }
    if ((p.w.src1 == kTplImm || p.w.src2 == kTplImm) && p.have_small)
      throw RomError(where + ": side immediate and small immediate in one row");
    p.w.ssz_code = size_code(static_cast<unsigned>(std::stoul(m[5])));
    p.w.dsz_code = size_code(static_cast<unsigned>(std::stoul(m[6])));
    if (m[8].matched) {
      std::stringstream fl(std::regex_replace(m[8].str(), std::regex(","), " "));
      std::string f;
      while (fl >> f) {
        if (f == "ZF") p.w.flag_mask |= ucode::kFlagZF;
        else if (f == "SF") p.w.flag_mask |= ucode::kFlagSF;
        else if (f == "CF") p.w.flag_mask |= ucode::kFlagCF;
        else throw RomError(where + ": unknown flag " + f);
      }
    }
    if (m[9].matched) {
      if (p.w.seq == SeqControl::kBranch) throw RomError(where + ": a branch row cannot halt");
      p.w.seq = SeqControl::kHalt;
    }
    img.words[row.addr] = p.w.pack();
  }
  img.validate();
  return img;
}

RomImage load_rom_source(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw RomError("cannot open routine source " + path);
  std::stringstream s;
  s << f.rdbuf();
  return assemble_rom(s.str());
}

std::string disassemble(const RomWord& w, const RomImage* image) {
  auto op = static_cast<ucode::UopOpcode>(w.opcode);
  std::ostringstream s;
  s << ucode::opcode_name(op);
  static const char* preds[] = {"", "<ZF>", "<!ZF>", "<NEVER>"};
  s << preds[w.predicate];
  auto operand = [&](unsigned t) {
    if (t != kTplSmallImm) return template_name(t);
    long long v = w.imm_sext ? static_cast<std::int16_t>(w.small_imm) : w.small_imm;
    return std::to_string(v);
  };
  std::vector<std::string> ops;
  if (op == ucode::UopOpcode::kJe) {
    ops = {operand(w.src1), operand(w.src2)};
    std::string target;
    if (image)
      for (const auto& [name, a] : image->entries)
        if (a == w.target) target = name;
    if (target.empty()) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%03X", w.target);
      target = buf;
    }
    ops.push_back(target);
  } else if (op != ucode::UopOpcode::kNop && op != ucode::UopOpcode::kHalt) {
    for (unsigned t : {w.dst, w.src1, w.src2})
      if (t != kTplNone) ops.push_back(operand(t));
    if (op == ucode::UopOpcode::kPorq) {
      ops.push_back("MASKMODE");
      ops.push_back("OPMSK");
    }
  }
  for (std::size_t i = 0; i < ops.size(); ++i) s << (i ? ", " : " ") << ops[i];
  s << " (SSZ:" << size_bits(w.ssz_code) << " DSZ:" << size_bits(w.dsz_code) << ")";
  if (w.flag_mask) {
    std::vector<std::string> fl;
    if (w.flag_mask & ucode::kFlagZF) fl.push_back("ZF");
    if (w.flag_mask & ucode::kFlagSF) fl.push_back("SF");
    if (w.flag_mask & ucode::kFlagCF) fl.push_back("CF");
    s << " [";
    for (std::size_t i = 0; i < fl.size(); ++i) s << (i ? " " : "") << fl[i];
    s << "]";
  }
  if (w.seq == SeqControl::kHalt) s << " HALT";
  return s.str();
}

std::string write_rom_image(const RomImage& image) {
  std::ostringstream s;
  char buf[64];
  for (const auto& [name, addr] : image.entries) {
    std::snprintf(buf, sizeof buf, "%03X", addr);
    s << "# entry " << name << " " << buf << "\n";
  }
  for (const auto& [addr, word] : image.words) {
    std::snprintf(buf, sizeof buf, "@%03X %016llX\n", addr, static_cast<unsigned long long>(word));
    s << buf;
  }
  return s.str();
}

RomImage parse_rom_image(const std::string& text) {
  static const std::regex entry_re(R"(^#\s*entry\s+(\S+)\s+([0-9A-Fa-f]+)$)");
  static const std::regex word_re(R"(^@([0-9A-Fa-f]+)\s+([0-9A-Fa-f]{16})$)");
  RomImage img;
  std::stringstream in(text);
  std::string raw;
  unsigned number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw);
    std::smatch m;
    if (line.empty()) continue;
    if (std::regex_match(line, m, entry_re)) {
      img.entries[m[1]] = parse_hex(m[2], "entry address");
    } else if (std::regex_match(line, m, word_re)) {
      std::uint64_t w = std::stoull(m[2].str(), nullptr, 16);
      RomWord::unpack(w);
      img.words[parse_hex(m[1], "address")] = w;
    } else if (line[0] != '#') {
      throw RomError("ROM image line " + std::to_string(number) + ": cannot parse '" + line + "'");
    }
  }
  img.validate();
  return img;
}

std::string default_routine_path() {
  if (const char* p = std::getenv("UCV_ROUTINES")) return p;
  return std::string(UCV_DATA_DIR) + "/routines.usrc";
}

const RomImage& default_rom() {
  static const RomImage rom = load_rom_source(default_routine_path());
  return rom;
}

}  // namespace ucv::design
