#include "ucv/isa/state.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <regex>

namespace ucv::isa {

namespace {

constexpr const char* kGprNames[kNumGprs] = {"RAX", "RCX", "RDX", "RBX", "RSP", "RBP", "RSI", "RDI",
                                             "R8",  "R9",  "R10", "R11", "R12", "R13", "R14", "R15"};

BigUint parse_hex(const std::string& text, unsigned width, const std::string& line) {
  BigUint v;
  try {
    v = BigUint(text);
  } catch (const std::exception&) {
    throw StateFileError("bad value in: " + line);
  }
  if (v != 0 && boost::multiprecision::msb(v) >= width) throw StateFileError("value too wide in: " + line);
  return v;
}

unsigned parse_index(const std::string& text, unsigned bound, const std::string& line) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &used, 0);
  } catch (const std::exception&) {
    throw StateFileError("bad index in: " + line);
  }
  if (used != text.size() || v >= bound) throw StateFileError("index out of range in: " + line);
  return static_cast<unsigned>(v);
}

}  // namespace

const char* gpr_name(unsigned index) { return index < kNumGprs ? kGprNames[index] : "?"; }

const char* exception_name(unsigned code) {
  switch (code) {
    case kExNone: return "none";
    case kExUD: return "#UD";
    case kExGP: return "#GP";
    case kExUnsupported: return "unsupported-variant";
    case kExIncomplete: return "incomplete";
    default: return "?";
  }
}

X86State::X86State() {
  gpr.fill(BitVec::zeros(64));
  zmm.fill(BitVec::zeros(512));
  k.fill(BitVec::zeros(64));
}

X86State parse_state(std::istream& in) {
  static const std::regex kLine(R"(^\s*([A-Z]+)(?:\[([^\]]+)\])?\s*=\s*(0[xX][0-9a-fA-F]+)\s*$)");
  X86State s;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    std::string body = line.substr(0, hash);
    if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!body.empty() && body.back() == '\r') body.pop_back();
    std::smatch m;
    if (!std::regex_match(body, m, kLine)) throw StateFileError("malformed line: " + line);
    const std::string name = m[1], index = m[2], value = m[3];
    const bool indexed = m[2].matched;
    if (name == "IP" && !indexed) {
      s.ip = BitVec::constant(64, parse_hex(value, 64, line));
    } else if ((name == "ZF" || name == "SF" || name == "CF") && !indexed) {
      BitVec bit = BitVec::constant(1, parse_hex(value, 1, line));
      (name == "ZF" ? s.zf : name == "SF" ? s.sf : s.cf) = bit;
    } else if (name == "GPR" && indexed) {
      unsigned r = kNumGprs;
      for (unsigned i = 0; i < kNumGprs; ++i)
        if (index == kGprNames[i]) r = i;
      if (r == kNumGprs) throw StateFileError("unknown register in: " + line);
      s.gpr[r] = BitVec::constant(64, parse_hex(value, 64, line));
    } else if (name == "ZMM" && indexed) {
      s.zmm[parse_index(index, kNumZmms, line)] = BitVec::constant(512, parse_hex(value, 512, line));
    } else if (name == "K" && indexed) {
      s.k[parse_index(index, kNumKs, line)] = BitVec::constant(64, parse_hex(value, 64, line));
    } else if (name == "MEM" && indexed) {
      BigUint addr = parse_hex(index, 64, line);
      s.memory[static_cast<std::uint64_t>(addr)] = BitVec::constant(8, parse_hex(value, 8, line));
    } else {
      throw StateFileError("unknown name in: " + line);
    }
  }
  return s;
}

X86State parse_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StateFileError("cannot open state file: " + path);
  return parse_state(in);
}

void write_state(const X86State& s, std::ostream& out) {
  out << "IP=" << to_hex(s.ip.value(), 64) << "\n";
  for (unsigned i = 0; i < kNumGprs; ++i) out << "GPR[" << kGprNames[i] << "]=" << to_hex(s.gpr[i].value(), 64) << "\n";
  for (unsigned i = 0; i < kNumZmms; ++i) {
    if (s.zmm[i].value() != 0) out << "ZMM[" << i << "]=" << to_hex(s.zmm[i].value(), 512) << "\n";
  }
  for (unsigned i = 0; i < kNumKs; ++i) {
    if (s.k[i].value() != 0) out << "K[" << i << "]=" << to_hex(s.k[i].value(), 64) << "\n";
  }
  out << "ZF=" << to_hex(s.zf.value(), 1) << "\nSF=" << to_hex(s.sf.value(), 1) << "\nCF=" << to_hex(s.cf.value(), 1)
      << "\n";
}

void load_code(X86State& s, std::uint64_t addr, const std::vector<std::uint8_t>& bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i) s.memory[addr + i] = BitVec::constant(8, bytes[i]);
}

X86State symbolic_state(Aig& g, std::string_view prefix) {
  X86State s;
  std::string p(prefix);
  for (unsigned i = 0; i < kNumGprs; ++i) s.gpr[i] = bv_var(g, 64, p + kGprNames[i]);
  for (unsigned i = 0; i < kNumZmms; ++i) s.zmm[i] = bv_var(g, 512, p + "ZMM" + std::to_string(i));
  for (unsigned i = 0; i < kNumKs; ++i) s.k[i] = bv_var(g, 64, p + "K" + std::to_string(i));
  s.zf = bv_var(g, 1, p + "ZF");
  s.sf = bv_var(g, 1, p + "SF");
  s.cf = bv_var(g, 1, p + "CF");
  return s;
}

}  // namespace ucv::isa
