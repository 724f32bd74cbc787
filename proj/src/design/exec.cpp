#include "ucv/design/exec.hpp"

#include <algorithm>

namespace ucv::design {

namespace {

using ucode::UopOpcode;
using Wires = std::vector<BitVec>;  // one 1-bit signal per wire

BitVec zero() { return bv_false(); }
BitVec g_and(const BitVec& a, const BitVec& b) { return bv_and(a, b); }
BitVec g_or(const BitVec& a, const BitVec& b) { return bv_or(a, b); }
BitVec g_xor(const BitVec& a, const BitVec& b) { return bv_xor(a, b); }
BitVec g_not(const BitVec& a) { return bv_not(a); }
BitVec g_mux(const BitVec& s, const BitVec& a, const BitVec& b) { return g_or(g_and(s, a), g_and(g_not(s), b)); }

Wires wires(const BitVec& v, unsigned lo = 0, unsigned n = 0) {
  if (n == 0) n = v.width() - lo;
  Wires w;
  for (unsigned i = 0; i < n; ++i) w.push_back(bv_slice(v, lo + i, lo + i));
  return w;
}

BitVec bus(const Wires& w, unsigned width) {
  BitVec out = w.empty() ? zero() : w[0];
  for (unsigned i = 1; i < width; ++i) out = bv_concat(out, i < w.size() ? w[i] : zero());
  return out;
}

Wires zeros(unsigned n) { return Wires(n, zero()); }

// Keeps the low `n` wires of `x`, padding or clearing the rest up to `width`.
Wires keep(const Wires& x, unsigned n, unsigned width) {
  Wires out = zeros(width);
  for (unsigned i = 0; i < std::min<std::size_t>(n, x.size()); ++i) out[i] = x[i];
  return out;
}

BitVec or_tree(Wires x) {
  if (x.empty()) return zero();
  while (x.size() > 1) {
    Wires next;
    for (std::size_t i = 0; i + 1 < x.size(); i += 2) next.push_back(g_or(x[i], x[i + 1]));
    if (x.size() % 2) next.push_back(x.back());
    x = std::move(next);
  }
  return x[0];
}

struct AdderOut {
  Wires sum;
  Wires carry;  // carry[i] enters bit i; carry[n] leaves the top
};

AdderOut ripple(const Wires& a, const Wires& b, const BitVec& cin) {
  AdderOut r;
  r.carry.push_back(cin);
  for (std::size_t i = 0; i < a.size(); ++i) {
    BitVec p = g_xor(a[i], b[i]);
    r.sum.push_back(g_xor(p, r.carry[i]));
    r.carry.push_back(g_or(g_and(a[i], b[i]), g_and(r.carry[i], p)));
  }
  return r;
}

// Barrel shifters: one mux rank per count bit.
Wires shr_ladder(Wires x, const Wires& count) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < count.size(); ++k) {
    const std::size_t s = std::size_t{1} << k;
    Wires y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = g_mux(count[k], i + s < n ? x[i + s] : zero(), x[i]);
    x = std::move(y);
  }
  return x;
}

Wires shl_ladder(Wires x, const Wires& count) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < count.size(); ++k) {
    const std::size_t s = std::size_t{1} << k;
    Wires y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = g_mux(count[k], i >= s ? x[i - s] : zero(), x[i]);
    x = std::move(y);
  }
  return x;
}

Wires ror_ladder(Wires x, const Wires& count) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < count.size(); ++k) {
    const std::size_t s = (std::size_t{1} << k) % n;
    Wires y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = g_mux(count[k], x[(i + s) % n], x[i]);
    x = std::move(y);
  }
  return x;
}

// Predicate decode: 0 always, 1 ZF, 2 !ZF, 3 never.
BitVec predicate_ok(const BitVec& pred, const BitVec& zf) {
  BitVec p0 = bv_slice(pred, 0, 0), p1 = bv_slice(pred, 1, 1);
  BitVec always = g_and(g_not(p1), g_not(p0));
  BitVec on_zf = g_and(g_and(g_not(p1), p0), zf);
  BitVec on_nzf = g_and(g_and(p1, g_not(p0)), g_not(zf));
  return g_or(always, g_or(on_zf, on_nzf));
}

Wires select_wires(const BitVec& ok, const Wires& a, const Wires& b) {
  Wires out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = g_mux(ok, a[i], b[i]);
  return out;
}

BitVec scalar_unit(UopOpcode op, const BitVec& port, const CircuitParams& p, const BugRegistry& bugs) {
  constexpr unsigned W = 64;
  ExecInputs in = get_exec(port, W);
  const unsigned ssz = p.ssz, dsz = p.dsz;
  const BitVec& src2 = op == UopOpcode::kAnd && bugs.enabled(kBugDontCareSrc2) ? in.undriven : in.src2;
  Wires a = keep(wires(in.src1), ssz, W), b = keep(wires(src2), ssz, W);
  BitVec ok = predicate_ok(in.predicate, in.zf);

  ExecOutputs out;
  out.value = BitVec::zeros(W);
  if (op == UopOpcode::kJe) {
    Wires diff;
    for (unsigned i = 0; i < ssz; ++i) diff.push_back(g_xor(a[i], b[i]));
    out.taken = g_and(ok, g_not(or_tree(diff)));
    return map_outputs(out, W);
  }

  Wires r = zeros(W);
  BitVec writes = bv_true(), carry = zero();
  bool arith_flags = true, carry_flag = true;
  Wires count(b.begin(), b.begin() + (ssz == 64 ? 6 : 5));
  switch (op) {
    case UopOpcode::kAnd:
    case UopOpcode::kOr:
    case UopOpcode::kXor:
      for (unsigned i = 0; i < ssz; ++i)
        r[i] = op == UopOpcode::kAnd ? g_and(a[i], b[i]) : op == UopOpcode::kOr ? g_or(a[i], b[i]) : g_xor(a[i], b[i]);
      break;
    case UopOpcode::kSub: {
      Wires x(a.begin(), a.begin() + ssz), nb;
      for (unsigned i = 0; i < ssz; ++i) nb.push_back(g_not(b[i]));
      AdderOut s = ripple(x, nb, bv_true());
      for (unsigned i = 0; i < ssz; ++i) r[i] = s.sum[i];
      carry = g_not(s.carry[ssz]);
      break;
    }
    case UopOpcode::kMov:
    case UopOpcode::kMovzx:
      r = a;
      arith_flags = carry_flag = false;
      break;
    case UopOpcode::kMovsx:
      for (unsigned i = 0; i < W; ++i) r[i] = i < ssz ? a[i] : a[ssz - 1];
      arith_flags = carry_flag = false;
      break;
    case UopOpcode::kShr: {
      writes = or_tree(count);
      r = shr_ladder(a, count);
      Wires shifted_in = {zero()};
      shifted_in.insert(shifted_in.end(), a.begin(), a.end());
      carry = shr_ladder(shifted_in, count)[0];
      break;
    }
    case UopOpcode::kShl: {
      writes = or_tree(count);
      r = keep(shl_ladder(Wires(a.begin(), a.begin() + ssz), count), ssz, W);
      carry = shl_ladder(keep(a, ssz, ssz + W), count)[ssz];
      break;
    }
    case UopOpcode::kRor: {
      writes = or_tree(count);
      Wires rot = ror_ladder(Wires(a.begin(), a.begin() + ssz), count);
      r = keep(rot, ssz, W);
      carry = rot[ssz - 1];
      arith_flags = false;
      break;
    }
    default:
      throw std::logic_error("scalar_unit: not a scalar uop");
  }
  r = keep(r, dsz, W);
  Wires result_bits(r.begin(), r.begin() + dsz);

  BitVec fm_zf = bv_slice(in.flag_mask, 0, 0), fm_sf = bv_slice(in.flag_mask, 1, 1),
         fm_cf = bv_slice(in.flag_mask, 2, 2);
  BitVec live = g_and(ok, writes);
  if (arith_flags) {
    out.zf_en = g_and(fm_zf, live);
    out.zf = g_not(or_tree(result_bits));
    out.sf_en = g_and(fm_sf, live);
    out.sf = r[dsz - 1];
  }
  if (carry_flag) {
    out.cf_en = g_and(fm_cf, live);
    out.cf = carry;
  }
  out.value = bus(select_wires(ok, r, wires(in.old_dst)), W);
  return map_outputs(out, W);
}

BitVec packed_unit(UopOpcode op, const BitVec& port, const BugRegistry&) {
  constexpr unsigned W = 256;
  ExecInputs in = get_exec(port, W);
  BitVec ok = predicate_ok(in.predicate, in.zf);
  Wires v;
  for (unsigned lane = 0; lane < 4; ++lane) {
    Wires a = wires(in.src1, 64 * lane, 64), b = wires(in.src2, 64 * lane, 64);
    Wires old = wires(in.old_dst, 64 * lane, 64);
    Wires out;
    switch (op) {
      case UopOpcode::kDlshftcnt: {
        // 64 - m as a 7-bit quantity: two's complement of m in six bits,
        // with bit 6 set only for m = 0.
        Wires m = wires(in.src1, 0, 6), nm;
        for (auto& w : m) nm.push_back(g_not(w));
        out = ripple(nm, zeros(6), bv_true()).sum;
        out.push_back(g_not(or_tree(m)));
        out = keep(out, 7, 64);
        break;
      }
      case UopOpcode::kPsrlq:
        out = shr_ladder(a, wires(in.src2, 0, 6));
        break;
      case UopOpcode::kPsllvq: {
        BitVec big = or_tree(Wires(b.begin() + 6, b.end()));
        out = shl_ladder(a, Wires(b.begin(), b.begin() + 6));
        for (auto& w : out) w = g_and(w, g_not(big));
        break;
      }
      case UopOpcode::kPorq: {
        BitVec active = bv_slice(in.lane_mask, lane, lane);
        BitVec keep_old = g_and(g_not(active), g_not(in.maskmode));
        for (unsigned i = 0; i < 64; ++i) out.push_back(g_or(g_and(g_or(a[i], b[i]), active), g_and(old[i], keep_old)));
        break;
      }
      default:
        throw std::logic_error("packed_unit: not a packed uop");
    }
    Wires sel = select_wires(ok, out, old);
    v.insert(v.end(), sel.begin(), sel.end());
  }
  ExecOutputs o;
  o.value = bus(v, W);
  return map_outputs(o, W);
}

}  // namespace

const ExecCircuits& build_exec_circuits() {
  static const ExecCircuits circuits = [] {
    ExecCircuits m;
    for (unsigned i = 0; i < ucode::kNumUopOpcodes; ++i) {
      auto op = static_cast<UopOpcode>(i);
      if (op == UopOpcode::kNop || op == UopOpcode::kHalt) continue;
      ExecCircuit c;
      c.opcode = op;
      c.latency = uop_latency(op);
      c.width = exec_width(op);
      if (ucode::is_packed(op)) {
        c.eval = [op](const BitVec& in, const CircuitParams&, const BugRegistry& bugs) {
          return packed_unit(op, in, bugs);
        };
      } else {
        c.eval = [op](const BitVec& in, const CircuitParams& p, const BugRegistry& bugs) {
          return scalar_unit(op, in, p, bugs);
        };
      }
      m[op] = c;
    }
    return m;
  }();
  return circuits;
}

ucode::UopResults dut_exec(const ucode::Uop& uop, const ucode::UopData& data, const BugRegistry& bugs,
                           const std::optional<BitVec>& undriven) {
  if (uop.opcode == UopOpcode::kNop || uop.opcode == UopOpcode::kHalt) {
    ucode::UopResults r;
    r.dst = uop.dst;
    return r;
  }
  const auto& circuits = build_exec_circuits();
  auto it = circuits.find(uop.opcode);
  if (it == circuits.end()) throw std::invalid_argument(std::string("no circuit for ") + ucode::opcode_name(uop.opcode));
  const ExecCircuit& c = it->second;
  ExecInputs in = exec_inputs(uop, data);
  if (undriven) in.undriven = bv_resize(*undriven, 64);
  BitVec out = c.eval(map_exec(in, c.width), {uop.ssz, uop.dsz}, bugs);
  return get_results(get_outputs(out, c.width), uop);
}

unsigned uop_latency(UopOpcode op) {
  switch (op) {
    case UopOpcode::kSub: return 3;
    case UopOpcode::kShr:
    case UopOpcode::kShl:
    case UopOpcode::kRor:
    case UopOpcode::kDlshftcnt:
    case UopOpcode::kPsrlq:
    case UopOpcode::kPsllvq:
    case UopOpcode::kPorq: return 2;
    default: return 1;
  }
}

ScheduleCheck check_dispatch_schedule(const std::vector<Dispatch>& d) {
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      if (d[i].cycle + d[i].latency == d[j].cycle + d[j].latency) return {false, d[i].cycle + d[i].latency, i, j};
  return {};
}

ScheduleCheck check_dispatch_schedule(const std::vector<std::pair<unsigned, UopOpcode>>& d) {
  std::vector<Dispatch> out;
  for (const auto& [cycle, op] : d) out.push_back({cycle, uop_latency(op)});
  return check_dispatch_schedule(out);
}

}  // namespace ucv::design
