#include "ucv/prover/session.hpp"

#include <chrono>
#include <random>
#include <sstream>

namespace ucv::prover {

namespace {

std::string seconds_text(double s) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << s << " s";
  return os.str();
}

std::string verdict_text(const ObligationResult& r) {
  if (!r.error.empty()) return r.verdict == ProofVerdict::kCounterexample ? "counterexample" : "refused";
  return to_string(r.verdict);
}

BigUint random_bits(std::mt19937_64& rng, unsigned width) {
  BigUint v = 0;
  for (unsigned i = 0; i < width; i += 64) v |= BigUint(rng()) << i;
  return v & ((BigUint(1) << width) - 1);
}

isa::X86State random_state(std::mt19937_64& rng) {
  isa::X86State s;
  s.ip = BitVec::constant(64, 0x1000);
  for (auto& r : s.gpr) r = BitVec::constant(64, random_bits(rng, 64));
  for (auto& r : s.zmm) r = BitVec::constant(512, random_bits(rng, 512));
  for (auto& r : s.k) r = BitVec::constant(64, random_bits(rng, 8));
  s.zf = BitVec::constant(1, rng() & 1);
  s.sf = BitVec::constant(1, rng() & 1);
  s.cf = BitVec::constant(1, rng() & 1);
  return s;
}

// First architectural difference between two concrete states.
std::optional<std::string> state_difference(const isa::X86State& a, const isa::X86State& b) {
  for (unsigned i = 0; i < isa::kNumGprs; ++i)
    if (a.gpr[i].value() != b.gpr[i].value()) return std::string(isa::gpr_name(i));
  for (unsigned i = 0; i < isa::kNumZmms; ++i)
    if (a.zmm[i].value() != b.zmm[i].value()) return "ZMM" + std::to_string(i);
  if (a.zf.value() != b.zf.value()) return "ZF";
  if (a.sf.value() != b.sf.value()) return "SF";
  if (a.cf.value() != b.cf.value()) return "CF";
  if (a.ip.value() != b.ip.value()) return "IP";
  if (a.fault.value() != b.fault.value()) return "fault";
  return std::nullopt;
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string Certificate::text() const {
  std::ostringstream os;
  os << "certificate: " << variant << "\n";
  for (const auto& l : lemmas)
    os << kind_name(l.kind) << ": " << l.name << " " << to_string(l.verdict) << " " << seconds_text(l.seconds) << "\n";
  os << "samples: " << samples << " rtl_step = x86_model_step\n";
  os << "conclusion: rtl_step = x86_model_step for every instance of " << variant
     << " admitted by its xlate query\n";
  return os.str();
}

ProofSession::ProofSession(const design::Design& d, ProverOptions options) : design_(d), options_(options) {}

void ProofSession::store(const ObligationResult& r) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!results_.count(r.name)) order_.push_back(r.name);
  results_[r.name] = r;
}

std::optional<ObligationResult> ProofSession::cached(const std::string& name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = results_.find(name);
  if (it == results_.end()) return std::nullopt;
  return it->second;
}

std::vector<ObligationResult> ProofSession::all_results() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<ObligationResult> out;
  for (const auto& n : order_) out.push_back(results_.at(n));
  return out;
}

std::vector<ObligationResult> ProofSession::run_batch(const std::vector<Obligation>& obligations) {
  std::vector<Obligation> todo;
  for (const auto& ob : obligations) {
    auto c = cached(ob.name);
    if (!c || !c->proved()) todo.push_back(ob);
  }
  for (const auto& r : run_jobs(todo, options_)) store(r);
  std::vector<ObligationResult> out;
  for (const auto& ob : obligations) out.push_back(*cached(ob.name));
  return out;
}

std::vector<ObligationResult> ProofSession::prove_decode() { return run_batch(decode_obligations(design_)); }

std::vector<ObligationResult> ProofSession::prove_exec() { return run_batch(exec_obligations(design_)); }

ObligationResult ProofSession::pipeline_result(const XlatePipeline& p, const std::string& variant) const {
  if (p.proof) return *p.proof;
  ObligationResult r;
  r.name = "xlate/" + variant;
  r.kind = ObligationKind::kXlateUcode;
  r.variant = variant;
  std::string reason = p.base.reason;
  if (p.general && !p.general->ok) reason = p.general->reason;
  if (p.fixed && !p.fixed->ok) {
    reason = p.fixed->reason;
    r.notes.push_back("sequence A: " + [&] {
      std::string s;
      for (const auto& u : p.fixed->uops_a) s += (s.empty() ? "" : "; ") + u;
      return s;
    }());
    r.notes.push_back("sequence B: " + [&] {
      std::string s;
      for (const auto& u : p.fixed->uops_b) s += (s.empty() ? "" : "; ") + u;
      return s;
    }());
  }
  r.error = p.failed_stage + ": " + reason;
  return r;
}

XlatePipeline ProofSession::prove_xlate(const std::string& variant) { return prove_xlate(default_query(variant)); }

XlatePipeline ProofSession::prove_xlate(const VariantQuery& q) {
  const std::string name = "xlate/" + q.variant;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = pipelines_.find(q.variant);
    if (it != pipelines_.end() && it->second.proof && it->second.proof->proved()) return it->second;
  }
  XlatePipeline p = run_xlate_pipeline(q, design_, options_);
  store(pipeline_result(p, q.variant));
  std::lock_guard<std::mutex> lock(mutex_);
  pipelines_[q.variant] = p;
  return p;
}

std::vector<std::string> ProofSession::dependencies(const std::string& variant) const {
  const auto bytes = canonical_bytes(variant);
  const isa::DecodeResult dec = isa::x86_decode(bytes);
  std::vector<std::string> deps{decode_obligation_name(static_cast<unsigned>(dec.instr.entry.u64())),
                                "xlate/" + variant};
  for (const auto& s : exec_shapes_for(variant, design_)) deps.push_back(exec_obligation_name(s));
  return deps;
}

SingleInstructionResult ProofSession::prove_single_instruction(const std::string& variant, unsigned samples) {
  const auto start = std::chrono::steady_clock::now();
  SingleInstructionResult out;
  ObligationResult& r = out.result;
  r.name = "instr/" + variant;
  r.kind = ObligationKind::kSingleInstruction;
  r.variant = variant;

  Certificate cert;
  cert.variant = variant;
  for (const auto& dep : dependencies(variant)) {
    auto c = cached(dep);
    if (!c || !c->proved()) {
      out.missing.push_back(dep);
      continue;
    }
    cert.lemmas.push_back(*c);
  }
  auto finish = [&] {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    store(r);
    return out;
  };
  if (!out.missing.empty()) {
    r.error = "missing lemma";
    for (const auto& m : out.missing) r.error += " " + m;
    return finish();
  }

  const GeneralInstance& gi = pipelines_.at(variant).general->instance;
  std::mt19937_64 rng(options_.seed);
  for (unsigned i = 0; i < samples; ++i) {
    Values v;
    for (const auto& p : gi.pattern)
      if (!p.var.empty()) v[p.var] = rng() & 0xFF;
    const auto bytes = instance_bytes(gi, v);
    isa::X86State s = random_state(rng);
    isa::load_code(s, 0x1000, bytes);
    const auto diff = state_difference(isa::x86_model_step(s), design_.rtl_step(s));
    ++out.samples;
    if (diff) {
      ++out.sample_failures;
      if (out.first_failure.empty()) out.first_failure = *diff;
    }
  }
  if (out.sample_failures) {
    r.verdict = ProofVerdict::kCounterexample;
    r.error = "rtl_step and x86_model_step disagree on " + std::to_string(out.sample_failures) +
              " samples, first at " + out.first_failure;
    return finish();
  }
  r.verdict = ProofVerdict::kProved;
  r.notes.push_back(std::to_string(out.samples) + " concrete samples agree");
  cert.samples = out.samples;
  out.certificate = cert;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    certificates_.push_back(cert);
  }
  return finish();
}

std::optional<ObligationResult> ProofSession::run_named(const std::string& name) {
  std::vector<Obligation> pool = name.rfind("decode/", 0) == 0 ? decode_obligations(design_)
                                 : name.rfind("exec/", 0) == 0 ? exec_obligations(design_)
                                                                : std::vector<Obligation>{};
  for (const auto& ob : pool)
    if (ob.name == name) return run_batch({ob}).front();
  return std::nullopt;
}

SingleInstructionResult ProofSession::prove_instruction_with_dependencies(const std::string& variant) {
  for (const auto& dep : dependencies(variant)) {
    if (auto c = cached(dep); c && c->proved()) continue;
    if (dep.rfind("xlate/", 0) == 0)
      prove_xlate(variant);
    else
      run_named(dep);
  }
  return prove_single_instruction(variant);
}

std::vector<ObligationResult> ProofSession::run(const std::string& selector) {
  if (selector == "decode") return prove_decode();
  if (selector == "exec") return prove_exec();
  if (selector.rfind("xlate/", 0) == 0) {
    const std::string v = selector.substr(6);
    prove_xlate(v);
    return {*cached(selector)};
  }
  if (selector.rfind("instr ", 0) == 0) {
    const std::string v = selector.substr(6);
    prove_instruction_with_dependencies(v);
    std::vector<ObligationResult> out;
    for (const auto& dep : dependencies(v))
      if (auto c = cached(dep)) out.push_back(*c);
    out.push_back(*cached("instr/" + v));
    return out;
  }
  if (selector == "all") {
    std::vector<ObligationResult> out = prove_decode();
    auto e = prove_exec();
    out.insert(out.end(), e.begin(), e.end());
    for (const auto& v : design_.xlate_variants()) {
      prove_xlate(v);
      out.push_back(*cached("xlate/" + v));
    }
    for (const auto& v : design_.xlate_variants()) out.push_back(prove_single_instruction(v).result);
    return out;
  }
  if (auto r = run_named(selector)) return {*r};
  throw std::invalid_argument("unknown selector '" + selector + "'");
}

std::string result_line(const ObligationResult& r, bool timings) {
  std::ostringstream os;
  os << r.name << ": " << verdict_text(r);
  std::vector<std::string> detail;
  if (timings) detail.push_back(seconds_text(r.seconds));
  if (r.cnf_vars) {
    detail.push_back(std::to_string(r.cnf_vars) + " vars");
    detail.push_back(std::to_string(r.cnf_clauses) + " clauses");
    detail.push_back(std::to_string(r.stats.conflicts) + " conflicts");
  }
  for (std::size_t i = 0; i < detail.size(); ++i) os << (i ? ", " : " (") << detail[i] << (i + 1 == detail.size() ? ")" : "");
  if (!r.error.empty()) os << " " << r.error;
  return os.str();
}

std::string text_report(const std::vector<ObligationResult>& results, bool timings) {
  std::ostringstream os;
  unsigned proved = 0;
  for (const auto& r : results) {
    proved += r.proved();
    os << result_line(r, timings) << "\n";
    for (const auto& n : r.notes) os << "  note: " << n << "\n";
    if (r.replay && r.replay->reproduced) {
      std::istringstream lines(r.replay->report);
      for (std::string line; std::getline(lines, line);) os << "  " << line << "\n";
    }
  }
  os << "proved: " << proved << "/" << results.size() << "\n";
  return os.str();
}

std::string html_report(const std::vector<ObligationResult>& results, const std::string& title) {
  std::ostringstream os;
  os << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" << html_escape(title) << "</title>\n"
     << "<style>body{font-family:sans-serif}td,th{padding:2px 8px;text-align:left}"
     << ".proved{color:#060}.fail{color:#a00}pre{margin:0}</style></head><body>\n"
     << "<h1>" << html_escape(title) << "</h1>\n<table>\n"
     << "<tr><th>obligation</th><th>kind</th><th>verdict</th><th>seconds</th><th>CNF</th><th>details</th></tr>\n";
  for (const auto& r : results) {
    os << "<tr><td>" << html_escape(r.name) << "</td><td>" << kind_name(r.kind) << "</td><td class=\""
       << (r.proved() ? "proved" : "fail") << "\">" << verdict_text(r) << "</td><td>" << r.seconds << "</td><td>"
       << r.cnf_vars << "/" << r.cnf_clauses << "</td><td><pre>" << html_escape(r.error);
    for (const auto& n : r.notes) os << "\n" << html_escape(n);
    if (r.replay && r.replay->reproduced) os << "\n" << html_escape(r.replay->report);
    os << "</pre></td></tr>\n";
  }
  os << "</table>\n</body></html>\n";
  return os.str();
}

}  // namespace ucv::prover
