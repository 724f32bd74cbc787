#include "ucv/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ucv/prover/session.hpp"

namespace ucv::cli {

namespace {

struct Globals {
  double budget = 300.0;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  std::string solver;
  std::vector<std::string> bugs;
  std::string rom;
  std::string report_dir;
};

std::string hex(const BitVec& v) { return to_hex(v.value(), v.width()); }

design::Design make_design(const Globals& g) {
  design::Design d = g.rom.empty() ? design::Design() : [&] {
    if (g.rom.size() > 5 && g.rom.substr(g.rom.size() - 5) == ".usrc") return design::Design(design::load_rom_source(g.rom));
    std::ifstream in(g.rom);
    if (!in) throw std::runtime_error("cannot open ROM image " + g.rom);
    std::stringstream ss;
    ss << in.rdbuf();
    return design::Design(design::parse_rom_image(ss.str()));
  }();
  for (const auto& b : g.bugs) d.inject_bug(b, true);
  return d;
}

prover::ProverOptions prover_options(const Globals& g) {
  prover::ProverOptions o;
  o.budget_seconds = g.budget;
  o.jobs = std::max(1u, g.jobs);
  o.seed = g.seed;
  o.external_solver = g.solver;
  return prover::options_from_env(o);
}

isa::X86State load_state(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  isa::X86State s = path.empty() ? isa::X86State() : isa::parse_state_file(path);
  if (path.empty()) s.ip = BitVec::constant(64, 0x1000);
  isa::load_code(s, s.ip.u64(), bytes);
  return s;
}

// Selector words: "decode", "exec", "all", "instr <variant>", "xlate <variant>",
// "xlate/<variant>" or an obligation name.
std::vector<std::string> parse_selectors(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    if ((w == "instr" || w == "xlate") && i + 1 < words.size()) {
      out.push_back(w == "instr" ? "instr " + words[i + 1] : "xlate/" + words[i + 1]);
      ++i;
    } else if (w == "instr" || w == "xlate") {
      throw CLI::ValidationError(w + " needs a variant, e.g. SHRD/reg64-imm8");
    } else {
      out.push_back(w);
    }
  }
  return out;
}

std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot open manifest " + path);
  std::vector<std::string> words;
  for (std::string line; std::getline(in, line);) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<std::string> parts;
    for (std::string w; ls >> w;) parts.push_back(w);
    auto sel = parse_selectors(parts);
    words.insert(words.end(), sel.begin(), sel.end());
  }
  return words;
}

std::string counterexample_text(const prover::ObligationResult& r) {
  std::ostringstream os;
  os << "obligation: " << r.name << "\n"
     << "kind: " << prover::kind_name(r.kind) << "\n"
     << "verdict: " << to_string(r.verdict) << "\n";
  for (const auto& [name, value] : r.inputs) os << "input." << name << ": " << to_hex(value, 1) << "\n";
  if (r.replay) {
    os << "reproduced: " << (r.replay->reproduced ? "yes" : "no") << "\n"
       << "location: " << r.replay->location << "\n"
       << r.replay->report;
  }
  return os.str();
}

struct Outcome {
  unsigned total = 0, proved = 0, replay_failures = 0;
  std::vector<prover::ObligationResult> results;
};

Outcome run_selectors(prover::ProofSession& session, const std::vector<std::string>& selectors) {
  Outcome o;
  for (const auto& sel : selectors) {
    auto rs = session.run(sel);
    o.results.insert(o.results.end(), rs.begin(), rs.end());
  }
  for (const auto& r : o.results) {
    ++o.total;
    o.proved += r.proved();
    if (r.verdict == ProofVerdict::kCounterexample && (!r.replay || !r.replay->reproduced)) ++o.replay_failures;
  }
  return o;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

int summarize(const Outcome& o, prover::ProofSession& session, const Globals& g, std::ostream& out) {
  out << prover::text_report(o.results);
  for (const auto& c : session.certificates()) {
    out << c.text();
    if (!g.report_dir.empty()) {
      auto path = std::filesystem::path(g.report_dir) / (prover::safe_file_name(c.variant) + ".cert");
      write_file(path, c.text());
      out << "certificate_file: " << path.string() << "\n";
    }
  }
  out << "obligations: " << o.total << "\n"
      << "status: " << (o.proved == o.total && o.replay_failures == 0 ? "pass" : "fail") << "\n";
  if (o.replay_failures) return kExitReplayFailed;
  return o.proved == o.total ? kExitOk : kExitNotProved;
}

}  // namespace

std::vector<std::uint8_t> parse_hex_bytes(const std::string& text) {
  std::string digits;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '0' && i + 1 < text.size() && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
      ++i;
      continue;
    }
    if (std::isxdigit(static_cast<unsigned char>(c))) {
      digits += c;
    } else if (!std::isspace(static_cast<unsigned char>(c)) && c != ',' && c != '_') {
      throw std::invalid_argument(std::string("bad hex byte character '") + c + "'");
    }
  }
  if (digits.size() % 2) throw std::invalid_argument("odd number of hex digits");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < digits.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoul(digits.substr(i, 2), nullptr, 16)));
  return out;
}

std::vector<std::string> state_diff(const isa::X86State& a, const isa::X86State& b) {
  std::vector<std::string> out;
  auto add = [&](const std::string& name, const BitVec& x, const BitVec& y) {
    if (x.value() != y.value()) out.push_back(name + ": " + hex(x) + " -> " + hex(y));
  };
  for (unsigned i = 0; i < isa::kNumGprs; ++i) add(isa::gpr_name(i), a.gpr[i], b.gpr[i]);
  for (unsigned i = 0; i < isa::kNumZmms; ++i) add("ZMM" + std::to_string(i), a.zmm[i], b.zmm[i]);
  for (unsigned i = 0; i < isa::kNumKs; ++i) add("K" + std::to_string(i), a.k[i], b.k[i]);
  auto flag = [&](const char* name, const BitVec& x, const BitVec& y) {
    if (x.value() != y.value()) out.push_back(std::string(name) + ": " + x.value().str() + " -> " + y.value().str());
  };
  flag("ZF", a.zf, b.zf);
  flag("SF", a.sf, b.sf);
  flag("CF", a.cf, b.cf);
  add("IP", a.ip, b.ip);
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Microcode verification framework"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--budget", g.budget, "Solver budget per obligation in seconds")->check(CLI::PositiveNumber);
  app.add_option("--jobs", g.jobs, "Parallel obligations")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", g.seed, "Solver and sampling seed");
  app.add_option("--solver", g.solver, "External DIMACS solver command for cross-checks");
  app.add_option("--bug", g.bugs, "Enable a seeded design bug (repeatable)");
  app.add_option("--rom", g.rom, "ROM source (.usrc) or image");
  app.add_option("--report-dir", g.report_dir, "Directory for certificates, reports and counterexamples");

  std::string bytes_text, state_path;
  bool rtl = false;
  auto* run = app.add_subcommand("run", "Execute one instruction and print the state diff");
  run->add_option("--bytes", bytes_text, "Instruction bytes in hex")->required();
  run->add_option("--state", state_path, "Initial state file");
  run->add_flag("--rtl", rtl, "Step the design instead of the x86 model");

  auto* trace = app.add_subcommand("trace-ucode", "Print the uop trace of one instruction");
  trace->add_option("--bytes", bytes_text, "Instruction bytes in hex")->required();
  trace->add_option("--state", state_path, "Initial state file");
  trace->add_flag("--rtl", rtl, "Evaluate uops on the execution circuits");

  std::vector<std::string> words;
  std::string manifest;
  auto* prove = app.add_subcommand("prove", "Run proof obligations");
  prove->add_option("selector", words, "decode | exec | xlate <variant> | instr <variant> | all | <obligation>");
  prove->add_option("--manifest", manifest, "File with one selector per line");

  std::string bug;
  auto* mutate = app.add_subcommand("mutate", "Enable one seeded bug and run obligations against it");
  mutate->add_option("--bug", bug, "Bug name")->required();
  mutate->add_option("--prove", words, "Selector")->required()->expected(1, -1);

  std::string cnf_dir = "cnf";
  auto* export_cnf = app.add_subcommand("export-cnf", "Write the CNF of every solver call");
  export_cnf->add_option("selector", words, "Selectors (default: decode exec)");
  export_cnf->add_option("--dir", cnf_dir, "Output directory");

  std::string report_out, format = "text";
  auto* report = app.add_subcommand("report", "Run obligations and write a report file");
  report->add_option("selector", words, "Selectors (default: decode exec)");
  report->add_option("--out", report_out, "Report path")->required();
  report->add_option("--format", format, "text or html")->check(CLI::IsMember({"text", "html"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed() || trace->parsed()) {
      const auto bytes = parse_hex_bytes(bytes_text);
      design::Design d = make_design(g);
      const isa::X86State s = load_state(state_path, bytes);
      if (run->parsed()) {
        const isa::X86State next = rtl ? d.rtl_step(s) : isa::x86_model_step(s);
        for (const auto& line : state_diff(s, next)) out << line << "\n";
        out << "fault: " << isa::exception_name(static_cast<unsigned>(next.fault.u64())) << "\n";
        return kExitOk;
      }
      const isa::DecodeResult dec = isa::x86_decode(bytes);
      if (dec.dx.u64() != 0) {
        out << "fault: " << isa::exception_name(static_cast<unsigned>(dec.dx.u64())) << "\n";
        return kExitOk;
      }
      std::vector<ucode::TraceEntry> entries;
      ucode::RunOptions opt;
      opt.trace = &entries;
      if (rtl) opt.exec = [&d](const ucode::Uop& u, const ucode::UopData& data) { return d.exec(u, data); };
      const isa::ExecResult r = ucode::run_xlate_ucode(dec.instr, s, d, opt);
      for (const auto& e : entries) out << e.line << "\n";
      for (const auto& line : state_diff(s, isa::x86_update(dec.dx, r, s))) out << line << "\n";
      return kExitOk;
    }

    if (!manifest.empty()) {
      auto m = read_manifest(manifest);
      words.insert(words.end(), m.begin(), m.end());
    }
    if (mutate->parsed()) g.bugs.push_back(bug);
    std::vector<std::string> selectors = parse_selectors(words);
    if (selectors.empty()) {
      if (prove->parsed()) throw CLI::ValidationError("prove needs a selector or --manifest");
      selectors = {"decode", "exec"};
    }
    design::Design d = make_design(g);
    prover::ProverOptions po = prover_options(g);
    if (export_cnf->parsed()) po.export_cnf_dir = cnf_dir;
    prover::ProofSession session(d, po);
    Outcome o = run_selectors(session, selectors);

    if (mutate->parsed()) {
      const std::filesystem::path dir = g.report_dir.empty() ? "." : g.report_dir;
      bool detected = false;
      for (const auto& r : o.results) {
        if (r.verdict != ProofVerdict::kCounterexample || !r.replay) continue;
        detected = detected || r.replay->reproduced;
        auto path = dir / ("counterexample-" + prover::safe_file_name(r.name) + ".txt");
        write_file(path, counterexample_text(r));
        out << "counterexample_file: " << path.string() << "\n";
      }
      out << "bug: " << bug << "\n" << "detected: " << (detected ? "yes" : "no") << "\n";
    }
    if (export_cnf->parsed()) {
      std::vector<std::string> files;
      if (std::filesystem::exists(cnf_dir))
        for (const auto& e : std::filesystem::directory_iterator(cnf_dir)) files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out << "cnf_file: " << f << "\n";
    }
    if (report->parsed()) {
      write_file(report_out, format == "html" ? prover::html_report(o.results, "Proof report")
                                              : prover::text_report(o.results, false));
      out << "report_file: " << report_out << "\n";
    }
    return summarize(o, session, g, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const isa::StateFileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNotProved;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace ucv::cli
