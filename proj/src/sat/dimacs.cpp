#include "ucv/sat/dimacs.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <unistd.h>

namespace ucv::sat {

void write_dimacs(const Cnf& cnf, std::ostream& out) {
  out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
  for (const auto& clause : cnf.clauses) {
    for (CnfLit l : clause) out << l << " ";
    out << "0\n";
  }
}

void export_dimacs(const Cnf& cnf, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DimacsError("cannot open " + path.string() + " for writing");
  write_dimacs(cnf, out);
}

Cnf read_dimacs(std::istream& in) {
  Cnf cnf;
  std::string line;
  bool header = false;
  std::size_t expected = 0;
  Clause current;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ss(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      ss >> p >> fmt >> cnf.num_vars >> expected;
      if (!ss || fmt != "cnf") throw DimacsError("malformed header: " + line);
      header = true;
      continue;
    }
    if (!header) throw DimacsError("clause before header");
    CnfLit l;
    while (ss >> l) {
      if (l == 0) {
        cnf.add(std::move(current));
        current.clear();
      } else {
        if (std::abs(l) > cnf.num_vars) throw DimacsError("literal out of range: " + std::to_string(l));
        current.push_back(l);
      }
    }
    if (!ss.eof()) throw DimacsError("malformed clause line: " + line);
  }
  if (!current.empty()) throw DimacsError("unterminated clause");
  if (cnf.clauses.size() != expected) throw DimacsError("clause count does not match header");
  return cnf;
}

SatResult parse_solver_output(std::istream& in, const Cnf& cnf) {
  SatResult result;
  std::string status;
  bool saw_values = false;
  std::vector<bool> model(static_cast<std::size_t>(cnf.num_vars) + 1, false);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "s") {
      std::getline(ss >> std::ws, status);
    } else if (tag == "v") {
      saw_values = true;
      long l;
      while (ss >> l) {
        if (l == 0) break;
        auto v = static_cast<std::size_t>(l > 0 ? l : -l);
        if (v > static_cast<std::size_t>(cnf.num_vars)) throw DimacsError("model literal out of range: " + line);
        model[v] = l > 0;
      }
      if (ss.fail() && !ss.eof()) throw DimacsError("malformed value line: " + line);
    } else {
      throw DimacsError("unexpected solver output line: " + line);
    }
  }
  if (status == "UNSATISFIABLE") {
    result.verdict = Verdict::kUnsat;
    result.externally_claimed = true;
    return result;
  }
  if (status == "SATISFIABLE" || (status.empty() && saw_values)) {
    if (!check_model(cnf, model)) throw DimacsError("external model does not satisfy the CNF");
    result.verdict = Verdict::kSat;
    result.model = std::move(model);
    result.env = model_to_env(cnf, result.model);
    return result;
  }
  if (status == "UNKNOWN" || status == "TIMEOUT") {
    result.verdict = Verdict::kTimeout;
    return result;
  }
  throw DimacsError("solver output carries no verdict");
}

SatResult import_external_verdict(const std::filesystem::path& path, const Cnf& cnf) {
  std::ifstream in(path);
  if (!in) throw DimacsError("cannot open " + path.string());
  return parse_solver_output(in, cnf);
}

SatResult run_external_solver(const std::string& command, const Cnf& cnf, const std::filesystem::path& scratch_dir) {
  static std::atomic<unsigned> counter{0};
  auto file = scratch_dir / ("ucv-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".cnf");
  export_dimacs(cnf, file);
  auto start = std::chrono::steady_clock::now();
  std::string cmd = command + " '" + file.string() + "'";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(cmd.c_str(), "r"), ::pclose);
  if (!pipe) throw DimacsError("cannot run external solver: " + command);
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) output.append(buf, n);
  pipe.reset();
  std::filesystem::remove(file);
  std::istringstream in(output);
  SatResult result = parse_solver_output(in, cnf);
  result.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ucv::sat
