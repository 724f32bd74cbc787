#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ucv/sat/solver.hpp"

namespace ucv::sat {

class DimacsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "p cnf V C" header, one clause per line terminated by 0.
void write_dimacs(const Cnf& cnf, std::ostream& out);
void export_dimacs(const Cnf& cnf, const std::filesystem::path& path);
Cnf read_dimacs(std::istream& in);

// Parses competition-style solver output ("s ..." and "v ..." lines). Sat
// models are re-checked against `cnf`; unsat is recorded as externally
// claimed.
SatResult parse_solver_output(std::istream& in, const Cnf& cnf);
SatResult import_external_verdict(const std::filesystem::path& path, const Cnf& cnf);

// Runs `command <dimacs-file>` and parses its stdout.
SatResult run_external_solver(const std::string& command, const Cnf& cnf,
                              const std::filesystem::path& scratch_dir = std::filesystem::temp_directory_path());

}  // namespace ucv::sat
