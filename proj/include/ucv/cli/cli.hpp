#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ucv/isa/state.hpp"

namespace ucv::cli {

// Exit codes. Anything not proved, or a counterexample that fails to replay,
// is nonzero.
enum ExitCode : int {
  kExitOk = 0,
  kExitNotProved = 1,
  kExitUsage = 2,
  kExitReplayFailed = 3,
};

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main_entry(int argc, char** argv);

// "48 0F AC D1 10", "480FACD110" and "0x48,0x0f" all parse.
std::vector<std::uint8_t> parse_hex_bytes(const std::string& text);

// `NAME: old -> new` for every architectural location that changed.
std::vector<std::string> state_diff(const isa::X86State& before, const isa::X86State& after);

}  // namespace ucv::cli
