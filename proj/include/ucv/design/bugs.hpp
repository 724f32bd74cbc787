#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucv::design {

// Seeded defects. Each name toggles exactly one mutation of the DUT.
inline constexpr const char* kBugDontCareSrc2 = "exec-dontcare-src2";
inline constexpr const char* kBugPorqIgnoresOpmask = "porq-ignores-opmask";
inline constexpr const char* kBugMissingEvexException = "decode-missing-evex-exception";

class BugRegistry {
 public:
  BugRegistry();

  void inject(const std::string& name, bool enabled);  // throws std::invalid_argument
  bool enabled(const std::string& name) const;
  bool any_enabled() const;
  std::vector<std::string> names() const;
  std::string description(const std::string& name) const;

 private:
  std::map<std::string, std::pair<bool, std::string>> bugs_;
};

}  // namespace ucv::design
