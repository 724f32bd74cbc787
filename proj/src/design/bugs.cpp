#include "ucv/design/bugs.hpp"

namespace ucv::design {

BugRegistry::BugRegistry() {
  bugs_[kBugDontCareSrc2] = {false, "AND unit reads an undriven bus instead of src2"};
  bugs_[kBugPorqIgnoresOpmask] = {false, "microsequencer drops the opmask index when expanding PORQ"};
  bugs_[kBugMissingEvexException] = {false, "EVEX decoder accepts zero-masking with k0"};
}

void BugRegistry::inject(const std::string& name, bool enabled) {
  auto it = bugs_.find(name);
  if (it == bugs_.end()) throw std::invalid_argument("unknown bug: " + name);
  it->second.first = enabled;
}

bool BugRegistry::enabled(const std::string& name) const {
  auto it = bugs_.find(name);
  return it != bugs_.end() && it->second.first;
}

bool BugRegistry::any_enabled() const {
  for (const auto& [name, bug] : bugs_)
    if (bug.first) return true;
  return false;
}

std::vector<std::string> BugRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, bug] : bugs_) out.push_back(name);
  return out;
}

std::string BugRegistry::description(const std::string& name) const {
  auto it = bugs_.find(name);
  if (it == bugs_.end()) throw std::invalid_argument("unknown bug: " + name);
  return it->second.second;
}

}  // namespace ucv::design
