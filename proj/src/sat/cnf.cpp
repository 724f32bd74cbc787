#include "ucv/sat/cnf.hpp"

#include <stdexcept>

namespace ucv::sat {

Cnf tseitin_encode(const BitVec& goal) {
  if (goal.width() != 1) throw BitVecError("tseitin_encode: goal must be 1 bit wide");
  Cnf cnf;
  const Lit root = goal[0];
  if (root == kTrue) return cnf;
  if (root == kFalse) {
    cnf.add({});
    return cnf;
  }
  const Aig& g = *goal.graph();

  // Post-order walk so children are numbered before their parents.
  std::vector<std::pair<std::uint32_t, bool>> stack{{lit_node(root), false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (cnf.var_map.count(n) != 0) continue;
    const auto& node = g.node(n);
    if (node.kind == Aig::Kind::kInput) {
      int v = cnf.new_var();
      cnf.var_map.emplace(n, v);
      cnf.input_vars.emplace(node.var, v);
      continue;
    }
    if (!expanded) {
      stack.push_back({n, true});
      for (Lit child : {node.left, node.right}) {
        if (!lit_is_const(child) && cnf.var_map.count(lit_node(child)) == 0) {
          stack.push_back({lit_node(child), false});
        }
      }
      continue;
    }
    int v = cnf.new_var();
    cnf.var_map.emplace(n, v);
    auto to_cnf = [&](Lit l) {
      // Constant children never survive construction-time folding.
      int x = cnf.var_map.at(lit_node(l));
      return lit_is_neg(l) ? -x : x;
    };
    CnfLit a = to_cnf(node.left), b = to_cnf(node.right);
    cnf.add({-v, a});
    cnf.add({-v, b});
    cnf.add({v, -a, -b});
  }
  int r = cnf.var_map.at(lit_node(root));
  cnf.add({lit_is_neg(root) ? -r : r});
  return cnf;
}

bool check_model(const Cnf& cnf, const std::vector<bool>& model) {
  if (model.size() < static_cast<std::size_t>(cnf.num_vars) + 1) {
    throw std::invalid_argument("check_model: model does not cover every variable");
  }
  for (const auto& clause : cnf.clauses) {
    bool sat = false;
    for (CnfLit l : clause) {
      bool v = model[static_cast<std::size_t>(l > 0 ? l : -l)];
      if ((l > 0) == v) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

Env model_to_env(const Cnf& cnf, const std::vector<bool>& model) {
  Env env;
  for (const auto& [var, cnf_var] : cnf.input_vars) env.set(var, model.at(static_cast<std::size_t>(cnf_var)));
  return env;
}

}  // namespace ucv::sat
