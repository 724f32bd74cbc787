#include "ucv/sat/solver.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>

namespace ucv::sat {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kSat: return "sat";
    case Verdict::kUnsat: return "unsat";
    case Verdict::kTimeout: return "timeout";
  }
  return "?";
}

namespace {

using ILit = int;  // 2 * var + sign
constexpr ILit kNoLit = -1;
constexpr int kNoReason = -1;
constexpr std::uint8_t kFalseV = 0, kTrueV = 1, kUndef = 2;

inline int var_of(ILit l) { return l >> 1; }
inline ILit neg(ILit l) { return l ^ 1; }

struct ClauseData {
  std::vector<ILit> lits;
  bool learnt = false;
  bool removed = false;
  double activity = 0.0;
};

struct Watcher {
  int cref;
  ILit blocker;
};

class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& act) : act_(act) {}

  void resize(int n) { pos_.assign(static_cast<std::size_t>(n), -1); }
  bool contains(int v) const { return pos_[static_cast<std::size_t>(v)] >= 0; }
  bool empty() const { return heap_.empty(); }

  void insert(int v) {
    if (contains(v)) return;
    pos_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(heap_.size() - 1);
  }

  void increased(int v) {
    if (contains(v)) up(static_cast<std::size_t>(pos_[static_cast<std::size_t>(v)]));
  }

  int pop() {
    int top = heap_[0];
    heap_[0] = heap_.back();
    pos_[static_cast<std::size_t>(heap_[0])] = 0;
    heap_.pop_back();
    pos_[static_cast<std::size_t>(top)] = -1;
    if (!heap_.empty()) down(0);
    return top;
  }

 private:
  bool less(int a, int b) const { return act_[static_cast<std::size_t>(a)] > act_[static_cast<std::size_t>(b)]; }

  void up(std::size_t i) {
    int v = heap_[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = parent;
    }
    heap_[i] = v;
    pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }

  void down(std::size_t i) {
    int v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && less(heap_[child + 1], heap_[child])) ++child;
      if (!less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      pos_[static_cast<std::size_t>(heap_[i])] = static_cast<int>(i);
      i = child;
    }
    heap_[i] = v;
    pos_[static_cast<std::size_t>(v)] = static_cast<int>(i);
  }

  const std::vector<double>& act_;
  std::vector<int> heap_;
  std::vector<int> pos_;
};

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

class Cdcl {
 public:
  Cdcl(const Cnf& cnf, const Budget& budget) : budget_(budget), heap_(activity_) {
    n_ = cnf.num_vars;
    const auto n = static_cast<std::size_t>(n_);
    value_.assign(n, kUndef);
    level_.assign(n, 0);
    reason_.assign(n, kNoReason);
    phase_.assign(n, false);
    seen_.assign(n, 0);
    activity_.assign(n, 0.0);
    watches_.assign(2 * n, {});
    heap_.resize(n_);
    if (budget_.seed != 0) {
      std::mt19937_64 rng(budget_.seed);
      std::uniform_real_distribution<double> dist(0.0, 1e-5);
      for (auto& a : activity_) a = dist(rng);
    }
    for (int v = 0; v < n_; ++v) heap_.insert(v);
    for (const auto& clause : cnf.clauses) {
      if (!add_input_clause(clause)) {
        trivially_unsat_ = true;
        break;
      }
    }
  }

  Verdict run(SatStats& stats) {
    start_ = std::chrono::steady_clock::now();
    Verdict verdict = search_all(stats);
    stats.seconds = elapsed();
    return verdict;
  }

  std::vector<bool> model() const {
    std::vector<bool> m(static_cast<std::size_t>(n_) + 1, false);
    for (int v = 0; v < n_; ++v) m[static_cast<std::size_t>(v) + 1] = value_[static_cast<std::size_t>(v)] == kTrueV;
    return m;
  }

 private:
  std::uint8_t lit_value(ILit l) const {
    std::uint8_t v = value_[static_cast<std::size_t>(var_of(l))];
    return v == kUndef ? kUndef : static_cast<std::uint8_t>(v ^ static_cast<std::uint8_t>(l & 1));
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool add_input_clause(const Clause& clause) {
    std::vector<ILit> lits;
    for (CnfLit l : clause) {
      int v = (l > 0 ? l : -l) - 1;
      if (v < 0 || v >= n_) throw std::invalid_argument("solve: literal out of range");
      lits.push_back(2 * v + (l < 0 ? 1 : 0));
    }
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 0; i + 1 < lits.size(); ++i) {
      if (lits[i + 1] == neg(lits[i])) return true;  // tautology
    }
    // Drop literals already false at level 0, keep clauses already satisfied.
    std::vector<ILit> kept;
    for (ILit l : lits) {
      auto lv = lit_value(l);
      if (lv == kTrueV) return true;
      if (lv == kUndef) kept.push_back(l);
    }
    if (kept.empty()) return false;
    if (kept.size() == 1) {
      enqueue(kept[0], kNoReason);
      return propagate() == kNoReason;
    }
    attach(new_clause(std::move(kept), false));
    return true;
  }

  int new_clause(std::vector<ILit> lits, bool learnt) {
    ClauseData c;
    c.lits = std::move(lits);
    c.learnt = learnt;
    clauses_.push_back(std::move(c));
    int cref = static_cast<int>(clauses_.size()) - 1;
    if (learnt) learnts_.push_back(cref);
    return cref;
  }

  void attach(int cref) {
    const auto& c = clauses_[static_cast<std::size_t>(cref)];
    watches_[static_cast<std::size_t>(c.lits[0])].push_back({cref, c.lits[1]});
    watches_[static_cast<std::size_t>(c.lits[1])].push_back({cref, c.lits[0]});
  }

  void enqueue(ILit l, int reason) {
    auto v = static_cast<std::size_t>(var_of(l));
    value_[v] = static_cast<std::uint8_t>((l & 1) ? kFalseV : kTrueV);
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  // Returns the conflicting clause or kNoReason.
  int propagate() {
    int conflict = kNoReason;
    while (qhead_ < trail_.size()) {
      ILit p = trail_[qhead_++];
      ILit false_lit = neg(p);
      auto& ws = watches_[static_cast<std::size_t>(false_lit)];
      std::size_t i = 0, j = 0;
      while (i < ws.size()) {
        Watcher w = ws[i++];
        if (lit_value(w.blocker) == kTrueV) {
          ws[j++] = w;
          continue;
        }
        auto& c = clauses_[static_cast<std::size_t>(w.cref)];
        if (c.removed) continue;
        if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
        ILit first = c.lits[0];
        if (first != w.blocker && lit_value(first) == kTrueV) {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.lits.size(); ++k) {
          if (lit_value(c.lits[k]) != kFalseV) {
            std::swap(c.lits[1], c.lits[k]);
            watches_[static_cast<std::size_t>(c.lits[1])].push_back({w.cref, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.cref, first};
        ++propagations_;
        if (lit_value(first) == kFalseV) {
          conflict = w.cref;
          qhead_ = trail_.size();
          while (i < ws.size()) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (conflict != kNoReason) break;
    }
    return conflict;
  }

  void bump_var(int v) {
    auto& a = activity_[static_cast<std::size_t>(v)];
    a += var_inc_;
    if (a > 1e100) {
      for (auto& x : activity_) x *= 1e-100;
      var_inc_ *= 1e-100;
    }
    heap_.increased(v);
  }

  void bump_clause(ClauseData& c) {
    c.activity += cla_inc_;
    if (c.activity > 1e20) {
      for (int cref : learnts_) clauses_[static_cast<std::size_t>(cref)].activity *= 1e-20;
      cla_inc_ *= 1e-20;
    }
  }

  bool redundant(ILit l) const {
    int r = reason_[static_cast<std::size_t>(var_of(l))];
    if (r == kNoReason) return false;
    const auto& c = clauses_[static_cast<std::size_t>(r)];
    for (std::size_t k = 1; k < c.lits.size(); ++k) {
      auto v = static_cast<std::size_t>(var_of(c.lits[k]));
      if (!seen_[v] && level_[v] > 0) return false;
    }
    return true;
  }

  void analyze(int conflict, std::vector<ILit>& learnt, int& back_level) {
    learnt.assign(1, kNoLit);
    int path = 0;
    ILit p = kNoLit;
    std::size_t index = trail_.size();
    do {
      auto& c = clauses_[static_cast<std::size_t>(conflict)];
      if (c.learnt) bump_clause(c);
      for (std::size_t k = (p == kNoLit ? 0 : 1); k < c.lits.size(); ++k) {
        ILit q = c.lits[k];
        auto v = static_cast<std::size_t>(var_of(q));
        if (!seen_[v] && level_[v] > 0) {
          seen_[v] = 1;
          bump_var(var_of(q));
          if (level_[v] >= decision_level()) {
            ++path;
          } else {
            learnt.push_back(q);
          }
        }
      }
      while (!seen_[static_cast<std::size_t>(var_of(trail_[--index]))]) {
      }
      p = trail_[index];
      conflict = reason_[static_cast<std::size_t>(var_of(p))];
      seen_[static_cast<std::size_t>(var_of(p))] = 0;
      --path;
    } while (path > 0);
    learnt[0] = neg(p);

    std::vector<ILit> all(learnt.begin(), learnt.end());
    std::size_t keep = 1;
    for (std::size_t k = 1; k < learnt.size(); ++k) {
      if (!redundant(learnt[k])) learnt[keep++] = learnt[k];
    }
    learnt.resize(keep);
    for (ILit l : all) seen_[static_cast<std::size_t>(var_of(l))] = 0;

    back_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t k = 2; k < learnt.size(); ++k) {
        if (level_[static_cast<std::size_t>(var_of(learnt[k]))] > level_[static_cast<std::size_t>(var_of(learnt[max_i]))]) {
          max_i = k;
        }
      }
      std::swap(learnt[1], learnt[max_i]);
      back_level = level_[static_cast<std::size_t>(var_of(learnt[1]))];
    }
  }

  void backtrack(int level) {
    if (decision_level() <= level) return;
    auto lim = static_cast<std::size_t>(trail_lim_[static_cast<std::size_t>(level)]);
    for (std::size_t k = trail_.size(); k-- > lim;) {
      int v = var_of(trail_[k]);
      auto vi = static_cast<std::size_t>(v);
      phase_[vi] = value_[vi] == kTrueV;
      value_[vi] = kUndef;
      reason_[vi] = kNoReason;
      heap_.insert(v);
    }
    trail_.resize(lim);
    trail_lim_.resize(static_cast<std::size_t>(level));
    qhead_ = trail_.size();
  }

  bool locked(int cref) const {
    const auto& c = clauses_[static_cast<std::size_t>(cref)];
    auto v = static_cast<std::size_t>(var_of(c.lits[0]));
    return reason_[v] == cref && lit_value(c.lits[0]) == kTrueV;
  }

  void reduce_db() {
    std::sort(learnts_.begin(), learnts_.end(), [&](int a, int b) {
      return clauses_[static_cast<std::size_t>(a)].activity < clauses_[static_cast<std::size_t>(b)].activity;
    });
    std::size_t half = learnts_.size() / 2;
    std::vector<int> kept;
    for (std::size_t k = 0; k < learnts_.size(); ++k) {
      int cref = learnts_[k];
      auto& c = clauses_[static_cast<std::size_t>(cref)];
      if (k < half && c.lits.size() > 2 && !locked(cref)) {
        c.removed = true;
        c.lits.clear();
        c.lits.shrink_to_fit();
      } else {
        kept.push_back(cref);
      }
    }
    learnts_ = std::move(kept);
    for (auto& ws : watches_) {
      ws.erase(std::remove_if(ws.begin(), ws.end(),
                              [&](const Watcher& w) { return clauses_[static_cast<std::size_t>(w.cref)].removed; }),
               ws.end());
    }
  }

  bool out_of_budget(const SatStats& stats) const {
    if (budget_.max_conflicts != 0 && stats.conflicts >= budget_.max_conflicts) return true;
    return budget_.seconds > 0 && elapsed() > budget_.seconds;
  }

  // Returns kSat/kUnsat, or kTimeout when the restart limit is hit with
  // `restart` set, or when the budget runs out.
  Verdict search(std::uint64_t conflict_limit, SatStats& stats, bool& restart) {
    std::uint64_t local_conflicts = 0;
    std::vector<ILit> learnt;
    for (;;) {
      int conflict = propagate();
      if (conflict != kNoReason) {
        ++stats.conflicts;
        ++local_conflicts;
        if (decision_level() == 0) return Verdict::kUnsat;
        int back_level = 0;
        analyze(conflict, learnt, back_level);
        backtrack(back_level);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          int cref = new_clause(learnt, true);
          attach(cref);
          bump_clause(clauses_[static_cast<std::size_t>(cref)]);
          enqueue(learnt[0], cref);
        }
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
        if ((stats.conflicts & 255) == 0 && out_of_budget(stats)) return Verdict::kTimeout;
        continue;
      }
      if (local_conflicts >= conflict_limit) {
        restart = true;
        backtrack(0);
        return Verdict::kTimeout;
      }
      if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= max_learnts_) {
        reduce_db();
      }
      int next = -1;
      while (!heap_.empty()) {
        int v = heap_.pop();
        if (value_[static_cast<std::size_t>(v)] == kUndef) {
          next = v;
          break;
        }
      }
      if (next < 0) return Verdict::kSat;
      ++stats.decisions;
      if ((stats.decisions & 1023) == 0 && out_of_budget(stats)) return Verdict::kTimeout;
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(2 * next + (phase_[static_cast<std::size_t>(next)] ? 0 : 1), kNoReason);
    }
  }

  Verdict search_all(SatStats& stats) {
    if (trivially_unsat_) return Verdict::kUnsat;
    if (propagate() != kNoReason) return Verdict::kUnsat;
    max_learnts_ = std::max(1000.0, static_cast<double>(clauses_.size()) / 3.0);
    for (int round = 0;; ++round) {
      bool restart = false;
      auto limit = static_cast<std::uint64_t>(luby(2.0, round) * 100.0);
      Verdict v = search(limit, stats, restart);
      stats.propagations = propagations_;
      if (!restart) return v;
      ++stats.restarts;
      max_learnts_ *= 1.05;
      if (out_of_budget(stats)) return Verdict::kTimeout;
    }
  }

  Budget budget_;
  int n_ = 0;
  std::vector<std::uint8_t> value_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<bool> phase_;
  std::vector<std::uint8_t> seen_;
  std::vector<double> activity_;
  VarHeap heap_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<ClauseData> clauses_;
  std::vector<int> learnts_;
  std::vector<ILit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  double max_learnts_ = 1000.0;
  std::uint64_t propagations_ = 0;
  bool trivially_unsat_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SatResult solve(const Cnf& cnf, const Budget& budget) {
  SatResult result;
  Cdcl solver(cnf, budget);
  result.verdict = solver.run(result.stats);
  if (result.verdict == Verdict::kSat) {
    result.model = solver.model();
    if (!check_model(cnf, result.model)) {
      throw std::logic_error("solve: model failed check_model");
    }
    result.env = model_to_env(cnf, result.model);
  }
  return result;
}

}  // namespace ucv::sat
