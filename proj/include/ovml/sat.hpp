#pragma once

// A small CDCL solver: two-watched literals, 1UIP learning, activity-driven
// decisions with phase saving, geometric restarts. Deterministic.

#include <algorithm>
#include <cstdint>
#include <vector>

namespace ovml::sat {

using Lit = int;  // 2*var + sign, sign 1 = negated
inline Lit mk_lit(int var, bool neg = false) { return 2 * var + (neg ? 1 : 0); }
inline Lit neg(Lit l) { return l ^ 1; }
inline int var_of(Lit l) { return l >> 1; }
inline bool sign_of(Lit l) { return l & 1; }

enum class Result { Sat, Unsat, Undef };

class Solver {
 public:
  int new_var() {
    int v = nvars_++;
    assign_.push_back(-1);
    level_.push_back(0);
    reason_.push_back(-1);
    activity_.push_back(0.0);
    phase_.push_back(false);
    seen_.push_back(false);
    watches_.emplace_back();
    watches_.emplace_back();
    return v;
  }

  int num_vars() const { return nvars_; }

  // returns false if the formula became trivially unsatisfiable
  bool add_clause(std::vector<Lit> lits) {
    if (!ok_) return false;
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<Lit> out;
    for (size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == neg(lits[i])) return true;  // tautology
      int8_t v = value(lits[i]);
      if (v == 1 && level_[static_cast<size_t>(var_of(lits[i]))] == 0) return true;
      if (v == 0 && level_[static_cast<size_t>(var_of(lits[i]))] == 0) continue;
      out.push_back(lits[i]);
    }
    if (out.empty()) {
      ok_ = false;
      return false;
    }
    if (out.size() == 1) {
      if (value(out[0]) == 0) {
        ok_ = false;
        return false;
      }
      if (value(out[0]) == -1) {
        enqueue(out[0], -1);
        if (propagate() != -1) {
          ok_ = false;
          return false;
        }
      }
      return true;
    }
    attach(std::move(out));
    return true;
  }

  // max_conflicts <= 0 means unbounded
  Result solve(int64_t max_conflicts = -1) {
    if (!ok_) return Result::Unsat;
    int64_t conflicts = 0;
    int64_t restart_limit = 128;
    int64_t restart_count = 0;
    for (;;) {
      int confl = propagate();
      if (confl != -1) {
        ++conflicts;
        ++restart_count;
        if (decision_level() == 0) return Result::Unsat;
        if (max_conflicts > 0 && conflicts > max_conflicts) return Result::Undef;
        std::vector<Lit> learnt;
        int back_lvl = analyze(confl, learnt);
        backtrack(back_lvl);
        if (learnt.size() == 1) {
          enqueue(learnt[0], -1);
        } else {
          int ci = attach(std::move(learnt));
          enqueue(clauses_[static_cast<size_t>(ci)][0], ci);
        }
        decay_activity();
        if (restart_count >= restart_limit) {
          restart_count = 0;
          restart_limit += restart_limit / 2;
          backtrack(0);
        }
      } else {
        int v = pick_branch();
        if (v == -1) return Result::Sat;
        trail_lim_.push_back(static_cast<int>(trail_.size()));
        enqueue(mk_lit(v, !phase_[static_cast<size_t>(v)]), -1);
      }
    }
  }

  bool model_value(int var) const { return assign_[static_cast<size_t>(var)] == 1; }

  void bump(int var, double amount = 1.0) {
    activity_[static_cast<size_t>(var)] += var_inc_ * amount;
    if (activity_[static_cast<size_t>(var)] > 1e100) rescale();
  }

 private:
  struct Watch {
    int clause;
    Lit blocker;
  };

  int8_t value(Lit l) const {
    int8_t a = assign_[static_cast<size_t>(var_of(l))];
    if (a == -1) return -1;
    return static_cast<int8_t>(a ^ static_cast<int8_t>(sign_of(l)));
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  int attach(std::vector<Lit> lits) {
    int ci = static_cast<int>(clauses_.size());
    watches_[static_cast<size_t>(neg(lits[0]))].push_back({ci, lits[1]});
    watches_[static_cast<size_t>(neg(lits[1]))].push_back({ci, lits[0]});
    clauses_.push_back(std::move(lits));
    return ci;
  }

  void enqueue(Lit l, int reason) {
    int v = var_of(l);
    assign_[static_cast<size_t>(v)] = static_cast<int8_t>(!sign_of(l));
    level_[static_cast<size_t>(v)] = decision_level();
    reason_[static_cast<size_t>(v)] = reason;
    phase_[static_cast<size_t>(v)] = !sign_of(l);
    trail_.push_back(l);
  }

  // returns conflicting clause index or -1
  int propagate() {
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];
      auto& ws = watches_[static_cast<size_t>(p)];
      size_t keep = 0;
      for (size_t i = 0; i < ws.size(); ++i) {
        Watch w = ws[i];
        if (value(w.blocker) == 1) {
          ws[keep++] = w;
          continue;
        }
        auto& c = clauses_[static_cast<size_t>(w.clause)];
        Lit false_lit = neg(p);
        if (c[0] == false_lit) std::swap(c[0], c[1]);
        if (value(c[0]) == 1) {
          ws[keep++] = {w.clause, c[0]};
          continue;
        }
        bool moved = false;
        for (size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != 0) {
            std::swap(c[1], c[k]);
            watches_[static_cast<size_t>(neg(c[1]))].push_back({w.clause, c[0]});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        // unit or conflict
        ws[keep++] = {w.clause, c[0]};
        if (value(c[0]) == 0) {
          for (size_t k = i + 1; k < ws.size(); ++k) ws[keep++] = ws[k];
          ws.resize(keep);
          qhead_ = trail_.size();
          return w.clause;
        }
        enqueue(c[0], w.clause);
      }
      ws.resize(keep);
    }
    return -1;
  }

  int analyze(int confl, std::vector<Lit>& out) {
    out.push_back(0);  // slot for the asserting literal
    int counter = 0;
    Lit p = -1;
    size_t idx = trail_.size();
    int btlevel = 0;
    for (;;) {
      auto& c = clauses_[static_cast<size_t>(confl)];
      for (size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
        Lit q = c[k];
        int v = var_of(q);
        if (!seen_[static_cast<size_t>(v)] && level_[static_cast<size_t>(v)] > 0) {
          seen_[static_cast<size_t>(v)] = true;
          bump(v);
          if (level_[static_cast<size_t>(v)] == decision_level()) {
            ++counter;
          } else {
            out.push_back(q);
            btlevel = std::max(btlevel, level_[static_cast<size_t>(v)]);
          }
        }
      }
      do {
        p = trail_[--idx];
      } while (!seen_[static_cast<size_t>(var_of(p))]);
      seen_[static_cast<size_t>(var_of(p))] = false;
      if (--counter == 0) break;
      confl = reason_[static_cast<size_t>(var_of(p))];
    }
    out[0] = neg(p);
    for (size_t i = 1; i < out.size(); ++i) seen_[static_cast<size_t>(var_of(out[i]))] = false;
    // put a literal of the backtrack level second
    if (out.size() > 1) {
      size_t best = 1;
      for (size_t i = 2; i < out.size(); ++i)
        if (level_[static_cast<size_t>(var_of(out[i]))] >
            level_[static_cast<size_t>(var_of(out[best]))])
          best = i;
      std::swap(out[1], out[best]);
    }
    return out.size() == 1 ? 0 : btlevel;
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    size_t limit = static_cast<size_t>(trail_lim_[static_cast<size_t>(lvl)]);
    for (size_t i = trail_.size(); i > limit; --i)
      assign_[static_cast<size_t>(var_of(trail_[i - 1]))] = -1;
    trail_.resize(limit);
    trail_lim_.resize(static_cast<size_t>(lvl));
    qhead_ = trail_.size();
  }

  int pick_branch() {
    int best = -1;
    double best_act = -1.0;
    for (int v = 0; v < nvars_; ++v)
      if (assign_[static_cast<size_t>(v)] == -1 && activity_[static_cast<size_t>(v)] > best_act) {
        best = v;
        best_act = activity_[static_cast<size_t>(v)];
      }
    return best;
  }

  void decay_activity() {
    var_inc_ /= 0.95;
    if (var_inc_ > 1e100) rescale();
  }
  void rescale() {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }

  int nvars_ = 0;
  bool ok_ = true;
  std::vector<std::vector<Lit>> clauses_;
  std::vector<std::vector<Watch>> watches_;  // per literal
  std::vector<int8_t> assign_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<double> activity_;
  std::vector<bool> phase_;
  std::vector<bool> seen_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  size_t qhead_ = 0;
  double var_inc_ = 1.0;
};

}  // namespace ovml::sat
