#pragma once

// Fusion decision procedures: global consequence by quasistate-set search,
// local consequence by alternation-depth recursion, and finite countermodel
// assembly by grafting component witnesses into a tapered cactus.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovml/bounded.hpp"
#include "ovml/measures.hpp"
#include "ovml/outcome.hpp"
#include "ovml/types.hpp"

namespace ovml {

enum class GlobalStrategy { SubsetEnumeration, EliminationFixpoint, LazyClosure, Auto };

struct FusionConfig {
  DeciderPtr d1, d2;
  DomainMode mode = DomainMode::Expanding;
  GlobalStrategy strategy = GlobalStrategy::SubsetEnumeration;
  size_t subset_limit = 10;      // Auto: subset enumeration up to this many quasistates
  size_t eager_local_limit = 64; // eager quasistate recursion up to this many quasistates
  bool emit_countermodels = false;

  const ComponentDecider& decider(int i) const { return i == 1 ? *d1 : *d2; }

  struct Cache {
    std::mutex mu;
    std::unordered_map<std::string, DecisionOutcome> local;
  };
  std::shared_ptr<Cache> cache = std::make_shared<Cache>();
};

inline void validate_fused_formula(const Formula& f) {
  if (!equality_free(f))
    throw std::invalid_argument("fusion deciders accept equality-free formulas only");
  std::set<std::string> mods;
  collect_modalities(f, mods);
  for (const auto& m : mods)
    if (m != "1" && m != "2") throw std::invalid_argument("unexpected modality " + m);
}

// ---------------------------------------------------------------------------
// Local consequence
// ---------------------------------------------------------------------------

inline DecisionOutcome decide_local_fusion(const FusionConfig& cfg, const Formula& f,
                                           int forced_lead = 0);

namespace detail {

inline std::vector<int> bfs_dist(const Frame& fr, const std::string& mod, int from) {
  std::vector<int> dist(static_cast<size_t>(fr.num_worlds), -1);
  std::vector<int> queue{from};
  dist[static_cast<size_t>(from)] = 0;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int w = queue[qi];
    uint64_t succ = fr.succ(mod, w);
    for (int v = 0; v < fr.num_worlds; ++v)
      if (((succ >> v) & 1) && dist[static_cast<size_t>(v)] < 0) {
        dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(w)] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

// type sets realized at the worlds of a component model, read through sur_i
inline std::set<Quasistate<Formula>> realized_quasistates(const FOKripkeModel& m,
                                                          const BasePtr<Formula>& base, int side,
                                                          const std::vector<int>* within = nullptr) {
  std::vector<Formula> sur_items;
  sur_items.reserve(static_cast<size_t>(base->size()));
  for (int i = 0; i < base->size(); ++i) sur_items.push_back(surrogate_fo(side, base->at(i)));
  Evaluator ev(m);
  std::set<Quasistate<Formula>> out;
  for (int v = 0; v < m.num_worlds(); ++v) {
    if (within && (*within)[static_cast<size_t>(v)] < 0) continue;
    std::set<TypeBits> ts;
    uint64_t dom = m.domains[static_cast<size_t>(v)];
    for (int e = 0; e < kMaxElems; ++e) {
      if (!((dom >> e) & 1)) continue;
      TypeBits bits = 0;
      for (int i = 0; i < base->size(); ++i)
        if ((ev.eval_mask(sur_items[static_cast<size_t>(i)], v) >> e) & 1)
          bits |= Base<Formula>::bit(i);
      ts.insert(bits);
    }
    Quasistate<Formula> q{base, std::vector<TypeBits>(ts.begin(), ts.end())};
    if (!quasistate_ok(*base, q.types))
      throw std::logic_error("realized type set is not a quasistate");
    out.insert(std::move(q));
  }
  return out;
}

struct LocalDecision {
  Verdict verdict = Verdict::Unknown;
  std::optional<FOKripkeModel> witness;  // criterion witness; realized quasistates all accepted
  int witness_world = 0;
  std::string note;
};

inline Formula rejected_premise(const std::set<Quasistate<Formula>>& rejected) {
  std::vector<Formula> neg;
  for (const auto& q : rejected) neg.push_back(mk_not(realisability(q)));
  return conj_all(neg);
}

// The criterion of the local lemma, with the accepted-quasistate disjunction
// represented through the complement: distinct quasistates are mutually
// exclusive and jointly exhaustive, so the disjunction over the accepted ones
// is equivalent to the conjunction of negated rejected ones.
inline Formula local_criterion_rejform(const Formula& f, int lead,
                                       const std::set<Quasistate<Formula>>& rejected) {
  Formula prefix = mk_box_upto(component_modality(lead), md(lead, f),
                               surrogate_fo(lead, rejected_premise(rejected)));
  return mk_implies(prefix, surrogate_fo(lead, f));
}

inline Formula local_criterion_disj(const Formula& f, int lead,
                                    const std::vector<Quasistate<Formula>>& members) {
  Formula prefix = mk_box_upto(component_modality(lead), md(lead, f),
                               surrogate_fo(lead, realisability_disj(members)));
  return mk_implies(prefix, surrogate_fo(lead, f));
}

// Membership in Q_i: the recursive alternation-depth test on ~q-hat.
inline Verdict membership(const FusionConfig& cfg, const Quasistate<Formula>& q, int adp_value) {
  Formula hat = realisability(q);
  if (adp(hat).value != std::max(0, adp_value - 1))
    throw std::logic_error("alternation depth did not decrease along theta");
  DecisionOutcome o = decide_local_fusion(cfg, mk_not(hat));
  return o.verdict;  // Valid: rejected, Invalid: member, Unknown: unresolved
}

// Eager spec-shaped evaluation: enumerate all theta quasistates, recurse on
// each, and ask one criterion query. Used when the base is small.
inline LocalDecision run_local_eager(const FusionConfig& cfg, const Formula& f, int lead,
                                     int adp_value,
                                     const std::vector<Quasistate<Formula>>& all) {
  std::vector<Quasistate<Formula>> members_lo, members_hi;
  bool taint = false;
  for (const auto& q : all) {
    Verdict v = membership(cfg, q, adp_value);
    if (v == Verdict::Invalid) {
      members_lo.push_back(q);
      members_hi.push_back(q);
    } else if (v == Verdict::Unknown) {
      members_hi.push_back(q);
      taint = true;
    }
  }
  auto run = [&](const std::vector<Quasistate<Formula>>& ms) {
    return cfg.decider(lead).decide_local(local_criterion_disj(f, lead, ms));
  };
  DecisionOutcome hi = run(members_hi);
  LocalDecision d;
  if (!taint) {
    d.verdict = hi.verdict;
    d.witness = hi.witness;
    d.witness_world = hi.witness_world;
    d.note = hi.note;
    return d;
  }
  DecisionOutcome lo = run(members_lo);
  if (lo.verdict == hi.verdict && lo.verdict != Verdict::Unknown) {
    d.verdict = lo.verdict;
    if (lo.is(Verdict::Invalid)) {
      d.witness = hi.witness;  // the witness under the larger premise is safe
      d.witness_world = hi.witness_world;
    }
    return d;
  }
  d.note = "quasistate membership unresolved at this bound";
  return d;
}

// Counterexample-guided evaluation: only quasistates realized by candidate
// witnesses are ever tested, and conclusive rejections refine the premise.
inline LocalDecision run_local(const FusionConfig& cfg, const Formula& f, int lead,
                               int adp_value) {
  auto theta_base = make_base<Formula>(theta(lead, subformulas(f)));
  // small bases go the literal route
  try {
    std::vector<Quasistate<Formula>> all =
        enumerate_quasistates(theta_base, cfg.eager_local_limit);
    return run_local_eager(cfg, f, lead, adp_value, all);
  } catch (const std::runtime_error&) {
    // fall through to the guided loop
  }

  std::set<Quasistate<Formula>> rejected;
  bool taint = false;
  const int md_i = md(lead, f);
  const std::string mod = component_modality(lead);
  for (int round = 0; round < 1 << 14; ++round) {
    DecisionOutcome out =
        cfg.decider(lead).decide_local(local_criterion_rejform(f, lead, rejected));
    if (out.is(Verdict::Valid)) {
      LocalDecision d;
      d.verdict = taint ? Verdict::Unknown : Verdict::Valid;
      if (taint) d.note = "quasistate membership unresolved at this bound";
      return d;
    }
    if (out.is(Verdict::Unknown)) {
      LocalDecision d;
      d.note = out.note;
      return d;
    }
    if (!out.witness) {
      LocalDecision d;
      d.note = "component decider returned no witness";
      return d;
    }
    std::vector<int> dist = bfs_dist(out.witness->frame, mod, out.witness_world);
    for (auto& x : dist)
      if (x > md_i) x = -1;
    std::set<Quasistate<Formula>> realized =
        realized_quasistates(*out.witness, theta_base, lead, &dist);
    bool changed = false;
    for (const auto& q : realized) {
      if (rejected.count(q))
        throw std::logic_error("witness realized an already rejected quasistate");
      Verdict v = membership(cfg, q, adp_value);
      if (v == Verdict::Valid) {
        rejected.insert(q);
        changed = true;
      } else if (v == Verdict::Unknown) {
        rejected.insert(q);  // the accepted resolution would already be Invalid
        changed = true;
        taint = true;
      }
    }
    if (!changed) {
      LocalDecision d;
      d.verdict = Verdict::Invalid;
      d.witness = *out.witness;
      d.witness_world = out.witness_world;
      return d;
    }
  }
  LocalDecision d;
  d.note = "local refinement did not converge";
  return d;
}

}  // namespace detail

inline DecisionOutcome decide_local_fusion(const FusionConfig& cfg, const Formula& f,
                                           int forced_lead) {
  validate_fused_formula(f);
  std::string key = std::to_string(forced_lead) + ":" + print(f);
  {
    std::lock_guard<std::mutex> lock(cfg.cache->mu);
    auto it = cfg.cache->local.find(key);
    if (it != cfg.cache->local.end()) return it->second;
  }

  Adp a = adp(f);
  int lead = forced_lead ? forced_lead : a.leading;
  if (forced_lead && adp_i(forced_lead, f) != a.value)
    throw std::logic_error("forced lead does not attain the minimal alternation depth");

  DecisionOutcome out;
  if (a.value == 0) {
    out = cfg.decider(lead).decide_local(f);
  } else {
    try {
      detail::LocalDecision d = detail::run_local(cfg, f, lead, a.value);
      out.verdict = d.verdict;
      out.note = d.note;
      if (out.is(Verdict::Invalid)) out.note = "lead component " + std::to_string(lead);
    } catch (const std::runtime_error& e) {
      out = DecisionOutcome::unknown(std::string("resource limit: ") + e.what());
    }
  }

  std::lock_guard<std::mutex> lock(cfg.cache->mu);
  cfg.cache->local.emplace(key, out);
  return out;
}

// ---------------------------------------------------------------------------
// Global consequence
// ---------------------------------------------------------------------------

namespace detail {

struct GlobalConditions {
  const FusionConfig& cfg;
  Formula phi, psi;

  // verdicts of the three non-derivability conditions; Invalid = holds
  Verdict c1(const std::vector<Quasistate<Formula>>& q_set) const {
    Formula premise = mk_and(surrogate_fo(1, phi), surrogate_fo(1, realisability_disj(q_set)));
    return cfg.d1->decide_global(premise, surrogate_fo(1, psi)).verdict;
  }
  Verdict c2(const std::vector<Quasistate<Formula>>& q_set, const Quasistate<Formula>& q) const {
    Formula premise = mk_and(surrogate_fo(1, phi), surrogate_fo(1, realisability_disj(q_set)));
    return cfg.d1->decide_global(premise, mk_not(surrogate_fo(1, realisability(q)))).verdict;
  }
  Verdict c3(const std::vector<Quasistate<Formula>>& q_set, const Quasistate<Formula>& q) const {
    Formula premise = surrogate_fo(2, realisability_disj(q_set));
    return cfg.d2->decide_global(premise, mk_not(surrogate_fo(2, realisability(q)))).verdict;
  }
};

inline std::vector<std::string> dump_certificate(const std::vector<Quasistate<Formula>>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(dump_quasistate(q));
  return out;
}

inline DecisionOutcome global_by_subsets(const GlobalConditions& gc,
                                         const std::vector<Quasistate<Formula>>& all) {
  if (all.size() > 24) throw std::runtime_error("subset enumeration infeasible at this size");
  bool tainted = false;
  for (uint64_t mask = 0; mask < (uint64_t{1} << all.size()); ++mask) {
    std::vector<Quasistate<Formula>> q_set;
    for (size_t j = 0; j < all.size(); ++j)
      if (mask & (uint64_t{1} << j)) q_set.push_back(all[j]);
    bool unknown_here = false, failed = false;
    auto fold = [&](Verdict v) {
      if (v == Verdict::Valid) failed = true;          // condition conclusively violated
      if (v == Verdict::Unknown) unknown_here = true;  // cannot confirm this candidate
    };
    fold(gc.c1(q_set));
    for (const auto& q : q_set) {
      if (failed) break;
      fold(gc.c2(q_set, q));
      fold(gc.c3(q_set, q));
    }
    if (failed) continue;
    if (unknown_here) {
      tainted = true;
      continue;
    }
    DecisionOutcome out = DecisionOutcome::invalid();
    out.certificate = dump_certificate(q_set);
    out.note = "witnessing quasistate set of size " + std::to_string(q_set.size());
    return out;
  }
  if (tainted)
    return DecisionOutcome::unknown("some quasistate-set candidates were unresolved");
  return DecisionOutcome::valid();
}

inline DecisionOutcome global_by_fixpoint(const GlobalConditions& gc,
                                          const std::vector<Quasistate<Formula>>& all) {
  std::vector<Quasistate<Formula>> live = all;
  bool tainted = false;
  for (;;) {
    bool changed = false;
    bool pass_taint = false;
    std::vector<Quasistate<Formula>> next;
    for (const auto& q : live) {
      Verdict v2 = gc.c2(live, q);
      Verdict v3 = v2 == Verdict::Valid ? Verdict::Valid : gc.c3(live, q);
      if (v2 == Verdict::Valid || v3 == Verdict::Valid) {
        changed = true;  // conclusively not co-realisable, eliminate
        continue;
      }
      if (v2 == Verdict::Unknown || v3 == Verdict::Unknown) pass_taint = true;
      next.push_back(q);
    }
    live.swap(next);
    if (!changed) {
      tainted = pass_taint;
      break;
    }
  }
  Verdict v1 = gc.c1(live);
  if (v1 == Verdict::Valid) return DecisionOutcome::valid();  // monotone in the candidate set
  if (v1 == Verdict::Invalid && !tainted) {
    DecisionOutcome out = DecisionOutcome::invalid();
    out.certificate = dump_certificate(live);
    out.note = "witnessing quasistate set of size " + std::to_string(live.size());
    return out;
  }
  return DecisionOutcome::unknown("fixpoint left unresolved component queries");
}

// Lazy pool closure: work only with quasistates realized by component
// witnesses, rejecting those whose realizability query is unsatisfiable.
// A closed, fully verified pool witnesses (C1)-(C3) on its own; an
// unsatisfiable (C1) query with partially known rejections proves validity
// by monotonicity of the three conditions in the candidate set.
inline DecisionOutcome global_by_lazy(const FusionConfig& cfg, const Formula& phi,
                                      const Formula& psi, const BasePtr<Formula>& base) {
  std::set<Quasistate<Formula>> rejected;
  bool taint = false;
  auto premise1 = [&] {
    return mk_and(surrogate_fo(1, phi), surrogate_fo(1, rejected_premise(rejected)));
  };
  auto premise2 = [&] { return surrogate_fo(2, rejected_premise(rejected)); };

  for (int round = 0; round < 1 << 14; ++round) {
    DecisionOutcome c1 = cfg.d1->decide_global(premise1(), surrogate_fo(1, psi));
    if (c1.is(Verdict::Valid))
      return taint ? DecisionOutcome::unknown("unresolved rejections at this bound")
                   : DecisionOutcome::valid();
    if (c1.is(Verdict::Unknown)) return DecisionOutcome::unknown(c1.note);
    if (!c1.witness) return DecisionOutcome::unknown("component decider returned no witness");

    std::set<Quasistate<Formula>> pool = realized_quasistates(*c1.witness, base, 1);
    std::vector<Quasistate<Formula>> work(pool.begin(), pool.end());
    bool restart = false;
    bool round_taint = false;
    while (!work.empty() && !restart) {
      Quasistate<Formula> q = work.back();
      work.pop_back();
      for (int side = 1; side <= 2 && !restart; ++side) {
        Formula goal = mk_not(surrogate_fo(side, realisability(q)));
        DecisionOutcome o = side == 1 ? cfg.d1->decide_global(premise1(), goal)
                                      : cfg.d2->decide_global(premise2(), goal);
        if (o.is(Verdict::Valid)) {
          rejected.insert(q);
          restart = true;
          break;
        }
        if (o.is(Verdict::Unknown)) {
          round_taint = true;
          continue;
        }
        if (!o.witness) return DecisionOutcome::unknown("component decider returned no witness");
        for (const auto& nq : realized_quasistates(*o.witness, base, side))
          if (pool.insert(nq).second) work.push_back(nq);
      }
    }
    if (restart) continue;
    if (round_taint || taint)
      return DecisionOutcome::unknown("unresolved co-realisability at this bound");
    DecisionOutcome out = DecisionOutcome::invalid();
    out.certificate = dump_certificate(std::vector<Quasistate<Formula>>(pool.begin(), pool.end()));
    out.note = "witnessing quasistate set of size " + std::to_string(pool.size());
    return out;
  }
  return DecisionOutcome::unknown("global refinement did not converge");
}

}  // namespace detail

inline DecisionOutcome decide_global_fusion(const FusionConfig& cfg, const Formula& phi,
                                            const Formula& psi) {
  validate_fused_formula(phi);
  validate_fused_formula(psi);
  try {
    FormulaSet closed = subformulas(std::vector<Formula>{phi, psi});
    auto base = make_base<Formula>(closed);
    detail::GlobalConditions gc{cfg, phi, psi};
    auto enumerate_all = [&](size_t cap) {
      return enumerate_quasistates(base, cap);
    };
    switch (cfg.strategy) {
      case GlobalStrategy::SubsetEnumeration:
        return detail::global_by_subsets(gc, enumerate_all(size_t{1} << 22));
      case GlobalStrategy::EliminationFixpoint:
        return detail::global_by_fixpoint(gc, enumerate_all(size_t{1} << 22));
      case GlobalStrategy::LazyClosure: return detail::global_by_lazy(cfg, phi, psi, base);
      case GlobalStrategy::Auto: {
        std::optional<std::vector<Quasistate<Formula>>> all;
        try {
          all = enumerate_all(cfg.subset_limit);
        } catch (const std::runtime_error&) {
        }
        if (all && all->size() <= cfg.subset_limit) return detail::global_by_subsets(gc, *all);
        return detail::global_by_lazy(cfg, phi, psi, base);
      }
    }
  } catch (const std::runtime_error& e) {
    return DecisionOutcome::unknown(std::string("resource limit: ") + e.what());
  }
  return DecisionOutcome::unknown("unreachable");
}

// ---------------------------------------------------------------------------
// Tapered runs and cacti
// ---------------------------------------------------------------------------

struct TaperedRun {
  // world -> (slice base, signs); the domain is the key set
  std::map<int, std::pair<BasePtr<Formula>, TypeBits>> values;
  bool defined_at(int w) const { return values.count(w) != 0; }
};

struct Cactus {
  FOKripkeModel model;
  int root = 0;
  std::vector<TaperedRun> runs;  // one per element, index = element id
  std::set<int> thorns;          // worlds that received no graft yet
  int stage = 0;                 // component grafted last
  BasePtr<Formula> root_base;
  std::map<int, TypeBits> root_types;  // element -> signs over root_base
};

namespace detail {

class CactusBuilder {
 public:
  explicit CactusBuilder(const FusionConfig& cfg) : cfg_(cfg) {}

  std::optional<Cactus> build(const Formula& f, int forced_lead, bool top) {
    std::string key = std::to_string(forced_lead) + (top ? "T:" : "R:") + print(f);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      if (!it->second) return std::nullopt;
      return *it->second;
    }
    std::optional<Cactus> out;
    try {
      out = build_inner(f, forced_lead, top);
    } catch (const std::runtime_error&) {
      out = std::nullopt;
    }
    memo_[key] = out ? std::make_shared<Cactus>(*out) : nullptr;
    return out;
  }

 private:
  const FusionConfig& cfg_;
  std::map<std::string, std::shared_ptr<Cactus>> memo_;

  bool unit_loop(int component) const {
    const auto& d = cfg_.decider(component);
    if (!d.frame_class)
      throw std::invalid_argument("countermodel building needs deciders with frame classes");
    return d.frame_class->unit_reflexive();
  }

  // degenerate graft: cover a world in the other component's projection
  void pad_world(FOKripkeModel& m, int component, int w) const {
    auto& rows = m.frame.relation(component_modality(component));
    if (unit_loop(component)) rows[static_cast<size_t>(w)] |= uint64_t{1} << w;
  }

  std::optional<Cactus> base_case(const Formula& f, int lead, bool top) {
    DecisionOutcome out = cfg_.decider(lead).decide_local(f);
    if (!out.is(Verdict::Invalid) || !out.witness) return std::nullopt;
    Cactus c;
    c.model = *out.witness;
    normalize_elements(c.model);
    c.model.mode = cfg_.mode;
    c.root = out.witness_world;
    c.stage = lead;
    c.model.frame.relation(component_modality(other_component(lead)));
    for (int w = 0; w < c.model.num_worlds(); ++w) {
      if (!top && w == c.root) continue;
      pad_world(c.model, other_component(lead), w);
    }
    FormulaSet phi_set = subformulas(f);
    c.root_base = make_base<Formula>(phi_set);
    int md_lead = md(lead, f);
    std::vector<int> dist = bfs_dist(c.model.frame, component_modality(lead), c.root);
    std::vector<BasePtr<Formula>> slices(static_cast<size_t>(c.model.num_worlds()));
    for (int w = 0; w < c.model.num_worlds(); ++w) {
      int h = dist[static_cast<size_t>(w)] < 0 ? -1 : md_lead - dist[static_cast<size_t>(w)];
      slices[static_cast<size_t>(w)] = make_base<Formula>(gamma<Formula>(lead, h, phi_set));
    }
    Evaluator ev(c.model);
    auto type_at = [&](const BasePtr<Formula>& base, int w, int e) {
      TypeBits bits = 0;
      for (int i = 0; i < base->size(); ++i)
        if ((ev.eval_mask(base->at(i), w) >> e) & 1) bits |= Base<Formula>::bit(i);
      return bits;
    };
    int n_elems = c.model.num_elems();
    for (int e = 0; e < n_elems; ++e) {
      TaperedRun r;
      for (int w = 0; w < c.model.num_worlds(); ++w)
        if ((c.model.domains[static_cast<size_t>(w)] >> e) & 1)
          r.values[w] = {slices[static_cast<size_t>(w)],
                         type_at(slices[static_cast<size_t>(w)], w, e)};
      c.runs.push_back(std::move(r));
      if ((c.model.domains[static_cast<size_t>(c.root)] >> e) & 1)
        c.root_types[e] = type_at(c.root_base, c.root, e);
    }
    return c;
  }

  std::optional<Cactus> build_inner(const Formula& f, int forced_lead, bool top) {
    Adp a = adp(f);
    int lead = forced_lead ? forced_lead : a.leading;
    if (forced_lead && adp_i(forced_lead, f) != a.value) return std::nullopt;
    if (a.value == 0) return base_case(f, lead, top);

    LocalDecision ld = run_local(cfg_, f, lead, a.value);
    if (ld.verdict != Verdict::Invalid || !ld.witness) return std::nullopt;

    FOKripkeModel host = *ld.witness;
    normalize_elements(host);
    int w0 = ld.witness_world;
    const std::string mod_i = component_modality(lead);
    const std::string mod_j = component_modality(other_component(lead));
    FormulaSet phi_set = subformulas(f);
    FormulaSet theta_set = theta(lead, phi_set);
    int md_i = md(lead, f);
    std::vector<int> dist = bfs_dist(host.frame, mod_i, w0);

    // host element types over the slice at each world, read through sur_i
    std::map<Formula, Formula, FormulaLess> sur_of;
    for (const Formula& g : phi_set) sur_of.emplace(g, surrogate_fo(lead, g));
    Evaluator hev(host);

    struct Graft {
      int world;
      BasePtr<Formula> slice_base;           // theta ∩ gamma slice
      std::map<int, TypeBits> host_types;    // host element -> slice type
      Cactus sub;                            // relabeled copy
      std::map<int, std::vector<int>> continuation;  // host element -> sub elements
    };
    std::vector<Graft> grafts;
    std::vector<std::pair<int, BasePtr<Formula>>> host_bases(
        static_cast<size_t>(host.num_worlds()));

    for (int v = 0; v < host.num_worlds(); ++v) {
      int h = dist[static_cast<size_t>(v)] < 0 ? -1 : md_i - dist[static_cast<size_t>(v)];
      FormulaSet slice = h < 0 ? FormulaSet{} : gamma<Formula>(lead, h, phi_set);
      host_bases[static_cast<size_t>(v)] = {h, make_base<Formula>(slice)};
    }

    for (int v = 0; v < host.num_worlds(); ++v) {
      int h = host_bases[static_cast<size_t>(v)].first;
      if (h < 0) continue;
      if (!top && v == w0) continue;
      FormulaSet gslice = gamma<Formula>(lead, h, phi_set);
      FormulaSet slice_set;
      for (const Formula& g : theta_set)
        if (gslice.count(g)) slice_set.insert(g);
      auto slice_base = make_base<Formula>(slice_set);

      Graft g;
      g.world = v;
      g.slice_base = slice_base;
      std::set<TypeBits> qbits;
      for (int e = 0; e < kMaxElems; ++e) {
        if (!((host.domains[static_cast<size_t>(v)] >> e) & 1)) continue;
        TypeBits bits = 0;
        for (int i = 0; i < slice_base->size(); ++i)
          if ((hev.eval_mask(sur_of.at(slice_base->at(i)), v) >> e) & 1)
            bits |= Base<Formula>::bit(i);
        g.host_types[e] = bits;
        qbits.insert(bits);
      }
      Quasistate<Formula> qv{slice_base, std::vector<TypeBits>(qbits.begin(), qbits.end())};
      if (!quasistate_ok(*slice_base, qv.types))
        throw std::logic_error("host slice types do not form a quasistate");
      Formula goal = mk_not(realisability(qv));
      std::optional<Cactus> sub = build(goal, other_component(lead), false);
      if (!sub) return std::nullopt;
      g.sub = *sub;
      grafts.push_back(std::move(g));
    }

    // assemble: host worlds keep their ids, sub regions are appended
    Cactus c;
    c.model.mode = cfg_.mode;
    c.stage = lead;
    c.root = w0;
    int total_worlds = host.num_worlds();
    for (auto& g : grafts) total_worlds += g.sub.model.num_worlds() - 1;
    if (total_worlds > kMaxWorlds) return std::nullopt;
    c.model.frame.num_worlds = total_worlds;
    c.model.frame.relation(mod_i);
    c.model.frame.relation(mod_j);
    c.model.domains.assign(static_cast<size_t>(total_worlds), 0);

    // host relation of the lead component
    if (const auto* rows = host.frame.relation_if(mod_i))
      for (int w = 0; w < host.num_worlds(); ++w)
        c.model.frame.relation(mod_i)[static_cast<size_t>(w)] = (*rows)[static_cast<size_t>(w)];

    // world maps for sub regions
    int next_world = host.num_worlds();
    std::vector<std::vector<int>> wmap(grafts.size());
    for (size_t gi = 0; gi < grafts.size(); ++gi) {
      const Cactus& sub = grafts[gi].sub;
      wmap[gi].assign(static_cast<size_t>(sub.model.num_worlds()), -1);
      for (int w = 0; w < sub.model.num_worlds(); ++w)
        wmap[gi][static_cast<size_t>(w)] = (w == sub.root) ? grafts[gi].world : next_world++;
      for (const auto& [id, rows] : sub.model.frame.rel) {
        auto& target = c.model.frame.relation(id);
        for (int w = 0; w < sub.model.num_worlds(); ++w)
          for (int v2 = 0; v2 < sub.model.num_worlds(); ++v2)
            if ((rows[static_cast<size_t>(w)] >> v2) & 1)
              target[static_cast<size_t>(wmap[gi][static_cast<size_t>(w)])] |=
                  uint64_t{1} << wmap[gi][static_cast<size_t>(v2)];
      }
    }

    // pad worlds that received no graft
    std::set<int> grafted;
    for (const auto& g : grafts) grafted.insert(g.world);
    for (int v = 0; v < host.num_worlds(); ++v) {
      if (grafted.count(v)) continue;
      if (!top && v == w0) continue;
      pad_world(c.model, other_component(lead), v);
    }

    // continuation choices: match sub root elements to host elements by type
    for (auto& g : grafts) {
      std::map<int, TypeBits> sub_types;  // sub element -> slice type
      for (const auto& [s, bits] : g.sub.root_types) {
        TypeSet<Formula> full{g.sub.root_base, bits};
        sub_types[s] = restrict_type(full, g.slice_base).bits;
      }
      std::set<TypeBits> host_set, sub_set;
      for (auto& [e, b] : g.host_types) host_set.insert(b);
      for (auto& [s, b] : sub_types) sub_set.insert(b);
      if (host_set != sub_set)
        throw std::logic_error("graft compatibility failed: root quasistates differ");
      // partner each sub element with the first matching host element
      for (const auto& [s, b] : sub_types) {
        int partner = -1;
        for (const auto& [e, hb] : g.host_types)
          if (hb == b) {
            partner = e;
            break;
          }
        g.continuation[partner].push_back(s);
      }
      // hosts with no partnered sub element still need one continuation
      for (const auto& [e, hb] : g.host_types)
        if (!g.continuation.count(e)) {
          for (const auto& [s, b] : sub_types)
            if (b == hb) {
              g.continuation[e].push_back(s);
              break;
            }
        }
    }

    // merged elements: copies of host elements, zipped over continuations
    struct MergedElem {
      int host_e;
      int copy;
    };
    std::vector<MergedElem> elems;
    std::map<int, int> copies_of;
    for (int e = 0; e < kMaxElems; ++e) {
      uint64_t any = 0;
      for (uint64_t d : host.domains) any |= d;
      if (!((any >> e) & 1)) continue;
      size_t copies = 1;
      for (const auto& g : grafts) {
        auto it = g.continuation.find(e);
        if (it != g.continuation.end()) copies = std::max(copies, it->second.size());
      }
      copies_of[e] = static_cast<int>(copies);
      for (size_t j = 0; j < copies; ++j) elems.push_back({e, static_cast<int>(j)});
    }
    // sub-only elements (absent from the sub root; only in expanding mode)
    struct SubOnly {
      size_t graft;
      int sub_e;
    };
    std::vector<SubOnly> sub_only;
    for (size_t gi = 0; gi < grafts.size(); ++gi) {
      const Cactus& sub = grafts[gi].sub;
      uint64_t any = 0;
      for (uint64_t d : sub.model.domains) any |= d;
      for (int s = 0; s < kMaxElems; ++s) {
        if (!((any >> s) & 1)) continue;
        if (sub.root_types.count(s)) continue;
        if (cfg_.mode == DomainMode::Constant)
          throw std::logic_error("constant-domain subcactus has partial elements");
        sub_only.push_back({gi, s});
      }
    }
    if (elems.size() + sub_only.size() > kMaxElems) return std::nullopt;

    auto continuation_of = [&](const Graft& g, int host_e, int copy) -> int {
      auto it = g.continuation.find(host_e);
      if (it == g.continuation.end() || it->second.empty()) return -1;
      size_t j = std::min(static_cast<size_t>(copy), it->second.size() - 1);
      return it->second[j];
    };

    // domains and predicate interpretations
    std::set<std::string> pred_names;
    for (const Formula& g : phi_set)
      if (g->kind == Conn::Atom) pred_names.insert(g->name);
    for (const auto& g : grafts)
      for (const auto& [p, _] : g.sub.model.preds) pred_names.insert(p);
    for (const auto& p : pred_names)
      c.model.preds[p].assign(static_cast<size_t>(total_worlds), 0);

    auto set_elem = [&](int world, int elem_id, bool in_domain) {
      if (in_domain) c.model.domains[static_cast<size_t>(world)] |= uint64_t{1} << elem_id;
    };

    for (size_t idx = 0; idx < elems.size(); ++idx) {
      const MergedElem& me = elems[idx];
      TaperedRun run;
      for (int w = 0; w < host.num_worlds(); ++w) {
        if (!((host.domains[static_cast<size_t>(w)] >> me.host_e) & 1)) continue;
        set_elem(w, static_cast<int>(idx), true);
        for (const auto& p : pred_names)
          if ((host.pred_mask(p, w) >> me.host_e) & 1)
            c.model.preds[p][static_cast<size_t>(w)] |= uint64_t{1} << idx;
        // run value: slice type at this world
        const auto& hb = host_bases[static_cast<size_t>(w)];
        TypeBits bits = 0;
        for (int i = 0; i < hb.second->size(); ++i)
          if ((hev.eval_mask(sur_of.at(hb.second->at(i)), w) >> me.host_e) & 1)
            bits |= Base<Formula>::bit(i);
        run.values[w] = {hb.second, bits};
      }
      for (size_t gi = 0; gi < grafts.size(); ++gi) {
        const Graft& g = grafts[gi];
        if (!((host.domains[static_cast<size_t>(g.world)] >> me.host_e) & 1)) continue;
        int s = continuation_of(g, me.host_e, me.copy);
        if (s < 0) throw std::logic_error("missing continuation for a host element");
        const Cactus& sub = g.sub;
        const TaperedRun& srun = sub.runs[static_cast<size_t>(sub_elem_index(sub, s))];
        for (int w = 0; w < sub.model.num_worlds(); ++w) {
          if (!((sub.model.domains[static_cast<size_t>(w)] >> s) & 1)) continue;
          int nw = wmap[gi][static_cast<size_t>(w)];
          if (w != sub.root) {
            set_elem(nw, static_cast<int>(idx), true);
            for (const auto& p : pred_names) {
              auto it = sub.model.preds.find(p);
              if (it != sub.model.preds.end() && ((it->second[static_cast<size_t>(w)] >> s) & 1))
                c.model.preds[p][static_cast<size_t>(nw)] |= uint64_t{1} << idx;
            }
          }
          if (w != sub.root && srun.defined_at(w)) run.values[nw] = srun.values.at(w);
        }
      }
      c.runs.push_back(std::move(run));
    }
    for (size_t so = 0; so < sub_only.size(); ++so) {
      size_t idx = elems.size() + so;
      const Graft& g = grafts[sub_only[so].graft];
      const Cactus& sub = g.sub;
      int s = sub_only[so].sub_e;
      TaperedRun run;
      const TaperedRun& srun = sub.runs[static_cast<size_t>(sub_elem_index(sub, s))];
      for (int w = 0; w < sub.model.num_worlds(); ++w) {
        if (!((sub.model.domains[static_cast<size_t>(w)] >> s) & 1)) continue;
        int nw = wmap[sub_only[so].graft][static_cast<size_t>(w)];
        set_elem(nw, static_cast<int>(idx), true);
        for (const auto& p : pred_names) {
          auto it = sub.model.preds.find(p);
          if (it != sub.model.preds.end() && ((it->second[static_cast<size_t>(w)] >> s) & 1))
            c.model.preds[p][static_cast<size_t>(nw)] |= uint64_t{1} << idx;
        }
        if (srun.defined_at(w)) run.values[nw] = srun.values.at(w);
      }
      c.runs.push_back(std::move(run));
    }

    // root types over the full subformula base
    c.root_base = make_base<Formula>(phi_set);
    for (size_t idx = 0; idx < elems.size(); ++idx) {
      const MergedElem& me = elems[idx];
      if (!((host.domains[static_cast<size_t>(w0)] >> me.host_e) & 1)) continue;
      TypeBits bits = 0;
      for (int i = 0; i < c.root_base->size(); ++i)
        if ((hev.eval_mask(sur_of.at(c.root_base->at(i)), w0) >> me.host_e) & 1)
          bits |= Base<Formula>::bit(i);
      c.root_types[static_cast<int>(idx)] = bits;
    }

    std::string why;
    if (!validate(c.model, &why)) throw std::logic_error("assembled cactus model invalid: " + why);
    return c;
  }

  static int sub_elem_index(const Cactus& sub, int elem) {
    // runs are indexed by element id in construction order; element ids are
    // dense from 0, so the run index equals the element id
    (void)sub;
    return elem;
  }
};

}  // namespace detail

// Finite countermodel for an invalid local query, or nothing when a component
// witness is unavailable.
inline std::optional<std::pair<FOKripkeModel, int>> build_countermodel_local(
    const FusionConfig& cfg, const Formula& f) {
  validate_fused_formula(f);
  detail::CactusBuilder builder(cfg);
  std::optional<Cactus> c = builder.build(f, 0, true);
  if (!c) return std::nullopt;
  std::string why;
  if (!validate(c->model, &why))
    throw std::logic_error("countermodel failed validation: " + why);
  if (holds_at(c->model, c->root, f))
    throw std::logic_error("countermodel fails to refute the query");
  return std::make_pair(c->model, c->root);
}

inline std::optional<Cactus> build_cactus_local(const FusionConfig& cfg, const Formula& f) {
  validate_fused_formula(f);
  detail::CactusBuilder builder(cfg);
  return builder.build(f, 0, true);
}

// ---------------------------------------------------------------------------
// The global-fmp counterexample
// ---------------------------------------------------------------------------

struct GfmpCounterexample {
  Formula phi;
  // k-step finite prefix with a frontier; satisfies phi at all non-frontier
  // worlds over a two-component frame
  std::function<FOKripkeModel(int)> prefix;
};

inline GfmpCounterexample global_fmp_counterexample() {
  Formula q = mk_atom("Q");
  Formula c1 = mk_forall(mk_ddiamond(kNavLetter, q));
  Formula c2 = mk_implies(mk_exists(q), mk_exists(mk_not(q)));
  Formula c3 = mk_forall(mk_implies(q, mk_dbox(kNavLetter, q)));
  GfmpCounterexample out;
  out.phi = mk_and(mk_and(c1, c2), c3);
  out.prefix = [](int k) {
    // navigation tree: depth-j worlds carry the j-subsets of {0..k}, each
    // with one intermediate world; targets add one element
    int n_elems = k + 1;
    std::vector<uint64_t> subsets;
    std::map<uint64_t, int> windex;  // subset -> w-node id
    for (uint64_t s = 0; s < (uint64_t{1} << n_elems); ++s)
      if (__builtin_popcountll(s) <= k) {
        windex[s] = static_cast<int>(2 * subsets.size());
        subsets.push_back(s);
      }
    FOKripkeModel m;
    int n = static_cast<int>(2 * subsets.size());  // w-node 2i, v-node 2i+1
    if (n > kMaxWorlds) throw std::invalid_argument("prefix too deep");
    m.frame.num_worlds = n;
    m.frame.relation("1");
    m.frame.relation("2");
    m.mode = DomainMode::Constant;
    m.domains.assign(static_cast<size_t>(n), (uint64_t{1} << n_elems) - 1);
    m.preds["Q"].assign(static_cast<size_t>(n), 0);
    m.preds[kNavLetter].assign(static_cast<size_t>(n), 0);
    for (size_t i = 0; i < subsets.size(); ++i) {
      uint64_t s = subsets[i];
      int w = static_cast<int>(2 * i), v = w + 1;
      m.frame.add_edge("1", w, v);
      m.preds["Q"][static_cast<size_t>(w)] = s;
      m.preds["Q"][static_cast<size_t>(v)] = s;
      m.preds[kNavLetter][static_cast<size_t>(w)] = (uint64_t{1} << n_elems) - 1;
      int depth = __builtin_popcountll(s);
      if (depth < k) {
        for (int e = 0; e < n_elems; ++e)
          if (!((s >> e) & 1)) m.frame.add_edge("2", v, windex.at(s | (uint64_t{1} << e)));
      }
      if (depth >= k) m.frontier |= uint64_t{1} << w;
      m.frontier |= uint64_t{1} << v;  // intermediates are never checked
    }
    return m;
  };
  return out;
}

}  // namespace ovml
