#pragma once

// Fusions of propositional modal logics sharing an S5 modality: the global
// criterion over quasistate sets and the local criterion with E-relative
// distance and the iterated []E []i []E prefix. The machinery mirrors the
// first-order pipeline with types over propositional bases and E-classes in
// place of worlds.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovml/measures.hpp"
#include "ovml/outcome.hpp"
#include "ovml/prop_bounded.hpp"
#include "ovml/types.hpp"

namespace ovml {

struct SharedS5Config {
  PropDeciderPtr d1, d2;
  std::string mod_e = kSharedS5;
  GlobalStrategy strategy = GlobalStrategy::Auto;
  size_t subset_limit = 10;
  size_t eager_local_limit = 64;

  const PropDecider& decider(int i) const { return i == 1 ? *d1 : *d2; }

  struct Cache {
    std::mutex mu;
    std::unordered_map<std::string, PropOutcome> local;
  };
  std::shared_ptr<Cache> cache = std::make_shared<Cache>();
};

inline void validate_shared_formula(const SharedS5Config& cfg, const PropFormula& f) {
  std::set<std::string> mods;
  collect_modalities(f, mods);
  for (const auto& m : mods)
    if (m != "1" && m != "2" && m != cfg.mod_e)
      throw std::invalid_argument("unexpected modality " + m);
}

inline PropOutcome decide_local_shared_s5(const SharedS5Config& cfg, const PropFormula& f);

namespace detail {

// E-classes of a model whose E relation is an equivalence.
inline std::vector<std::vector<int>> e_classes(const Frame& fr, const std::string& mod_e) {
  std::vector<int> cls(static_cast<size_t>(fr.num_worlds), -1);
  std::vector<std::vector<int>> out;
  for (int w = 0; w < fr.num_worlds; ++w) {
    if (cls[static_cast<size_t>(w)] >= 0) continue;
    int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{w};
    cls[static_cast<size_t>(w)] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      out[static_cast<size_t>(id)].push_back(u);
      uint64_t succ = fr.succ(mod_e, u);
      for (int v = 0; v < fr.num_worlds; ++v)
        if (((succ >> v) & 1) && cls[static_cast<size_t>(v)] < 0) {
          cls[static_cast<size_t>(v)] = id;
          stack.push_back(v);
        }
    }
  }
  return out;
}

// shortest path between E-classes along E;R_i;E steps
inline std::vector<int> class_dist(const Frame& fr, const std::string& mod_i,
                                   const std::vector<std::vector<int>>& classes, int from_class) {
  std::vector<int> class_of(static_cast<size_t>(fr.num_worlds), -1);
  for (size_t c = 0; c < classes.size(); ++c)
    for (int w : classes[c]) class_of[static_cast<size_t>(w)] = static_cast<int>(c);
  std::vector<int> dist(classes.size(), -1);
  std::vector<int> queue{from_class};
  dist[static_cast<size_t>(from_class)] = 0;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int c = queue[qi];
    for (int w : classes[static_cast<size_t>(c)]) {
      uint64_t succ = fr.succ(mod_i, w);
      for (int v = 0; v < fr.num_worlds; ++v)
        if ((succ >> v) & 1) {
          int c2 = class_of[static_cast<size_t>(v)];
          if (c2 >= 0 && dist[static_cast<size_t>(c2)] < 0) {
            dist[static_cast<size_t>(c2)] = dist[static_cast<size_t>(c)] + 1;
            queue.push_back(c2);
          }
        }
    }
  }
  return dist;
}

// quasistates realized by the E-classes of a component witness, read through
// the side's surrogate translation
inline std::set<Quasistate<PropFormula>> realized_prop_quasistates(
    const PropKripkeModel& m, const BasePtr<PropFormula>& base, int side,
    const std::string& mod_e, const std::vector<int>* class_filter = nullptr) {
  std::vector<PropFormula> sur_items;
  for (int i = 0; i < base->size(); ++i) sur_items.push_back(surrogate_prop(side, base->at(i)));
  PropEvaluator ev(m);
  std::vector<std::vector<int>> classes = e_classes(m.frame, mod_e);
  std::set<Quasistate<PropFormula>> out;
  for (size_t c = 0; c < classes.size(); ++c) {
    if (class_filter && (*class_filter)[c] < 0) continue;
    std::set<TypeBits> ts;
    for (int w : classes[c]) {
      TypeBits bits = 0;
      for (int i = 0; i < base->size(); ++i)
        if ((ev.eval(sur_items[static_cast<size_t>(i)]) >> w) & 1) bits |= Base<PropFormula>::bit(i);
      ts.insert(bits);
    }
    Quasistate<PropFormula> q{base, std::vector<TypeBits>(ts.begin(), ts.end())};
    if (!quasistate_ok(*base, q.types))
      throw std::logic_error("realized class types are not a quasistate");
    out.insert(std::move(q));
  }
  return out;
}

inline PropFormula rejected_premise_prop(const std::set<Quasistate<PropFormula>>& rejected) {
  std::vector<PropFormula> neg;
  for (const auto& q : rejected) neg.push_back(mk_pnot(realisability(q)));
  return pconj_all(neg);
}

inline PropFormula shared_criterion_rejform(const SharedS5Config& cfg, const PropFormula& f,
                                            int lead,
                                            const std::set<Quasistate<PropFormula>>& rejected) {
  PropFormula prefix = mk_box_iE_upto(component_modality(lead), md(lead, f),
                                      surrogate_prop(lead, rejected_premise_prop(rejected)),
                                      cfg.mod_e);
  return mk_pimplies(prefix, surrogate_prop(lead, f));
}

inline PropFormula shared_criterion_disj(const SharedS5Config& cfg, const PropFormula& f,
                                         int lead,
                                         const std::vector<Quasistate<PropFormula>>& members) {
  PropFormula prefix = mk_box_iE_upto(component_modality(lead), md(lead, f),
                                      surrogate_prop(lead, realisability_disj(members)),
                                      cfg.mod_e);
  return mk_pimplies(prefix, surrogate_prop(lead, f));
}

inline Verdict prop_membership(const SharedS5Config& cfg, const Quasistate<PropFormula>& q,
                               int adp_value) {
  PropFormula hat = realisability(q);
  if (adp(hat).value != std::max(0, adp_value - 1))
    throw std::logic_error("alternation depth did not decrease along theta");
  return decide_local_shared_s5(cfg, mk_pnot(hat)).verdict;
}

struct PropLocalDecision {
  Verdict verdict = Verdict::Unknown;
  std::optional<PropKripkeModel> witness;
  int witness_world = 0;
  std::string note;
};

inline PropLocalDecision run_local_shared(const SharedS5Config& cfg, const PropFormula& f,
                                          int lead, int adp_value) {
  auto theta_base = make_base<PropFormula>(theta(lead, subformulas(f)), cfg.mod_e);

  try {
    std::vector<Quasistate<PropFormula>> all =
        enumerate_quasistates(theta_base, cfg.eager_local_limit);
    std::vector<Quasistate<PropFormula>> members_lo, members_hi;
    bool taint = false;
    for (const auto& q : all) {
      Verdict v = prop_membership(cfg, q, adp_value);
      if (v == Verdict::Invalid) {
        members_lo.push_back(q);
        members_hi.push_back(q);
      } else if (v == Verdict::Unknown) {
        members_hi.push_back(q);
        taint = true;
      }
    }
    PropOutcome hi = cfg.decider(lead).decide_local(shared_criterion_disj(cfg, f, lead, members_hi));
    PropLocalDecision d;
    if (!taint) {
      d.verdict = hi.verdict;
      d.witness = hi.witness;
      d.witness_world = hi.witness_world;
      d.note = hi.note;
      return d;
    }
    PropOutcome lo = cfg.decider(lead).decide_local(shared_criterion_disj(cfg, f, lead, members_lo));
    if (lo.verdict == hi.verdict && lo.verdict != Verdict::Unknown) {
      d.verdict = lo.verdict;
      return d;
    }
    d.note = "quasistate membership unresolved at this bound";
    return d;
  } catch (const std::runtime_error&) {
    // guided loop below
  }

  std::set<Quasistate<PropFormula>> rejected;
  bool taint = false;
  const int md_i = md(lead, f);
  for (int round = 0; round < 1 << 14; ++round) {
    PropOutcome out = cfg.decider(lead).decide_local(shared_criterion_rejform(cfg, f, lead, rejected));
    if (out.is(Verdict::Valid)) {
      PropLocalDecision d;
      d.verdict = taint ? Verdict::Unknown : Verdict::Valid;
      if (taint) d.note = "quasistate membership unresolved at this bound";
      return d;
    }
    if (out.is(Verdict::Unknown)) {
      PropLocalDecision d;
      d.note = out.note;
      return d;
    }
    if (!out.witness) {
      PropLocalDecision d;
      d.note = "component decider returned no witness";
      return d;
    }
    std::vector<std::vector<int>> classes = e_classes(out.witness->frame, cfg.mod_e);
    int root_class = -1;
    for (size_t c = 0; c < classes.size() && root_class < 0; ++c)
      for (int w : classes[c])
        if (w == out.witness_world) root_class = static_cast<int>(c);
    std::vector<int> dist =
        class_dist(out.witness->frame, component_modality(lead), classes, root_class);
    for (auto& x : dist)
      if (x > md_i) x = -1;
    std::set<Quasistate<PropFormula>> realized =
        realized_prop_quasistates(*out.witness, theta_base, lead, cfg.mod_e, &dist);
    bool changed = false;
    for (const auto& q : realized) {
      if (rejected.count(q))
        throw std::logic_error("witness realized an already rejected quasistate");
      Verdict v = prop_membership(cfg, q, adp_value);
      if (v == Verdict::Valid) {
        rejected.insert(q);
        changed = true;
      } else if (v == Verdict::Unknown) {
        rejected.insert(q);
        changed = true;
        taint = true;
      }
    }
    if (!changed) {
      PropLocalDecision d;
      d.verdict = Verdict::Invalid;
      d.witness = *out.witness;
      d.witness_world = out.witness_world;
      return d;
    }
  }
  PropLocalDecision d;
  d.note = "local refinement did not converge";
  return d;
}

}  // namespace detail

inline PropOutcome decide_local_shared_s5(const SharedS5Config& cfg, const PropFormula& f) {
  validate_shared_formula(cfg, f);
  std::string key = "L:" + print(f);
  {
    std::lock_guard<std::mutex> lock(cfg.cache->mu);
    auto it = cfg.cache->local.find(key);
    if (it != cfg.cache->local.end()) return it->second;
  }

  Adp a = adp(f);
  int lead = a.leading;
  PropOutcome out;
  if (a.value == 0) {
    out = cfg.decider(lead).decide_local(f);
  } else {
    try {
      detail::PropLocalDecision d = detail::run_local_shared(cfg, f, lead, a.value);
      out.verdict = d.verdict;
      out.note = d.note;
      if (out.is(Verdict::Invalid)) out.note = "lead component " + std::to_string(lead);
    } catch (const std::runtime_error& e) {
      out.note = std::string("resource limit: ") + e.what();
      out.verdict = Verdict::Unknown;
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

struct SharedGlobalConditions {
  const SharedS5Config& cfg;
  PropFormula phi, psi;

  Verdict c1(const std::vector<Quasistate<PropFormula>>& q_set) const {
    PropFormula premise =
        mk_pand(surrogate_prop(1, phi), surrogate_prop(1, realisability_disj(q_set)));
    return cfg.d1->decide_global(premise, surrogate_prop(1, psi)).verdict;
  }
  Verdict c2(const std::vector<Quasistate<PropFormula>>& q_set,
             const Quasistate<PropFormula>& q) const {
    PropFormula premise =
        mk_pand(surrogate_prop(1, phi), surrogate_prop(1, realisability_disj(q_set)));
    return cfg.d1->decide_global(premise, mk_pnot(surrogate_prop(1, realisability(q)))).verdict;
  }
  Verdict c3(const std::vector<Quasistate<PropFormula>>& q_set,
             const Quasistate<PropFormula>& q) const {
    PropFormula premise = surrogate_prop(2, realisability_disj(q_set));
    return cfg.d2->decide_global(premise, mk_pnot(surrogate_prop(2, realisability(q)))).verdict;
  }
};

inline std::vector<std::string> dump_certificate_prop(
    const std::vector<Quasistate<PropFormula>>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(dump_quasistate(q));
  return out;
}

inline DecisionOutcome shared_by_subsets(const SharedGlobalConditions& gc,
                                         const std::vector<Quasistate<PropFormula>>& all) {
  if (all.size() > 24) throw std::runtime_error("subset enumeration infeasible at this size");
  bool tainted = false;
  for (uint64_t mask = 0; mask < (uint64_t{1} << all.size()); ++mask) {
    std::vector<Quasistate<PropFormula>> q_set;
    for (size_t j = 0; j < all.size(); ++j)
      if (mask & (uint64_t{1} << j)) q_set.push_back(all[j]);
    bool unknown_here = false, failed = false;
    auto fold = [&](Verdict v) {
      if (v == Verdict::Valid) failed = true;
      if (v == Verdict::Unknown) unknown_here = true;
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
    out.certificate = dump_certificate_prop(q_set);
    out.note = "witnessing quasistate set of size " + std::to_string(q_set.size());
    return out;
  }
  if (tainted) return DecisionOutcome::unknown("some quasistate-set candidates were unresolved");
  return DecisionOutcome::valid();
}

inline DecisionOutcome shared_by_lazy(const SharedS5Config& cfg, const PropFormula& phi,
                                      const PropFormula& psi,
                                      const BasePtr<PropFormula>& base) {
  std::set<Quasistate<PropFormula>> rejected;
  bool taint = false;
  auto premise1 = [&] {
    return mk_pand(surrogate_prop(1, phi), surrogate_prop(1, rejected_premise_prop(rejected)));
  };
  auto premise2 = [&] { return surrogate_prop(2, rejected_premise_prop(rejected)); };

  for (int round = 0; round < 1 << 14; ++round) {
    PropOutcome c1 = cfg.d1->decide_global(premise1(), surrogate_prop(1, psi));
    if (c1.is(Verdict::Valid))
      return taint ? DecisionOutcome::unknown("unresolved rejections at this bound")
                   : DecisionOutcome::valid();
    if (c1.is(Verdict::Unknown)) return DecisionOutcome::unknown(c1.note);
    if (!c1.witness) return DecisionOutcome::unknown("component decider returned no witness");

    std::set<Quasistate<PropFormula>> pool =
        realized_prop_quasistates(*c1.witness, base, 1, cfg.mod_e);
    std::vector<Quasistate<PropFormula>> work(pool.begin(), pool.end());
    bool restart = false;
    bool round_taint = false;
    while (!work.empty() && !restart) {
      Quasistate<PropFormula> q = work.back();
      work.pop_back();
      for (int side = 1; side <= 2 && !restart; ++side) {
        PropFormula goal = mk_pnot(surrogate_prop(side, realisability(q)));
        PropOutcome o = side == 1 ? cfg.d1->decide_global(premise1(), goal)
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
        for (const auto& nq : realized_prop_quasistates(*o.witness, base, side, cfg.mod_e))
          if (pool.insert(nq).second) work.push_back(nq);
      }
    }
    if (restart) continue;
    if (round_taint || taint)
      return DecisionOutcome::unknown("unresolved co-realisability at this bound");
    DecisionOutcome out = DecisionOutcome::invalid();
    out.certificate = dump_certificate_prop(
        std::vector<Quasistate<PropFormula>>(pool.begin(), pool.end()));
    out.note = "witnessing quasistate set of size " + std::to_string(pool.size());
    return out;
  }
  return DecisionOutcome::unknown("global refinement did not converge");
}

}  // namespace detail

inline DecisionOutcome decide_global_shared_s5(const SharedS5Config& cfg, const PropFormula& phi,
                                               const PropFormula& psi) {
  validate_shared_formula(cfg, phi);
  validate_shared_formula(cfg, psi);
  try {
    PropSet closed = subformulas(std::vector<PropFormula>{phi, psi});
    auto base = make_base<PropFormula>(closed, cfg.mod_e);
    detail::SharedGlobalConditions gc{cfg, phi, psi};
    switch (cfg.strategy) {
      case GlobalStrategy::SubsetEnumeration:
        return detail::shared_by_subsets(gc, enumerate_quasistates(base, size_t{1} << 22));
      case GlobalStrategy::EliminationFixpoint:
      case GlobalStrategy::LazyClosure: return detail::shared_by_lazy(cfg, phi, psi, base);
      case GlobalStrategy::Auto: {
        std::optional<std::vector<Quasistate<PropFormula>>> all;
        try {
          all = enumerate_quasistates(base, cfg.subset_limit);
        } catch (const std::runtime_error&) {
        }
        if (all && all->size() <= cfg.subset_limit) return detail::shared_by_subsets(gc, *all);
        return detail::shared_by_lazy(cfg, phi, psi, base);
      }
    }
  } catch (const std::runtime_error& e) {
    return DecisionOutcome::unknown(std::string("resource limit: ") + e.what());
  }
  return DecisionOutcome::unknown("unreachable");
}

// The class distance used by the local criterion, exposed for tests.
inline int dist_re(const Frame& fr, const std::string& mod_i, const std::string& mod_e, int w,
                   int v) {
  auto classes = detail::e_classes(fr, mod_e);
  int cw = -1, cv = -1;
  for (size_t c = 0; c < classes.size(); ++c)
    for (int u : classes[c]) {
      if (u == w) cw = static_cast<int>(c);
      if (u == v) cv = static_cast<int>(c);
    }
  std::vector<int> d = detail::class_dist(fr, mod_i, classes, cw);
  return d[static_cast<size_t>(cv)];
}

}  // namespace ovml
