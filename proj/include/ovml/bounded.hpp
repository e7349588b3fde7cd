#pragma once

// Bounded model search over frame classes, in two interchangeable engines:
// a plain enumerating reference, and a CDCL-backed search that grounds the
// truth definition over a fixed world/element budget. Both answer the same
// question: is there a model within bounds that globally satisfies the given
// premises and refutes the goal at a world? Component deciders and the fused
// oracle sit on top.

#include <cassert>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/outcome.hpp"
#include "ovml/sat.hpp"
#include "ovml/semantics.hpp"

namespace ovml {

struct BoundedQuery {
  std::map<std::string, FrameClassSpec> frames;
  int n_worlds = 1;
  int n_elems = 1;
  DomainMode mode = DomainMode::Expanding;
  std::vector<Formula> global_true;    // must hold at every world
  std::optional<Formula> refute;       // must fail at world 0
};

enum class SearchStatus { Found, Exhausted, ResourceOut };

struct SearchResult {
  SearchStatus status = SearchStatus::Exhausted;
  std::optional<FOKripkeModel> model;
  int refute_world = 0;
};

namespace detail {

inline void collect_vocabulary(const std::vector<Formula>& fs, std::set<std::string>& preds,
                               std::set<std::string>& consts) {
  for (const Formula& f : fs) {
    collect_predicates(f, preds);
    collect_constants(f, consts);
  }
}

inline bool query_matches(const FOKripkeModel& m, const BoundedQuery& q, int* bad_world) {
  Evaluator ev(m);
  for (const Formula& g : q.global_true)
    for (int w = 0; w < m.num_worlds(); ++w)
      if (!holds_at(m, w, g, &ev)) return false;
  if (q.refute) {
    for (int w = 0; w < m.num_worlds(); ++w)
      if (!holds_at(m, w, *q.refute, &ev)) {
        if (bad_world) *bad_world = w;
        return true;
      }
    return false;
  }
  if (bad_world) *bad_world = 0;
  return true;
}

// ---------------------------------------------------------------------------
// Plain engine
// ---------------------------------------------------------------------------

inline SearchResult plain_search(const BoundedQuery& q, uint64_t budget_models = 80'000'000) {
  std::set<std::string> preds, consts;
  std::vector<Formula> all = q.global_true;
  if (q.refute) all.push_back(*q.refute);
  collect_vocabulary(all, preds, consts);
  std::vector<std::string> pv(preds.begin(), preds.end());
  std::vector<std::string> cv(consts.begin(), consts.end());

  SearchResult res;
  uint64_t seen = 0;
  for_each_fomodel(q.frames, q.n_worlds, q.n_elems, q.mode, pv, cv,
                   [&](const FOKripkeModel& m) {
                     if (++seen > budget_models) {
                       res.status = SearchStatus::ResourceOut;
                       return false;
                     }
                     int w = 0;
                     if (query_matches(m, q, &w)) {
                       res.status = SearchStatus::Found;
                       res.model = m;
                       return false;
                     }
                     return true;
                   });
  return res;
}

// ---------------------------------------------------------------------------
// CDCL engine: ground the truth definition over the bounded universe.
// ---------------------------------------------------------------------------

class SatEncoder {
 public:
  SatEncoder(const BoundedQuery& q) : q_(q), n_(q.n_worlds), d_(q.n_elems) {
    std::vector<Formula> all = q.global_true;
    if (q.refute) all.push_back(*q.refute);
    collect_vocabulary(all, preds_, consts_);

    true_var_ = s_.new_var();
    s_.add_clause({sat::mk_lit(true_var_)});

    for (const auto& [id, spec] : q.frames) {
      auto& rv = rel_[id];
      rv.assign(static_cast<size_t>(n_ * n_), 0);
      for (int w = 0; w < n_; ++w)
        for (int v = 0; v < n_; ++v) rv[static_cast<size_t>(w * n_ + v)] = s_.new_var();
      encode_frame_class(id, spec);
    }
    dom_.assign(static_cast<size_t>(n_ * d_), 0);
    for (int w = 0; w < n_; ++w)
      for (int e = 0; e < d_; ++e) dom_[static_cast<size_t>(w * d_ + e)] = s_.new_var();
    encode_domains();
    for (const auto& p : preds_) {
      auto& pv = pred_[p];
      pv.assign(static_cast<size_t>(n_ * d_), 0);
      for (int w = 0; w < n_; ++w)
        for (int e = 0; e < d_; ++e) {
          int v = s_.new_var();
          pv[static_cast<size_t>(w * d_ + e)] = v;
          s_.add_clause({sat::mk_lit(v, true), sat::mk_lit(dom(w, e))});  // preds inside domains
        }
    }
    for (const auto& c : consts_) {
      auto& cv = const_[c];
      cv.assign(static_cast<size_t>(n_ * d_), 0);
      for (int w = 0; w < n_; ++w) {
        std::vector<sat::Lit> at_least;
        for (int e = 0; e < d_; ++e) {
          int v = s_.new_var();
          cv[static_cast<size_t>(w * d_ + e)] = v;
          at_least.push_back(sat::mk_lit(v));
          s_.add_clause({sat::mk_lit(v, true), sat::mk_lit(dom(w, e))});
        }
        s_.add_clause(at_least);
        for (int e1 = 0; e1 < d_; ++e1)
          for (int e2 = e1 + 1; e2 < d_; ++e2)
            s_.add_clause({sat::mk_lit(cv[static_cast<size_t>(w * d_ + e1)], true),
                           sat::mk_lit(cv[static_cast<size_t>(w * d_ + e2)], true)});
      }
    }

    for (const Formula& g : q.global_true)
      for (int w = 0; w < n_; ++w) {
        if (!g->open) {
          s_.add_clause({lit(g, w, -1)});
        } else {
          for (int e = 0; e < d_; ++e)
            s_.add_clause({sat::mk_lit(dom(w, e), true), lit(g, w, e)});
        }
      }
    if (q.refute) {
      const Formula& f = *q.refute;
      if (!f->open) {
        s_.add_clause({sat::neg(lit(f, 0, -1))});
      } else {
        std::vector<sat::Lit> any;
        for (int e = 0; e < d_; ++e) {
          int z = s_.new_var();
          // z <-> dom(0,e) & ~f(0,e)
          sat::Lit fl = lit(f, 0, e);
          s_.add_clause({sat::mk_lit(z, true), sat::mk_lit(dom(0, e))});
          s_.add_clause({sat::mk_lit(z, true), sat::neg(fl)});
          s_.add_clause({sat::mk_lit(z), sat::mk_lit(dom(0, e), true), fl});
          any.push_back(sat::mk_lit(z));
        }
        s_.add_clause(any);
      }
    }
  }

  SearchResult run(int64_t max_conflicts) {
    SearchResult res;
    switch (s_.solve(max_conflicts)) {
      case sat::Result::Sat:
        res.status = SearchStatus::Found;
        res.model = decode();
        return res;
      case sat::Result::Unsat: res.status = SearchStatus::Exhausted; return res;
      case sat::Result::Undef: res.status = SearchStatus::ResourceOut; return res;
    }
    return res;
  }

 private:
  int rel(const std::string& id, int w, int v) const {
    return rel_.at(id)[static_cast<size_t>(w * n_ + v)];
  }
  int dom(int w, int e) const { return dom_[static_cast<size_t>(w * d_ + e)]; }

  void encode_frame_class(const std::string& id, const FrameClassSpec& spec) {
    switch (spec.kind) {
      case FrameKind::All: return;
      case FrameKind::Equivalence:
        for (int w = 0; w < n_; ++w) s_.add_clause({sat::mk_lit(rel(id, w, w))});
        for (int w = 0; w < n_; ++w)
          for (int v = 0; v < n_; ++v) {
            if (w == v) continue;
            s_.add_clause({sat::mk_lit(rel(id, w, v), true), sat::mk_lit(rel(id, v, w))});
            for (int u = 0; u < n_; ++u)
              s_.add_clause({sat::mk_lit(rel(id, w, v), true), sat::mk_lit(rel(id, v, u), true),
                             sat::mk_lit(rel(id, w, u))});
          }
        return;
      case FrameKind::Difference:
        for (int w = 0; w < n_; ++w) s_.add_clause({sat::mk_lit(rel(id, w, w), true)});
        for (int w = 0; w < n_; ++w)
          for (int v = 0; v < n_; ++v) {
            if (w == v) continue;
            s_.add_clause({sat::mk_lit(rel(id, w, v), true), sat::mk_lit(rel(id, v, w))});
            for (int u = 0; u < n_; ++u) {
              if (u == w || u == v) continue;
              s_.add_clause({sat::mk_lit(rel(id, w, v), true), sat::mk_lit(rel(id, v, u), true),
                             sat::mk_lit(rel(id, w, u))});
            }
          }
        return;
      case FrameKind::Custom:
        throw std::invalid_argument("custom frame classes need the plain engine");
    }
  }

  void encode_domains() {
    for (int w = 0; w < n_; ++w) {
      if (q_.mode == DomainMode::Constant) {
        for (int e = 0; e < d_; ++e) s_.add_clause({sat::mk_lit(dom(w, e))});
      } else {
        std::vector<sat::Lit> nonempty;
        for (int e = 0; e < d_; ++e) nonempty.push_back(sat::mk_lit(dom(w, e)));
        s_.add_clause(nonempty);
      }
    }
    if (q_.mode == DomainMode::Expanding) {
      for (const auto& [id, _] : q_.frames)
        for (int w = 0; w < n_; ++w)
          for (int v = 0; v < n_; ++v) {
            if (w == v) continue;
            for (int e = 0; e < d_; ++e)
              s_.add_clause({sat::mk_lit(rel(id, w, v), true), sat::mk_lit(dom(w, e), true),
                             sat::mk_lit(dom(v, e))});
          }
    }
  }

  // literal for "formula f holds at world w under assignment x := e"
  sat::Lit lit(const Formula& f, int w, int e) {
    if (!f->open) e = -1;
    uint64_t key = (reinterpret_cast<uintptr_t>(f.get()) << 13) ^
                   (static_cast<uint64_t>(w) << 7) ^ static_cast<uint64_t>(e + 1);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    roots_.push_back(f);
    sat::Lit r = build(f, w, e);
    memo_.emplace(key, r);
    return r;
  }

  sat::Lit build(const Formula& f, int w, int e) {
    switch (f->kind) {
      case Conn::Atom: {
        const auto& pv = pred_.at(f->name);
        if (f->t1.is_var) return sat::mk_lit(pv[static_cast<size_t>(w * d_ + e)]);
        // P(c): exists e' with c=e' and P(e')
        const auto& cv = const_.at(f->t1.constant);
        std::vector<sat::Lit> parts;
        for (int e2 = 0; e2 < d_; ++e2)
          parts.push_back(and2(sat::mk_lit(cv[static_cast<size_t>(w * d_ + e2)]),
                               sat::mk_lit(pv[static_cast<size_t>(w * d_ + e2)])));
        return big_or(parts);
      }
      case Conn::Eq: {
        if (f->t1.is_var && f->t2.is_var) return sat::mk_lit(true_var_);
        if (f->t1.is_var || f->t2.is_var) {
          const std::string& c = f->t1.is_var ? f->t2.constant : f->t1.constant;
          return sat::mk_lit(const_.at(c)[static_cast<size_t>(w * d_ + e)]);
        }
        const auto& c1 = const_.at(f->t1.constant);
        const auto& c2 = const_.at(f->t2.constant);
        std::vector<sat::Lit> parts;
        for (int e2 = 0; e2 < d_; ++e2)
          parts.push_back(and2(sat::mk_lit(c1[static_cast<size_t>(w * d_ + e2)]),
                               sat::mk_lit(c2[static_cast<size_t>(w * d_ + e2)])));
        return big_or(parts);
      }
      case Conn::Not: return sat::neg(lit(f->a, w, e));
      case Conn::And: return and2(lit(f->a, w, e), lit(f->b, w, e));
      case Conn::Box: {
        // y <-> /\_v (rel(w,v) -> child(v,e))
        std::vector<sat::Lit> violations;
        int y = s_.new_var();
        for (int v = 0; v < n_; ++v) {
          sat::Lit r = sat::mk_lit(rel(f->name, w, v));
          sat::Lit c = lit(f->a, v, e);
          s_.add_clause({sat::mk_lit(y, true), sat::neg(r), c});
          violations.push_back(and2(r, sat::neg(c)));
        }
        std::vector<sat::Lit> back{sat::mk_lit(y)};
        for (sat::Lit v : violations) back.push_back(v);
        s_.add_clause(back);
        return sat::mk_lit(y);
      }
      case Conn::Exists: {
        std::vector<sat::Lit> parts;
        for (int e2 = 0; e2 < d_; ++e2)
          parts.push_back(and2(sat::mk_lit(dom(w, e2)), lit(f->a, w, e2)));
        return big_or(parts);
      }
    }
    throw std::logic_error("unreachable");
  }

  sat::Lit and2(sat::Lit a, sat::Lit b) {
    int y = s_.new_var();
    s_.add_clause({sat::mk_lit(y, true), a});
    s_.add_clause({sat::mk_lit(y, true), b});
    s_.add_clause({sat::mk_lit(y), sat::neg(a), sat::neg(b)});
    return sat::mk_lit(y);
  }
  sat::Lit big_or(const std::vector<sat::Lit>& parts) {
    int y = s_.new_var();
    std::vector<sat::Lit> fwd{sat::mk_lit(y, true)};
    for (sat::Lit p : parts) {
      fwd.push_back(p);
      s_.add_clause({sat::mk_lit(y), sat::neg(p)});
    }
    s_.add_clause(fwd);
    return sat::mk_lit(y);
  }

  FOKripkeModel decode() {
    FOKripkeModel m;
    m.frame.num_worlds = n_;
    m.mode = q_.mode;
    for (const auto& [id, vars] : rel_) {
      auto& rows = m.frame.relation(id);
      for (int w = 0; w < n_; ++w)
        for (int v = 0; v < n_; ++v)
          if (s_.model_value(vars[static_cast<size_t>(w * n_ + v)]))
            rows[static_cast<size_t>(w)] |= uint64_t{1} << v;
    }
    m.domains.assign(static_cast<size_t>(n_), 0);
    for (int w = 0; w < n_; ++w)
      for (int e = 0; e < d_; ++e)
        if (s_.model_value(dom(w, e))) m.domains[static_cast<size_t>(w)] |= uint64_t{1} << e;
    for (const auto& [p, vars] : pred_) {
      auto& rows = m.preds[p];
      rows.assign(static_cast<size_t>(n_), 0);
      for (int w = 0; w < n_; ++w)
        for (int e = 0; e < d_; ++e)
          if (s_.model_value(vars[static_cast<size_t>(w * d_ + e)]))
            rows[static_cast<size_t>(w)] |= uint64_t{1} << e;
    }
    for (const auto& [c, vars] : const_) {
      auto& vals = m.consts[c];
      vals.assign(static_cast<size_t>(n_), 0);
      for (int w = 0; w < n_; ++w)
        for (int e = 0; e < d_; ++e)
          if (s_.model_value(vars[static_cast<size_t>(w * d_ + e)])) vals[static_cast<size_t>(w)] = e;
    }
    return m;
  }

  const BoundedQuery& q_;
  int n_, d_;
  sat::Solver s_;
  int true_var_ = 0;
  std::set<std::string> preds_, consts_;
  std::map<std::string, std::vector<int>> rel_, pred_, const_;
  std::vector<int> dom_;
  std::unordered_map<uint64_t, sat::Lit> memo_;
  std::vector<Formula> roots_;
};

}  // namespace detail

enum class SearchEngine { Plain, Sat, Auto };

// Search all sizes up to the bounds for a model matching the query shape.
inline SearchResult bounded_search(BoundedQuery q, SearchEngine engine = SearchEngine::Auto,
                                   int64_t sat_conflicts = 4'000'000) {
  const int max_w = q.n_worlds, max_d = q.n_elems;
  bool custom = false;
  for (const auto& [id, spec] : q.frames) custom = custom || spec.kind == FrameKind::Custom;
  bool resource_out = false;
  for (int w = 1; w <= max_w; ++w) {
    std::vector<int> dsizes;
    if (q.mode == DomainMode::Constant) {
      for (int d = 1; d <= max_d; ++d) dsizes.push_back(d);
    } else {
      dsizes.push_back(max_d);  // expanding domains range over subsets anyway
    }
    for (int d : dsizes) {
      q.n_worlds = w;
      q.n_elems = d;
      bool use_plain = engine == SearchEngine::Plain || custom;
      if (engine == SearchEngine::Auto && !custom) {
        // rough size of the plain space: frames * interpretations
        std::set<std::string> preds, consts;
        std::vector<Formula> all = q.global_true;
        if (q.refute) all.push_back(*q.refute);
        detail::collect_vocabulary(all, preds, consts);
        double bits = static_cast<double>(q.frames.size()) * w * w +
                      static_cast<double>(preds.size() + 1) * w * d +
                      static_cast<double>(consts.size()) * w * 2;
        use_plain = bits <= 18;
      }
      SearchResult r;
      if (use_plain) {
        r = detail::plain_search(q);
      } else {
        detail::SatEncoder enc(q);
        r = enc.run(sat_conflicts);
      }
      if (r.status == SearchStatus::Found) {
        std::string why;
        if (!validate(*r.model, &why)) throw std::logic_error("search produced invalid model: " + why);
        int bw = 0;
        if (!detail::query_matches(*r.model, q, &bw))
          throw std::logic_error("search produced a non-matching model");
        r.refute_world = bw;
        return r;
      }
      if (r.status == SearchStatus::ResourceOut) resource_out = true;
    }
  }
  SearchResult out;
  out.status = resource_out ? SearchStatus::ResourceOut : SearchStatus::Exhausted;
  return out;
}

// ---------------------------------------------------------------------------
// Component deciders
// ---------------------------------------------------------------------------

class ComponentDecider {
 public:
  Language language;
  DomainMode mode = DomainMode::Expanding;
  std::string completeness_note;
  std::optional<FrameClassSpec> frame_class;  // present for bounded deciders

  virtual ~ComponentDecider() = default;

  DecisionOutcome decide_local(const Formula& f) const {
    return cached("L:" + print(f), [&] { return decide_local_impl(f); });
  }
  DecisionOutcome decide_global(const Formula& premise, const Formula& goal) const {
    return cached("G:" + print(premise) + "|-" + print(goal),
                  [&] { return decide_global_impl(premise, goal); });
  }

  const std::string& modality() const { return *language.modality_ids.begin(); }

 protected:
  virtual DecisionOutcome decide_local_impl(const Formula& f) const = 0;
  virtual DecisionOutcome decide_global_impl(const Formula& premise,
                                             const Formula& goal) const = 0;

 private:
  template <class Fn>
  DecisionOutcome cached(const std::string& key, Fn&& fn) const {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    DecisionOutcome out = fn();
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, out);
    return out;
  }
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, DecisionOutcome> cache_;
};

using DeciderPtr = std::shared_ptr<const ComponentDecider>;

class BoundedComponentDecider final : public ComponentDecider {
 public:
  BoundedComponentDecider(FrameClassSpec spec, std::string modality, int max_worlds,
                          int max_elems, DomainMode mode_, bool assume_fmp,
                          SearchEngine engine = SearchEngine::Auto)
      : spec_(spec),
        max_worlds_(max_worlds),
        max_elems_(max_elems),
        assume_fmp_(assume_fmp),
        engine_(engine) {
    language = Language::mono(modality);
    mode = mode_;
    frame_class = spec;
    completeness_note = assume_fmp ? "complete under the configured fmp bound"
                                   : "refutation-complete within bounds; otherwise unknown";
  }

  DecisionOutcome decide_local_impl(const Formula& f) const override {
    BoundedQuery q = base_query();
    q.refute = f;
    return finish(bounded_search(q, engine_));
  }
  DecisionOutcome decide_global_impl(const Formula& premise, const Formula& goal) const override {
    BoundedQuery q = base_query();
    q.global_true.push_back(premise);
    q.refute = goal;
    return finish(bounded_search(q, engine_));
  }

 private:
  BoundedQuery base_query() const {
    BoundedQuery q;
    q.frames[modality()] = spec_;
    q.n_worlds = max_worlds_;
    q.n_elems = max_elems_;
    q.mode = mode;
    return q;
  }
  DecisionOutcome finish(const SearchResult& r) const {
    switch (r.status) {
      case SearchStatus::Found:
        return DecisionOutcome::invalid_with(*r.model, r.refute_world);
      case SearchStatus::Exhausted:
        if (assume_fmp_) return DecisionOutcome::valid();
        return DecisionOutcome::unknown("search exhausted at " + std::to_string(max_worlds_) +
                                        " worlds / " + std::to_string(max_elems_) +
                                        " elements without an fmp assumption");
      case SearchStatus::ResourceOut:
        return DecisionOutcome::unknown("resource budget exhausted");
    }
    return DecisionOutcome::unknown("unreachable");
  }

  FrameClassSpec spec_;
  int max_worlds_, max_elems_;
  bool assume_fmp_;
  SearchEngine engine_;
};

inline DeciderPtr bounded_decider(FrameClassSpec spec, const std::string& modality,
                                  int max_worlds, int max_elems, DomainMode mode,
                                  bool assume_fmp, SearchEngine engine = SearchEngine::Auto) {
  return std::make_shared<BoundedComponentDecider>(spec, modality, max_worlds, max_elems, mode,
                                                   assume_fmp, engine);
}

// Quantifier-only fragment: decide by direct quasistate search. A formula is
// satisfiable iff some quasistate contains a type carrying it.
class Fo1Decider final : public ComponentDecider {
 public:
  Fo1Decider() {
    language = Language::mono("1");
    mode = DomainMode::Constant;
    completeness_note = "complete for the quantifier-only fragment";
  }

  DecisionOutcome decide_local_impl(const Formula& f) const override {
    require_modality_free(f);
    return satisfiable(mk_not(f));
  }
  DecisionOutcome decide_global_impl(const Formula& premise, const Formula& goal) const override {
    require_modality_free(premise);
    require_modality_free(goal);
    // with generalisation available, premise phi yields its universal closure
    Formula closed = premise->open ? mk_forall(premise) : premise;
    return satisfiable(mk_and(closed, mk_not(goal)));
  }

 private:
  static void require_modality_free(const Formula& f) {
    std::set<std::string> mods;
    collect_modalities(f, mods);
    if (!mods.empty())
      throw std::invalid_argument("fo1 decider only accepts quantifier-only formulas");
  }

  // Invalid outcome (i.e. refutation found) when psi is satisfiable.
  DecisionOutcome satisfiable(const Formula& psi) const {
    auto base = make_base<Formula>(subformulas(psi));
    for (const auto& q : enumerate_quasistates(base)) {
      for (TypeBits t : q.types) {
        TypeSet<Formula> ts{base, t};
        if (!ts.has(psi)) continue;
        // one world, elements are the types of q
        FOKripkeModel m;
        m.frame.num_worlds = 1;
        m.frame.relation("1");
        m.mode = mode;
        m.domains = {(uint64_t{1} << q.types.size()) - 1};
        std::set<std::string> preds;
        collect_predicates(psi, preds);
        for (const auto& p : preds) {
          uint64_t mask = 0;
          for (size_t j = 0; j < q.types.size(); ++j)
            if (TypeSet<Formula>{base, q.types[j]}.has(mk_atom(p))) mask |= uint64_t{1} << j;
          m.preds[p] = {mask};
        }
        int elem = 0;
        for (size_t j = 0; j < q.types.size(); ++j)
          if (q.types[j] == t) elem = static_cast<int>(j);
        if (!check(m, 0, elem, psi))
          throw std::logic_error("fo1 witness failed the model checker");
        return DecisionOutcome::invalid_with(std::move(m), 0);
      }
    }
    return DecisionOutcome::valid();
  }
};

inline DeciderPtr fo1_decider() { return std::make_shared<Fo1Decider>(); }

}  // namespace ovml
