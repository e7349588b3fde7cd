#pragma once

// Bounded search over propositional bimodal frames, with cross-relation
// commutation constraints. Backs the component deciders of the shared-S5
// pipeline.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovml/outcome.hpp"
#include "ovml/prop_formula.hpp"
#include "ovml/sat.hpp"
#include "ovml/semantics.hpp"

namespace ovml {

struct PropBoundedQuery {
  std::map<std::string, FrameClassSpec> frames;
  std::vector<std::pair<std::string, std::string>> lcom;  // (R id, E id)
  std::vector<std::pair<std::string, std::string>> rcom;
  int n_worlds = 1;
  std::vector<PropFormula> global_true;
  std::optional<PropFormula> refute;  // must fail at world 0
};

struct PropSearchResult {
  SearchStatus status = SearchStatus::Exhausted;
  std::optional<PropKripkeModel> model;
  int refute_world = 0;
};

namespace detail {

inline bool prop_query_matches(const PropKripkeModel& m, const PropBoundedQuery& q,
                               int* bad_world) {
  PropEvaluator ev(m);
  uint64_t all = m.frame.num_worlds == 64 ? ~uint64_t{0}
                                          : ((uint64_t{1} << m.frame.num_worlds) - 1);
  for (const PropFormula& g : q.global_true)
    if ((ev.eval(g) & all) != all) return false;
  if (q.refute) {
    uint64_t mask = ev.eval(*q.refute);
    for (int w = 0; w < m.frame.num_worlds; ++w)
      if (!((mask >> w) & 1)) {
        if (bad_world) *bad_world = w;
        return true;
      }
    return false;
  }
  if (bad_world) *bad_world = 0;
  return true;
}

inline bool prop_frame_ok(const Frame& f, const PropBoundedQuery& q) {
  for (const auto& [r, e] : q.lcom)
    if (!frame_lcom(f, r, e)) return false;
  for (const auto& [r, e] : q.rcom)
    if (!frame_rcom(f, r, e)) return false;
  return true;
}

inline PropSearchResult prop_plain_search(const PropBoundedQuery& q,
                                          uint64_t budget = 50'000'000) {
  std::set<std::string> letters;
  for (const auto& g : q.global_true) collect_letters(g, letters);
  if (q.refute) collect_letters(*q.refute, letters);
  std::vector<std::string> lv(letters.begin(), letters.end());

  PropSearchResult res;
  uint64_t seen = 0;
  for_each_frame(q.frames, q.n_worlds, [&](const Frame& fr) {
    if (!prop_frame_ok(fr, q)) return true;
    uint64_t cells = uint64_t{1} << (static_cast<int>(lv.size()) * q.n_worlds);
    for (uint64_t code = 0; code < cells; ++code) {
      if (++seen > budget) {
        res.status = SearchStatus::ResourceOut;
        return false;
      }
      PropKripkeModel m;
      m.frame = fr;
      for (size_t li = 0; li < lv.size(); ++li) {
        uint64_t mask = 0;
        for (int w = 0; w < q.n_worlds; ++w)
          if ((code >> (li * static_cast<size_t>(q.n_worlds) + static_cast<size_t>(w))) & 1)
            mask |= uint64_t{1} << w;
        m.valuation[lv[li]] = mask;
      }
      int bw = 0;
      if (prop_query_matches(m, q, &bw)) {
        res.status = SearchStatus::Found;
        res.model = m;
        res.refute_world = bw;
        return false;
      }
    }
    return true;
  });
  return res;
}

class PropSatEncoder {
 public:
  explicit PropSatEncoder(const PropBoundedQuery& q) : q_(q), n_(q.n_worlds) {
    true_var_ = s_.new_var();
    s_.add_clause({sat::mk_lit(true_var_)});
    for (const auto& [id, spec] : q.frames) {
      auto& rv = rel_[id];
      rv.assign(static_cast<size_t>(n_ * n_), 0);
      for (int w = 0; w < n_; ++w)
        for (int v = 0; v < n_; ++v) rv[static_cast<size_t>(w * n_ + v)] = s_.new_var();
      encode_class(id, spec);
    }
    for (const auto& [r, e] : q.lcom) encode_com(r, e);
    for (const auto& [r, e] : q.rcom) encode_com(e, r);

    std::set<std::string> letters;
    for (const auto& g : q.global_true) collect_letters(g, letters);
    if (q.refute) collect_letters(*q.refute, letters);
    for (const auto& p : letters) {
      auto& lv = letter_[p];
      lv.assign(static_cast<size_t>(n_), 0);
      for (int w = 0; w < n_; ++w) lv[static_cast<size_t>(w)] = s_.new_var();
    }
    for (const auto& g : q.global_true)
      for (int w = 0; w < n_; ++w) s_.add_clause({lit(g, w)});
    if (q.refute) s_.add_clause({sat::neg(lit(*q.refute, 0))});
  }

  PropSearchResult run(int64_t max_conflicts) {
    PropSearchResult res;
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

  void encode_class(const std::string& id, const FrameClassSpec& spec) {
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

  // E;R included in R;E for the pair (r, e): aux_{w,u,v} <-> r(w,u) & e(u,v)
  void encode_com(const std::string& r, const std::string& e) {
    std::vector<int> aux(static_cast<size_t>(n_ * n_ * n_), 0);
    for (int w = 0; w < n_; ++w)
      for (int u = 0; u < n_; ++u)
        for (int v = 0; v < n_; ++v) {
          int y = s_.new_var();
          aux[static_cast<size_t>((w * n_ + u) * n_ + v)] = y;
          s_.add_clause({sat::mk_lit(y, true), sat::mk_lit(rel(r, w, u))});
          s_.add_clause({sat::mk_lit(y, true), sat::mk_lit(rel(e, u, v))});
          s_.add_clause({sat::mk_lit(y), sat::mk_lit(rel(r, w, u), true),
                         sat::mk_lit(rel(e, u, v), true)});
        }
    for (int w = 0; w < n_; ++w)
      for (int u = 0; u < n_; ++u)
        for (int v = 0; v < n_; ++v) {
          // e(w,u) & r(u,v) -> exists u': r(w,u') & e(u',v)
          std::vector<sat::Lit> cl{sat::mk_lit(rel(e, w, u), true),
                                   sat::mk_lit(rel(r, u, v), true)};
          for (int u2 = 0; u2 < n_; ++u2)
            cl.push_back(sat::mk_lit(aux[static_cast<size_t>((w * n_ + u2) * n_ + v)]));
          s_.add_clause(cl);
        }
  }

  sat::Lit lit(const PropFormula& f, int w) {
    uint64_t key =
        (static_cast<uint64_t>(reinterpret_cast<uintptr_t>(f.get())) << 7) | static_cast<uint64_t>(w);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    roots_.push_back(f);
    sat::Lit r = build(f, w);
    memo_.emplace(key, r);
    return r;
  }

  sat::Lit build(const PropFormula& f, int w) {
    switch (f->kind) {
      case PConn::Letter: return sat::mk_lit(letter_.at(f->name)[static_cast<size_t>(w)]);
      case PConn::Not: return sat::neg(lit(f->a, w));
      case PConn::And: {
        int y = s_.new_var();
        sat::Lit a = lit(f->a, w), b = lit(f->b, w);
        s_.add_clause({sat::mk_lit(y, true), a});
        s_.add_clause({sat::mk_lit(y, true), b});
        s_.add_clause({sat::mk_lit(y), sat::neg(a), sat::neg(b)});
        return sat::mk_lit(y);
      }
      case PConn::Box: {
        int y = s_.new_var();
        std::vector<sat::Lit> back{sat::mk_lit(y)};
        for (int v = 0; v < n_; ++v) {
          sat::Lit r = sat::mk_lit(rel(f->name, w, v));
          sat::Lit c = lit(f->a, v);
          s_.add_clause({sat::mk_lit(y, true), sat::neg(r), c});
          int z = s_.new_var();
          s_.add_clause({sat::mk_lit(z, true), r});
          s_.add_clause({sat::mk_lit(z, true), sat::neg(c)});
          s_.add_clause({sat::mk_lit(z), sat::neg(r), c});
          back.push_back(sat::mk_lit(z));
        }
        s_.add_clause(back);
        return sat::mk_lit(y);
      }
    }
    throw std::logic_error("unreachable");
  }

  PropKripkeModel decode() {
    PropKripkeModel m;
    m.frame.num_worlds = n_;
    for (const auto& [id, vars] : rel_) {
      auto& rows = m.frame.relation(id);
      for (int w = 0; w < n_; ++w)
        for (int v = 0; v < n_; ++v)
          if (s_.model_value(vars[static_cast<size_t>(w * n_ + v)]))
            rows[static_cast<size_t>(w)] |= uint64_t{1} << v;
    }
    for (const auto& [p, vars] : letter_) {
      uint64_t mask = 0;
      for (int w = 0; w < n_; ++w)
        if (s_.model_value(vars[static_cast<size_t>(w)])) mask |= uint64_t{1} << w;
      m.valuation[p] = mask;
    }
    return m;
  }

  const PropBoundedQuery& q_;
  int n_;
  sat::Solver s_;
  int true_var_ = 0;
  std::map<std::string, std::vector<int>> rel_, letter_;
  std::unordered_map<uint64_t, sat::Lit> memo_;
  std::vector<PropFormula> roots_;
};

}  // namespace detail

inline PropSearchResult prop_bounded_search(PropBoundedQuery q,
                                            SearchEngine engine = SearchEngine::Auto,
                                            int64_t sat_conflicts = 4'000'000) {
  const int max_w = q.n_worlds;
  bool custom = false;
  for (const auto& [id, spec] : q.frames) custom = custom || spec.kind == FrameKind::Custom;
  bool resource_out = false;
  for (int w = 1; w <= max_w; ++w) {
    q.n_worlds = w;
    bool use_plain = engine == SearchEngine::Plain || custom;
    if (engine == SearchEngine::Auto && !custom)
      use_plain = static_cast<size_t>(q.frames.size()) * w * w <= 16;
    PropSearchResult r;
    if (use_plain) {
      r = detail::prop_plain_search(q);
    } else {
      detail::PropSatEncoder enc(q);
      r = enc.run(sat_conflicts);
    }
    if (r.status == SearchStatus::Found) {
      int bw = 0;
      if (!detail::prop_query_matches(*r.model, q, &bw) || !detail::prop_frame_ok(r.model->frame, q))
        throw std::logic_error("prop search produced a non-matching model");
      r.refute_world = bw;
      return r;
    }
    if (r.status == SearchStatus::ResourceOut) resource_out = true;
  }
  PropSearchResult out;
  out.status = resource_out ? SearchStatus::ResourceOut : SearchStatus::Exhausted;
  return out;
}

// ---------------------------------------------------------------------------
// Propositional component deciders (language {box_i, box_E})
// ---------------------------------------------------------------------------

struct PropOutcome {
  Verdict verdict = Verdict::Unknown;
  std::optional<PropKripkeModel> witness;
  int witness_world = 0;
  std::string note;

  bool is(Verdict v) const { return verdict == v; }
};

class PropDecider {
 public:
  std::string mod_i = "1";
  std::string mod_e = kSharedS5;
  std::string completeness_note;

  virtual ~PropDecider() = default;

  PropOutcome decide_local(const PropFormula& f) const {
    return cached("L:" + print(f), [&] { return decide_local_impl(f); });
  }
  PropOutcome decide_global(const PropFormula& premise, const PropFormula& goal) const {
    return cached("G:" + print(premise) + "|-" + print(goal),
                  [&] { return decide_global_impl(premise, goal); });
  }

 protected:
  virtual PropOutcome decide_local_impl(const PropFormula& f) const = 0;
  virtual PropOutcome decide_global_impl(const PropFormula& premise,
                                         const PropFormula& goal) const = 0;

 private:
  template <class Fn>
  PropOutcome cached(const std::string& key, Fn&& fn) const {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    PropOutcome out = fn();
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, out);
    return out;
  }
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, PropOutcome> cache_;
};

using PropDeciderPtr = std::shared_ptr<const PropDecider>;

// Commutator-style component: base class for the i relation, an equivalence
// for E, the left commutation law, and the right one for the cd pairing.
class BoundedPropDecider final : public PropDecider {
 public:
  BoundedPropDecider(FrameClassSpec base_class, std::string modality, std::string shared_e,
                     bool with_rcom, int max_worlds, bool assume_fmp,
                     SearchEngine engine = SearchEngine::Auto)
      : base_class_(base_class),
        with_rcom_(with_rcom),
        max_worlds_(max_worlds),
        assume_fmp_(assume_fmp),
        engine_(engine) {
    mod_i = std::move(modality);
    mod_e = std::move(shared_e);
    completeness_note = assume_fmp ? "complete under the configured fmp bound"
                                   : "refutation-complete within bounds; otherwise unknown";
  }

  PropOutcome decide_local_impl(const PropFormula& f) const override {
    PropBoundedQuery q = base_query();
    q.refute = f;
    return finish(prop_bounded_search(q, engine_));
  }
  PropOutcome decide_global_impl(const PropFormula& premise,
                                 const PropFormula& goal) const override {
    PropBoundedQuery q = base_query();
    q.global_true.push_back(premise);
    q.refute = goal;
    return finish(prop_bounded_search(q, engine_));
  }

 private:
  PropBoundedQuery base_query() const {
    PropBoundedQuery q;
    q.frames[mod_i] = base_class_;
    q.frames[mod_e] = FrameClassSpec::equivalence();
    q.lcom.push_back({mod_i, mod_e});
    if (with_rcom_) q.rcom.push_back({mod_i, mod_e});
    q.n_worlds = max_worlds_;
    return q;
  }
  PropOutcome finish(const PropSearchResult& r) const {
    PropOutcome o;
    switch (r.status) {
      case SearchStatus::Found:
        o.verdict = Verdict::Invalid;
        o.witness = r.model;
        o.witness_world = r.refute_world;
        return o;
      case SearchStatus::Exhausted:
        o.verdict = assume_fmp_ ? Verdict::Valid : Verdict::Unknown;
        if (!assume_fmp_) o.note = "exhausted without an fmp assumption";
        return o;
      case SearchStatus::ResourceOut:
        o.note = "resource budget exhausted";
        return o;
    }
    return o;
  }

  FrameClassSpec base_class_;
  bool with_rcom_;
  int max_worlds_;
  bool assume_fmp_;
  SearchEngine engine_;
};

inline PropDeciderPtr prop_bounded_decider(FrameClassSpec base_class, const std::string& modality,
                                           bool with_rcom, int max_worlds, bool assume_fmp,
                                           const std::string& shared_e = kSharedS5,
                                           SearchEngine engine = SearchEngine::Auto) {
  return std::make_shared<BoundedPropDecider>(base_class, modality, shared_e, with_rcom,
                                              max_worlds, assume_fmp, engine);
}

}  // namespace ovml
