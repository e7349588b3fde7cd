#pragma once

// Kripke frames and first-order Kripke models with expanding or constant
// domains, the model checker, frame-class machinery and the propositional
// checker. Worlds and elements are small integers; per-world sets are
// bitmasks, which keeps the checker a handful of word operations per node.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/prop_formula.hpp"
#include "ovml/types.hpp"

namespace ovml {

constexpr int kMaxWorlds = 64;
constexpr int kMaxElems = 64;

struct Frame {
  int num_worlds = 0;
  // modality id -> successor mask per world
  std::map<std::string, std::vector<uint64_t>> rel;

  std::vector<uint64_t>& relation(const std::string& id) {
    auto it = rel.find(id);
    if (it == rel.end())
      it = rel.emplace(id, std::vector<uint64_t>(static_cast<size_t>(num_worlds), 0)).first;
    return it->second;
  }
  const std::vector<uint64_t>* relation_if(const std::string& id) const {
    auto it = rel.find(id);
    return it == rel.end() ? nullptr : &it->second;
  }
  uint64_t succ(const std::string& id, int w) const {
    const auto* r = relation_if(id);
    return r ? (*r)[static_cast<size_t>(w)] : 0;
  }
  void add_edge(const std::string& id, int w, int v) { relation(id)[static_cast<size_t>(w)] |= uint64_t{1} << v; }
  bool has_edge(const std::string& id, int w, int v) const {
    return (succ(id, w) >> v) & 1;
  }
};

inline bool frame_nontrivial(const Frame& f) {
  for (const auto& [id, rows] : f.rel)
    for (int w = 0; w < f.num_worlds; ++w)
      if (rows[static_cast<size_t>(w)] & ~(uint64_t{1} << w)) return true;
  return false;
}

inline bool frame_equivalence(const Frame& f, const std::string& id) {
  const auto* r = f.relation_if(id);
  if (!r) return false;
  for (int w = 0; w < f.num_worlds; ++w) {
    if (!(((*r)[static_cast<size_t>(w)] >> w) & 1)) return false;
    uint64_t s = (*r)[static_cast<size_t>(w)];
    for (int v = 0; v < f.num_worlds; ++v)
      if ((s >> v) & 1) {
        if (!(((*r)[static_cast<size_t>(v)] >> w) & 1)) return false;       // symmetry
        if (((*r)[static_cast<size_t>(v)] & ~s) != 0) return false;        // transitivity
      }
  }
  return true;
}

// Disjoint unions of frames whose relation links exactly the distinct pairs
// of each component: irreflexive, symmetric, and co-transitive on components.
inline bool frame_difference(const Frame& f, const std::string& id) {
  const auto* rp = f.relation_if(id);
  std::vector<uint64_t> zero(static_cast<size_t>(f.num_worlds), 0);
  const auto& r = rp ? *rp : zero;
  for (int w = 0; w < f.num_worlds; ++w) {
    if ((r[static_cast<size_t>(w)] >> w) & 1) return false;
    for (int v = 0; v < f.num_worlds; ++v)
      if ((r[static_cast<size_t>(w)] >> v) & 1) {
        if (!((r[static_cast<size_t>(v)] >> w) & 1)) return false;
        uint64_t need = r[static_cast<size_t>(v)] & ~(uint64_t{1} << w);
        if ((need & ~r[static_cast<size_t>(w)]) != 0) return false;
      }
  }
  return true;
}

// lcom: E;R included in R;E (first E then R). rcom is the converse order.
inline bool frame_lcom(const Frame& f, const std::string& id_r, const std::string& id_e) {
  for (int w = 0; w < f.num_worlds; ++w) {
    uint64_t via_e_then_r = 0, via_r_then_e = 0;
    uint64_t es = f.succ(id_e, w), rs = f.succ(id_r, w);
    for (int u = 0; u < f.num_worlds; ++u) {
      if ((es >> u) & 1) via_e_then_r |= f.succ(id_r, u);
      if ((rs >> u) & 1) via_r_then_e |= f.succ(id_e, u);
    }
    if (via_e_then_r & ~via_r_then_e) return false;
  }
  return true;
}
inline bool frame_rcom(const Frame& f, const std::string& id_r, const std::string& id_e) {
  return frame_lcom(f, id_e, id_r);
}

enum class FrameKind { All, Equivalence, Difference, Custom };

struct FrameClassSpec {
  FrameKind kind = FrameKind::All;
  std::function<bool(const Frame&, const std::string&)> custom;

  bool check(const Frame& f, const std::string& id) const {
    switch (kind) {
      case FrameKind::All: return true;
      case FrameKind::Equivalence: return frame_equivalence(f, id);
      case FrameKind::Difference: return frame_difference(f, id);
      case FrameKind::Custom: return custom(f, id);
    }
    return false;
  }
  // canonical one-world member, used for degenerate grafts
  bool unit_reflexive() const { return kind == FrameKind::Equivalence; }

  static FrameClassSpec all() { return {FrameKind::All, nullptr}; }
  static FrameClassSpec equivalence() { return {FrameKind::Equivalence, nullptr}; }
  static FrameClassSpec difference() { return {FrameKind::Difference, nullptr}; }
};

inline Frame disjoint_union(const std::vector<Frame>& frames) {
  Frame out;
  std::set<std::string> ids;
  for (const auto& f : frames)
    for (const auto& [id, _] : f.rel) ids.insert(id);
  for (const auto& f : frames) out.num_worlds += f.num_worlds;
  if (out.num_worlds > kMaxWorlds) throw std::invalid_argument("too many worlds");
  for (const auto& id : ids) out.relation(id);
  int off = 0;
  for (const auto& f : frames) {
    for (const auto& id : ids) {
      const auto* r = f.relation_if(id);
      if (r)
        for (int w = 0; w < f.num_worlds; ++w)
          out.relation(id)[static_cast<size_t>(off + w)] = (*r)[static_cast<size_t>(w)] << off;
    }
    off += f.num_worlds;
  }
  return out;
}

// ---------------------------------------------------------------------------
// First-order Kripke models
// ---------------------------------------------------------------------------

enum class DomainMode { Expanding, Constant };

inline std::string to_string(DomainMode m) { return m == DomainMode::Expanding ? "xd" : "cd"; }

struct FOKripkeModel {
  Frame frame;
  std::vector<uint64_t> domains;                        // per world, non-empty
  std::map<std::string, std::vector<uint64_t>> preds;   // pred -> per-world mask
  std::map<std::string, std::vector<int>> consts;       // const -> per-world element
  DomainMode mode = DomainMode::Expanding;
  uint64_t frontier = 0;  // worlds excluded from global checks

  int num_worlds() const { return frame.num_worlds; }
  int num_elems() const {
    uint64_t all = 0;
    for (uint64_t d : domains) all |= d;
    int n = 0;
    while (all >> n) ++n;
    return n;
  }
  uint64_t pred_mask(const std::string& p, int w) const {
    auto it = preds.find(p);
    return it == preds.end() ? 0 : it->second[static_cast<size_t>(w)];
  }
  int const_at(const std::string& c, int w) const {
    auto it = consts.find(c);
    if (it == consts.end()) throw std::invalid_argument("constant " + c + " undefined");
    return it->second[static_cast<size_t>(w)];
  }
};

// Compact element ids to 0..n-1 across the whole model.
inline void normalize_elements(FOKripkeModel& m) {
  uint64_t used = 0;
  for (uint64_t d : m.domains) used |= d;
  std::vector<int> remap(kMaxElems, -1);
  int next = 0;
  for (int e = 0; e < kMaxElems; ++e)
    if ((used >> e) & 1) remap[static_cast<size_t>(e)] = next++;
  auto squeeze = [&](uint64_t mask) {
    uint64_t out = 0;
    for (int e = 0; e < kMaxElems; ++e)
      if ((mask >> e) & 1) out |= uint64_t{1} << remap[static_cast<size_t>(e)];
    return out;
  };
  for (auto& d : m.domains) d = squeeze(d);
  for (auto& [p, rows] : m.preds)
    for (auto& r : rows) r = squeeze(r);
  for (auto& [c, vals] : m.consts)
    for (auto& v : vals) v = remap[static_cast<size_t>(v)];
}

inline bool validate(const FOKripkeModel& m, std::string* why = nullptr) {
  auto fail = [&](const std::string& s) {
    if (why) *why = s;
    return false;
  };
  int n = m.num_worlds();
  if (n <= 0 || n > kMaxWorlds) return fail("bad world count");
  if (static_cast<int>(m.domains.size()) != n) return fail("domain map size mismatch");
  uint64_t wmask = n == 64 ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);
  for (const auto& [id, rows] : m.frame.rel) {
    if (static_cast<int>(rows.size()) != n) return fail("relation size mismatch for " + id);
    for (uint64_t r : rows)
      if (r & ~wmask) return fail("relation exceeds worlds for " + id);
  }
  for (int w = 0; w < n; ++w)
    if (!m.domains[static_cast<size_t>(w)]) return fail("empty domain at world " + std::to_string(w));
  if (m.mode == DomainMode::Constant) {
    for (int w = 1; w < n; ++w)
      if (m.domains[static_cast<size_t>(w)] != m.domains[0]) return fail("constant mode needs equal domains");
  } else {
    for (const auto& [id, rows] : m.frame.rel)
      for (int w = 0; w < n; ++w)
        for (int v = 0; v < n; ++v)
          if (((rows[static_cast<size_t>(w)] >> v) & 1) &&
              (m.domains[static_cast<size_t>(w)] & ~m.domains[static_cast<size_t>(v)]))
            return fail("expanding domain violated on " + id + " edge " + std::to_string(w) +
                        "->" + std::to_string(v));
  }
  for (const auto& [p, rows] : m.preds) {
    if (static_cast<int>(rows.size()) != n) return fail("pred rows mismatch for " + p);
    for (int w = 0; w < n; ++w)
      if (rows[static_cast<size_t>(w)] & ~m.domains[static_cast<size_t>(w)])
        return fail("pred " + p + " exceeds domain at world " + std::to_string(w));
  }
  for (const auto& [c, vals] : m.consts) {
    if (static_cast<int>(vals.size()) != n) return fail("const values mismatch for " + c);
    for (int w = 0; w < n; ++w) {
      int e = vals[static_cast<size_t>(w)];
      if (e < 0 || !((m.domains[static_cast<size_t>(w)] >> e) & 1))
        return fail("constant " + c + " outside domain at world " + std::to_string(w));
    }
  }
  if (m.frontier & ~wmask) return fail("frontier exceeds worlds");
  return true;
}

// ---------------------------------------------------------------------------
// Model checker. eval_mask returns, per world, the set of elements e such
// that the formula holds under the assignment x := e. Closed formulas come
// out all-or-nothing.
// ---------------------------------------------------------------------------

class Evaluator {
 public:
  explicit Evaluator(const FOKripkeModel& m) : m_(m) {
    uint64_t all = 0;
    for (uint64_t d : m_.domains) all |= d;
    universe_ = all;
  }

  uint64_t eval_mask(const Formula& f, int w) {
    if (roots_.empty() || roots_.back().get() != f.get()) roots_.push_back(f);  // pin for memo
    return eval_inner(f, w);
  }

 private:
  uint64_t eval_inner(const Formula& f, int w) {
    uint64_t key = (static_cast<uint64_t>(reinterpret_cast<uintptr_t>(f.get())) << 7) |
                   static_cast<uint64_t>(w);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    uint64_t r = compute(f, w);
    memo_.emplace(key, r);
    return r;
  }

  uint64_t term_mask(const Term& t, int w) {
    // mask of assignments e for which the term's value equals e is not what
    // we need; instead return the value of the term as a singleton mask for
    // constants, and a marker for the variable handled by callers.
    return t.is_var ? 0 : (uint64_t{1} << m_.const_at(t.constant, w));
  }

  uint64_t compute(const Formula& f, int w) {
    switch (f->kind) {
      case Conn::Atom: {
        uint64_t p = m_.pred_mask(f->name, w);
        if (f->t1.is_var) return p;  // bit e set iff e in I_w(P)
        return (p & term_mask(f->t1, w)) ? universe_ : 0;
      }
      case Conn::Eq: {
        if (f->t1.is_var && f->t2.is_var) return universe_;
        if (f->t1.is_var) return term_mask(f->t2, w);
        if (f->t2.is_var) return term_mask(f->t1, w);
        return term_mask(f->t1, w) == term_mask(f->t2, w) ? universe_ : 0;
      }
      case Conn::Not: return ~eval_inner(f->a, w) & universe_;
      case Conn::And: return eval_inner(f->a, w) & eval_inner(f->b, w);
      case Conn::Box: {
        uint64_t succ = m_.frame.succ(f->name, w);
        uint64_t r = universe_;
        for (int v = 0; v < m_.num_worlds() && r; ++v)
          if ((succ >> v) & 1) r &= eval_inner(f->a, v);
        return r;
      }
      case Conn::Exists: {
        uint64_t inner = eval_inner(f->a, w) & m_.domains[static_cast<size_t>(w)];
        return inner ? universe_ : 0;
      }
    }
    return 0;
  }

  const FOKripkeModel& m_;
  uint64_t universe_ = 0;
  std::unordered_map<uint64_t, uint64_t> memo_;
  std::vector<Formula> roots_;
};

inline bool check(const FOKripkeModel& m, int w, int elem, const Formula& f) {
  Evaluator ev(m);
  return (ev.eval_mask(f, w) >> elem) & 1;
}

inline bool holds_at(const FOKripkeModel& m, int w, const Formula& f, Evaluator* ev = nullptr) {
  std::optional<Evaluator> local;
  if (!ev) {
    local.emplace(m);
    ev = &*local;
  }
  uint64_t dom = m.domains[static_cast<size_t>(w)];
  return (ev->eval_mask(f, w) & dom) == dom;
}

inline bool holds_globally(const FOKripkeModel& m, const Formula& f) {
  Evaluator ev(m);
  for (int w = 0; w < m.num_worlds(); ++w) {
    if ((m.frontier >> w) & 1) continue;
    if (!holds_at(m, w, f, &ev)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Element types
// ---------------------------------------------------------------------------

inline TypeSet<Formula> type_of_element(const FOKripkeModel& m, int w, int elem,
                                        const BasePtr<Formula>& base) {
  if (!((m.domains[static_cast<size_t>(w)] >> elem) & 1))
    throw std::invalid_argument("element not in the domain of this world");
  Evaluator ev(m);
  TypeBits bits = 0;
  for (int i = 0; i < base->size(); ++i)
    if ((ev.eval_mask(base->at(i), w) >> elem) & 1) bits |= Base<Formula>::bit(i);
  return TypeSet<Formula>{base, bits};
}

inline Quasistate<Formula> element_types(const FOKripkeModel& m, int w,
                                         const BasePtr<Formula>& base) {
  Evaluator ev(m);
  std::vector<uint64_t> cols(static_cast<size_t>(base->size()));
  for (int i = 0; i < base->size(); ++i) cols[static_cast<size_t>(i)] = ev.eval_mask(base->at(i), w);
  std::set<TypeBits> seen;
  uint64_t dom = m.domains[static_cast<size_t>(w)];
  for (int e = 0; e < kMaxElems; ++e) {
    if (!((dom >> e) & 1)) continue;
    TypeBits t = 0;
    for (int i = 0; i < base->size(); ++i)
      if ((cols[static_cast<size_t>(i)] >> e) & 1) t |= Base<Formula>::bit(i);
    seen.insert(t);
  }
  Quasistate<Formula> q;
  q.base = base;
  q.types.assign(seen.begin(), seen.end());
  return q;
}

// ---------------------------------------------------------------------------
// Propositional models
// ---------------------------------------------------------------------------

struct PropKripkeModel {
  Frame frame;
  std::map<std::string, uint64_t> valuation;  // letter -> world mask

  uint64_t letter_mask(const std::string& p) const {
    auto it = valuation.find(p);
    return it == valuation.end() ? 0 : it->second;
  }
};

class PropEvaluator {
 public:
  explicit PropEvaluator(const PropKripkeModel& m) : m_(m) {
    all_ = m_.frame.num_worlds == 64 ? ~uint64_t{0}
                                     : ((uint64_t{1} << m_.frame.num_worlds) - 1);
  }
  uint64_t eval(const PropFormula& f) {
    if (roots_.empty() || roots_.back().get() != f.get()) roots_.push_back(f);  // pin for memo
    return eval_inner(f);
  }

 private:
  uint64_t eval_inner(const PropFormula& f) {
    auto it = memo_.find(f.get());
    if (it != memo_.end()) return it->second;
    uint64_t r = compute(f);
    memo_.emplace(f.get(), r);
    return r;
  }
  uint64_t compute(const PropFormula& f) {
    switch (f->kind) {
      case PConn::Letter: return m_.letter_mask(f->name) & all_;
      case PConn::Not: return ~eval_inner(f->a) & all_;
      case PConn::And: return eval_inner(f->a) & eval_inner(f->b);
      case PConn::Box: {
        uint64_t body = eval_inner(f->a);
        uint64_t out = 0;
        for (int w = 0; w < m_.frame.num_worlds; ++w)
          if ((m_.frame.succ(f->name, w) & ~body) == 0) out |= uint64_t{1} << w;
        return out;
      }
    }
    return 0;
  }
  const PropKripkeModel& m_;
  uint64_t all_ = 0;
  std::unordered_map<const PropNode*, uint64_t> memo_;
  std::vector<PropFormula> roots_;
};

inline bool check_prop(const PropKripkeModel& m, int w, const PropFormula& f) {
  PropEvaluator ev(m);
  return (ev.eval(f) >> w) & 1;
}
inline bool holds_globally(const PropKripkeModel& m, const PropFormula& f) {
  PropEvaluator ev(m);
  uint64_t all = m.frame.num_worlds == 64 ? ~uint64_t{0}
                                          : ((uint64_t{1} << m.frame.num_worlds) - 1);
  return ev.eval(f) == all;
}

// The standard product companion of a first-order model: worlds are
// (world, element) pairs, component relations act on the world coordinate,
// the shared S5 relation links pairs with equal world.
inline PropKripkeModel prop_companion(const FOKripkeModel& m,
                                      const std::string& mod_e = kSharedS5) {
  std::vector<std::pair<int, int>> pairs;
  std::map<std::pair<int, int>, int> idx;
  for (int w = 0; w < m.num_worlds(); ++w)
    for (int e = 0; e < kMaxElems; ++e)
      if ((m.domains[static_cast<size_t>(w)] >> e) & 1) {
        idx[{w, e}] = static_cast<int>(pairs.size());
        pairs.emplace_back(w, e);
      }
  if (pairs.size() > kMaxWorlds) throw std::invalid_argument("companion too large");
  PropKripkeModel out;
  out.frame.num_worlds = static_cast<int>(pairs.size());
  for (const auto& [id, rows] : m.frame.rel) {
    auto& r = out.frame.relation(id);
    for (size_t i = 0; i < pairs.size(); ++i) {
      auto [w, e] = pairs[i];
      for (int v = 0; v < m.num_worlds(); ++v)
        if (((rows[static_cast<size_t>(w)] >> v) & 1) && idx.count({v, e}))
          r[i] |= uint64_t{1} << idx[{v, e}];
    }
  }
  auto& er = out.frame.relation(mod_e);
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = 0; j < pairs.size(); ++j)
      if (pairs[i].first == pairs[j].first) er[i] |= uint64_t{1} << j;
  for (const auto& [p, rows] : m.preds) {
    uint64_t mask = 0;
    for (size_t i = 0; i < pairs.size(); ++i)
      if ((rows[static_cast<size_t>(pairs[i].first)] >> pairs[i].second) & 1)
        mask |= uint64_t{1} << i;
    out.valuation[p] = mask;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumeration streams (plain, exhaustive, restartable)
// ---------------------------------------------------------------------------

namespace detail {
inline std::vector<std::vector<uint64_t>> relation_candidates(const FrameClassSpec& spec,
                                                              const std::string& id, int n) {
  std::vector<std::vector<uint64_t>> out;
  uint64_t cells = uint64_t{1} << (n * n);
  for (uint64_t code = 0; code < cells; ++code) {
    Frame f;
    f.num_worlds = n;
    auto& rows = f.relation(id);
    for (int w = 0; w < n; ++w)
      for (int v = 0; v < n; ++v)
        if ((code >> (w * n + v)) & 1) rows[static_cast<size_t>(w)] |= uint64_t{1} << v;
    if (spec.check(f, id)) out.push_back(rows);
  }
  return out;
}
}  // namespace detail

// Exhaustive frames on exactly n worlds; conditions are per modality.
inline void for_each_frame(const std::map<std::string, FrameClassSpec>& specs, int n,
                           const std::function<bool(const Frame&)>& fn) {
  if (n < 1 || n * n > 62) throw std::invalid_argument("frame enumeration bound");
  std::vector<std::string> ids;
  std::vector<std::vector<std::vector<uint64_t>>> cands;
  for (const auto& [id, spec] : specs) {
    ids.push_back(id);
    cands.push_back(detail::relation_candidates(spec, id, n));
    if (cands.back().empty()) return;
  }
  std::vector<size_t> pick(ids.size(), 0);
  for (;;) {
    Frame f;
    f.num_worlds = n;
    for (size_t i = 0; i < ids.size(); ++i) f.rel[ids[i]] = cands[i][pick[i]];
    if (!fn(f)) return;
    size_t i = 0;
    for (; i < ids.size(); ++i) {
      if (++pick[i] < cands[i].size()) break;
      pick[i] = 0;
    }
    if (i == ids.size()) return;
  }
}

inline std::vector<Frame> enumerate_frames(const std::map<std::string, FrameClassSpec>& specs,
                                           int n, size_t cap = 1u << 22) {
  std::vector<Frame> out;
  for_each_frame(specs, n, [&](const Frame& f) {
    out.push_back(f);
    if (out.size() > cap) throw std::runtime_error("frame enumeration exceeded cap");
    return true;
  });
  return out;
}

// All models over a fixed frame: domain assignments valid for the mode, then
// predicate interpretations inside domains, then constant values.
inline void for_each_model_on_frame(const Frame& frame, int n_elems, DomainMode mode,
                                    const std::vector<std::string>& preds,
                                    const std::vector<std::string>& consts,
                                    const std::function<bool(const FOKripkeModel&)>& fn) {
  int n = frame.num_worlds;
  uint64_t full = (uint64_t{1} << n_elems) - 1;

  std::vector<std::vector<uint64_t>> domain_maps;
  if (mode == DomainMode::Constant) {
    domain_maps.push_back(std::vector<uint64_t>(static_cast<size_t>(n), full));
  } else {
    std::vector<uint64_t> cur(static_cast<size_t>(n), 1);
    std::function<void(int)> rec = [&](int w) {
      if (w == n) {
        for (const auto& [id, rows] : frame.rel)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              if (((rows[static_cast<size_t>(a)] >> b) & 1) &&
                  (cur[static_cast<size_t>(a)] & ~cur[static_cast<size_t>(b)]))
                return;
        domain_maps.push_back(cur);
        return;
      }
      for (uint64_t d = 1; d <= full; ++d) {
        cur[static_cast<size_t>(w)] = d;
        rec(w + 1);
      }
    };
    rec(0);
  }

  FOKripkeModel m;
  m.frame = frame;
  m.mode = mode;
  for (const auto& dom : domain_maps) {
    m.domains = dom;
    // predicate interpretations: odometer over (pred, world) cells
    size_t np = preds.size();
    m.preds.clear();
    for (const auto& p : preds) m.preds[p] = std::vector<uint64_t>(static_cast<size_t>(n), 0);
    std::function<bool(size_t)> rec_pred = [&](size_t cell) -> bool {
      if (cell == np * static_cast<size_t>(n)) {
        // constants
        m.consts.clear();
        for (const auto& c : consts) m.consts[c] = std::vector<int>(static_cast<size_t>(n), 0);
        std::function<bool(size_t)> rec_const = [&](size_t ccell) -> bool {
          if (ccell == consts.size() * static_cast<size_t>(n)) return fn(m);
          size_t ci = ccell / static_cast<size_t>(n);
          int w = static_cast<int>(ccell % static_cast<size_t>(n));
          for (int e = 0; e < n_elems; ++e) {
            if (!((dom[static_cast<size_t>(w)] >> e) & 1)) continue;
            m.consts[consts[ci]][static_cast<size_t>(w)] = e;
            if (!rec_const(ccell + 1)) return false;
          }
          return true;
        };
        return rec_const(0);
      }
      size_t pi = cell / static_cast<size_t>(n);
      int w = static_cast<int>(cell % static_cast<size_t>(n));
      uint64_t d = dom[static_cast<size_t>(w)];
      for (uint64_t s = 0;; s = ((s | ~d) + 1) & d) {  // subsets of d
        m.preds[preds[pi]][static_cast<size_t>(w)] = s;
        if (!rec_pred(cell + 1)) return false;
        if (s == d) break;
      }
      return true;
    };
    if (!rec_pred(0)) return;
  }
}

inline void for_each_fomodel(const std::map<std::string, FrameClassSpec>& specs, int n_worlds,
                             int n_elems, DomainMode mode, const std::vector<std::string>& preds,
                             const std::vector<std::string>& consts,
                             const std::function<bool(const FOKripkeModel&)>& fn) {
  for_each_frame(specs, n_worlds, [&](const Frame& fr) {
    bool keep = true;
    for_each_model_on_frame(fr, n_elems, mode, preds, consts, [&](const FOKripkeModel& m) {
      keep = fn(m);
      return keep;
    });
    return keep;
  });
}

}  // namespace ovml
