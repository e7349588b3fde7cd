#pragma once

// Types and quasistates over a subformula-closed base.
//
// A base is a canonically ordered, subformula-closed list of formulas; types
// are sign bitsets over it. The (t1)/(t2) constraints make the signs of ~ and
// & nodes functions of their children, so enumeration ranges over the free
// nodes only. Quasistates add the saturation condition: existential members
// in the first-order case, shared-S5 boxes in the propositional case.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/prop_formula.hpp"

namespace ovml {

// Uniform node access for the two formula kinds.
template <class F>
struct Syn;

template <>
struct Syn<Formula> {
  static constexpr bool first_order = true;
  using Set = FormulaSet;
  using Less = FormulaLess;
  static bool is_not(const Formula& f) { return f->kind == Conn::Not; }
  static bool is_and(const Formula& f) { return f->kind == Conn::And; }
  static bool is_box(const Formula& f) { return f->kind == Conn::Box; }
  static const std::string& box_id(const Formula& f) { return f->name; }
  static const Formula& child(const Formula& f) { return f->a; }
  static const Formula& left(const Formula& f) { return f->a; }
  static const Formula& right(const Formula& f) { return f->b; }
  static Formula mknot(Formula f) { return mk_not(std::move(f)); }
  static Formula mkand(Formula a, Formula b) { return mk_and(std::move(a), std::move(b)); }
  static Formula top() { return mk_top(); }
  static Formula bottom() { return mk_bottom(); }
  static Set sub(const Formula& f) { return subformulas(f); }
  // saturating member: E x . psi
  static bool is_saturating(const Formula& f, const std::string&) {
    return f->kind == Conn::Exists;
  }
  static constexpr bool saturate_some = true;  // sign true iff some member has the body
  static Formula quantify_all(Formula f, const std::string&) { return mk_forall(std::move(f)); }
  static Formula quantify_some(Formula f, const std::string&) { return mk_exists(std::move(f)); }
};

template <>
struct Syn<PropFormula> {
  static constexpr bool first_order = false;
  using Set = PropSet;
  using Less = PropLess;
  static bool is_not(const PropFormula& f) { return f->kind == PConn::Not; }
  static bool is_and(const PropFormula& f) { return f->kind == PConn::And; }
  static bool is_box(const PropFormula& f) { return f->kind == PConn::Box; }
  static const std::string& box_id(const PropFormula& f) { return f->name; }
  static const PropFormula& child(const PropFormula& f) { return f->a; }
  static const PropFormula& left(const PropFormula& f) { return f->a; }
  static const PropFormula& right(const PropFormula& f) { return f->b; }
  static PropFormula mknot(PropFormula f) { return mk_pnot(std::move(f)); }
  static PropFormula mkand(PropFormula a, PropFormula b) {
    return mk_pand(std::move(a), std::move(b));
  }
  static PropFormula top() { return mk_ptop(); }
  static PropFormula bottom() { return mk_pbottom(); }
  static Set sub(const PropFormula& f) { return subformulas(f); }
  // saturating member: []E psi; sign true iff *all* members have the body
  static bool is_saturating(const PropFormula& f, const std::string& mod_e) {
    return f->kind == PConn::Box && f->name == mod_e;
  }
  static constexpr bool saturate_some = false;
  static PropFormula quantify_all(PropFormula f, const std::string& mod_e) {
    return mk_pbox(mod_e, std::move(f));
  }
  static PropFormula quantify_some(PropFormula f, const std::string& mod_e) {
    return mk_pdiamond(mod_e, std::move(f));
  }
};

using TypeBits = uint64_t;

template <class F>
class Base {
 public:
  Base() = default;
  explicit Base(const typename Syn<F>::Set& closed, std::string mod_e = kSharedS5)
      : mod_e_(std::move(mod_e)) {
    if (closed.size() > 64) throw std::invalid_argument("formula base larger than 64");
    for (const auto& f : closed) {  // set iteration = canonical order, children first
      index_.emplace(f, static_cast<int>(items_.size()));
      items_.push_back(f);
    }
    for (int i = 0; i < size(); ++i) {
      const F& f = items_[i];
      if (Syn<F>::is_not(f) || Syn<F>::is_and(f)) determined_mask_ |= bit(i);
      if (Syn<F>::is_saturating(f, mod_e_)) saturating_.push_back(i);
    }
  }

  int size() const { return static_cast<int>(items_.size()); }
  bool empty() const { return items_.empty(); }
  const std::vector<F>& items() const { return items_; }
  const F& at(int i) const { return items_[static_cast<size_t>(i)]; }
  const std::string& mod_e() const { return mod_e_; }
  static TypeBits bit(int i) { return TypeBits{1} << i; }

  int index_of(const F& f) const {
    auto it = index_.find(f);
    return it == index_.end() ? -1 : it->second;
  }
  bool contains(const F& f) const { return index_.count(f) != 0; }

  const std::vector<int>& saturating() const { return saturating_; }
  TypeBits determined_mask() const { return determined_mask_; }

  std::vector<int> free_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (!(determined_mask_ & bit(i))) out.push_back(i);
    return out;
  }

  // Propagate (t1)/(t2) from free signs; base order lists children first.
  TypeBits complete(TypeBits free_signs) const {
    TypeBits t = 0;
    for (int i = 0; i < size(); ++i) {
      const F& f = items_[i];
      bool s;
      if (Syn<F>::is_not(f)) {
        s = !(t & bit(index_of(Syn<F>::child(f))));
      } else if (Syn<F>::is_and(f)) {
        s = (t & bit(index_of(Syn<F>::left(f)))) && (t & bit(index_of(Syn<F>::right(f))));
      } else {
        s = (free_signs & bit(i)) != 0;
      }
      if (s) t |= bit(i);
    }
    return t;
  }

  // A sign pattern is a valid type iff the determined bits agree.
  bool consistent(TypeBits t) const { return complete(t) == t; }

  friend bool operator==(const Base& a, const Base& b) {
    if (a.size() != b.size() || a.mod_e_ != b.mod_e_) return false;
    for (int i = 0; i < a.size(); ++i)
      if (!equal(a.items_[static_cast<size_t>(i)], b.items_[static_cast<size_t>(i)])) return false;
    return true;
  }

 private:
  std::vector<F> items_;
  std::map<F, int, typename Syn<F>::Less> index_;
  std::vector<int> saturating_;
  TypeBits determined_mask_ = 0;
  std::string mod_e_ = kSharedS5;
};

template <class F>
using BasePtr = std::shared_ptr<const Base<F>>;

template <class F>
BasePtr<F> make_base(const typename Syn<F>::Set& closed, std::string mod_e = kSharedS5) {
  return std::make_shared<const Base<F>>(closed, std::move(mod_e));
}

template <class F>
struct TypeSet {
  BasePtr<F> base;
  TypeBits bits = 0;

  bool has(int i) const { return (bits & Base<F>::bit(i)) != 0; }
  bool has(const F& f) const {
    int i = base->index_of(f);
    return i >= 0 && has(i);
  }
  // signed member list in base order
  std::vector<F> members() const {
    std::vector<F> out;
    for (int i = 0; i < base->size(); ++i)
      out.push_back(has(i) ? base->at(i) : Syn<F>::mknot(base->at(i)));
    return out;
  }
  // t(x): conjunction of all signed members; empty base gives top
  F closure_formula() const {
    std::vector<F> ms = members();
    if (ms.empty()) return Syn<F>::top();
    F r = ms[0];
    for (size_t i = 1; i < ms.size(); ++i) r = Syn<F>::mkand(r, ms[i]);
    return r;
  }
  friend bool operator==(const TypeSet& a, const TypeSet& b) {
    return a.bits == b.bits && *a.base == *b.base;
  }
  friend bool operator<(const TypeSet& a, const TypeSet& b) { return a.bits < b.bits; }
};

template <class F>
struct Quasistate {
  BasePtr<F> base;
  std::vector<TypeBits> types;  // sorted ascending, non-empty

  bool contains(TypeBits t) const {
    for (TypeBits x : types)
      if (x == t) return true;
    return false;
  }
  friend bool operator==(const Quasistate& a, const Quasistate& b) {
    return a.types == b.types && *a.base == *b.base;
  }
  friend bool operator<(const Quasistate& a, const Quasistate& b) { return a.types < b.types; }
};

// ---------------------------------------------------------------------------

template <class F>
std::vector<TypeSet<F>> enumerate_types(const BasePtr<F>& base) {
  std::vector<int> free = base->free_indices();
  if (free.size() > 30) throw std::runtime_error("type enumeration too large");
  std::vector<TypeSet<F>> out;
  out.reserve(size_t{1} << free.size());
  for (uint64_t pat = 0; pat < (uint64_t{1} << free.size()); ++pat) {
    TypeBits fs = 0;
    for (size_t j = 0; j < free.size(); ++j)
      if (pat & (uint64_t{1} << j)) fs |= Base<F>::bit(free[j]);
    out.push_back(TypeSet<F>{base, base->complete(fs)});
  }
  return out;
}

// The saturation condition on a set of types.
template <class F>
bool quasistate_ok(const Base<F>& base, const std::vector<TypeBits>& types) {
  if (types.empty()) return false;
  for (int i : base.saturating()) {
    int body = base.index_of(Syn<F>::child(base.at(i)));
    bool sign0 = (types[0] & Base<F>::bit(i)) != 0;
    bool rhs;
    if (Syn<F>::saturate_some) {
      rhs = false;
      for (TypeBits t : types) rhs = rhs || (t & Base<F>::bit(body));
    } else {
      rhs = true;
      for (TypeBits t : types) rhs = rhs && (t & Base<F>::bit(body));
    }
    for (TypeBits t : types) {
      bool s = (t & Base<F>::bit(i)) != 0;
      if (s != sign0 || s != rhs) return false;
    }
  }
  return true;
}

// All quasistates, grouped enumeration: types must agree on saturating signs,
// witnesses are then checked once per saturating member.
template <class F>
std::vector<Quasistate<F>> enumerate_quasistates(const BasePtr<F>& base,
                                                 size_t cap = size_t{1} << 22) {
  std::vector<TypeSet<F>> types = enumerate_types(base);
  const auto& satur = base->saturating();

  // group by saturating signature
  std::map<TypeBits, std::vector<TypeBits>> groups;
  TypeBits satmask = 0;
  for (int i : satur) satmask |= Base<F>::bit(i);
  for (const auto& t : types) groups[t.bits & satmask].push_back(t.bits);

  std::vector<Quasistate<F>> out;
  for (auto& [sig, members] : groups) {
    // filter and collect witness masks
    std::vector<TypeBits> allowed;
    for (TypeBits t : members) {
      bool ok = true;
      for (int i : satur) {
        bool s = (sig & Base<F>::bit(i)) != 0;
        bool body = (t & Base<F>::bit(base->index_of(Syn<F>::child(base->at(i))))) != 0;
        // members that would make the saturation RHS disagree with the sign
        if (Syn<F>::saturate_some ? (!s && body) : (s && !body)) {
          ok = false;
          break;
        }
      }
      if (ok) allowed.push_back(t);
    }
    if (allowed.empty()) continue;
    if (allowed.size() > 24) throw std::runtime_error("quasistate enumeration too large");

    std::vector<uint64_t> witness_masks;
    for (int i : satur) {
      bool s = (sig & Base<F>::bit(i)) != 0;
      bool need = Syn<F>::saturate_some ? s : !s;
      if (!need) continue;
      uint64_t wm = 0;
      for (size_t j = 0; j < allowed.size(); ++j) {
        bool body =
            (allowed[j] & Base<F>::bit(base->index_of(Syn<F>::child(base->at(i))))) != 0;
        if (Syn<F>::saturate_some ? body : !body) wm |= uint64_t{1} << j;
      }
      witness_masks.push_back(wm);
    }

    for (uint64_t s = 1; s < (uint64_t{1} << allowed.size()); ++s) {
      bool ok = true;
      for (uint64_t wm : witness_masks)
        if (!(s & wm)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      Quasistate<F> q;
      q.base = base;
      for (size_t j = 0; j < allowed.size(); ++j)
        if (s & (uint64_t{1} << j)) q.types.push_back(allowed[j]);
      out.push_back(std::move(q));
      if (out.size() > cap) throw std::runtime_error("quasistate enumeration exceeded cap");
    }
  }
  // canonical order
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Realisability sentences
// ---------------------------------------------------------------------------

template <class F>
F realisability(const Quasistate<F>& q) {
  const std::string& e = q.base->mod_e();
  std::vector<F> closures;
  for (TypeBits t : q.types) closures.push_back(TypeSet<F>{q.base, t}.closure_formula());
  F big_disj = closures[0];
  for (size_t i = 1; i < closures.size(); ++i) {
    // disjunction via the core connectives
    big_disj = Syn<F>::mknot(
        Syn<F>::mkand(Syn<F>::mknot(big_disj), Syn<F>::mknot(closures[i])));
  }
  F all_part = Syn<F>::quantify_all(big_disj, e);
  F some_part = Syn<F>::quantify_some(closures[0], e);
  for (size_t i = 1; i < closures.size(); ++i)
    some_part = Syn<F>::mkand(some_part, Syn<F>::quantify_some(closures[i], e));
  return Syn<F>::mkand(all_part, some_part);
}

template <class F>
F realisability_disj(const std::vector<Quasistate<F>>& qs) {
  if (qs.empty()) return Syn<F>::bottom();
  F r = realisability(qs[0]);
  for (size_t i = 1; i < qs.size(); ++i) {
    F n = realisability(qs[i]);
    r = Syn<F>::mknot(Syn<F>::mkand(Syn<F>::mknot(r), Syn<F>::mknot(n)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Restriction
// ---------------------------------------------------------------------------

template <class F>
TypeSet<F> restrict_type(const TypeSet<F>& t, const BasePtr<F>& sub) {
  TypeBits bits = 0;
  for (int i = 0; i < sub->size(); ++i) {
    int j = t.base->index_of(sub->at(i));
    if (j < 0) throw std::invalid_argument("restriction base is not a subset");
    if (t.has(j)) bits |= Base<F>::bit(i);
  }
  return TypeSet<F>{sub, bits};
}

template <class F>
Quasistate<F> restrict_quasistate(const Quasistate<F>& q, const BasePtr<F>& sub) {
  std::vector<TypeBits> ts;
  for (TypeBits t : q.types) {
    TypeBits r = restrict_type(TypeSet<F>{q.base, t}, sub).bits;
    bool seen = false;
    for (TypeBits x : ts) seen = seen || x == r;
    if (!seen) ts.push_back(r);
  }
  std::sort(ts.begin(), ts.end());
  return Quasistate<F>{sub, std::move(ts)};
}

// Build a type by evaluating each base member.
template <class F>
TypeSet<F> type_from_signs(const BasePtr<F>& base, const std::function<bool(const F&)>& sign) {
  TypeBits bits = 0;
  for (int i = 0; i < base->size(); ++i)
    if (sign(base->at(i))) bits |= Base<F>::bit(i);
  TypeSet<F> t{base, bits};
  return t;
}

// Debug dump: one type per line, quasistates as bracketed groups.
template <class F>
std::string dump_type(const TypeSet<F>& t) {
  std::string out;
  bool first = true;
  for (const F& m : t.members()) {
    if (!first) out += ", ";
    first = false;
    out += print(m);
  }
  return out;
}
template <class F>
std::string dump_quasistate(const Quasistate<F>& q) {
  std::string out = "[\n";
  for (TypeBits t : q.types) {
    out += "  ";
    out += dump_type(TypeSet<F>{q.base, t});
    out += "\n";
  }
  out += "]";
  return out;
}

}  // namespace ovml
