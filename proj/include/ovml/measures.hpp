#pragma once

// Surrogate translations and the combinatorial measures that drive the local
// decider: theta extraction, alternation depth, modal depth and depth slices.
//
// Surrogate names are content-addressed: the printed boxed subformula is
// escaped into an identifier, so structurally equal subformulas always get
// the same name and restore() can decode a surrogate without side tables.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/parse.hpp"
#include "ovml/prop_formula.hpp"
#include "ovml/types.hpp"

namespace ovml {

inline const std::string kSurPrefix = "__sur_";

namespace detail {
inline std::string slug_encode(const std::string& s) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      out += static_cast<char>(c);
    } else {
      out += '_';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}
inline std::string slug_decode(const std::string& s) {
  auto val = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (size_t i = 0; i < s.size();) {
    if (s[i] == '_') {
      if (i + 2 >= s.size()) throw std::invalid_argument("bad surrogate slug");
      int h = val(s[i + 1]), l = val(s[i + 2]);
      if (h < 0 || l < 0) throw std::invalid_argument("bad surrogate slug");
      out += static_cast<char>(h * 16 + l);
      i += 3;
    } else {
      out += s[i++];
    }
  }
  return out;
}
}  // namespace detail

inline std::string surrogate_name(const Formula& boxed) {
  return kSurPrefix + detail::slug_encode(print(boxed));
}
inline std::string surrogate_name(const PropFormula& boxed) {
  return kSurPrefix + detail::slug_encode(print(boxed));
}
inline bool is_surrogate_name(const std::string& n) { return n.rfind(kSurPrefix, 0) == 0; }

inline Formula decode_surrogate(const std::string& name) {
  if (!is_surrogate_name(name)) throw std::invalid_argument("unknown surrogate name " + name);
  Language lang = Language::fused(true);
  lang.open_modalities = true;
  return parse(detail::slug_decode(name.substr(kSurPrefix.size())), lang, true);
}
inline PropFormula decode_surrogate_prop(const std::string& name) {
  if (!is_surrogate_name(name)) throw std::invalid_argument("unknown surrogate name " + name);
  return parse_prop(detail::slug_decode(name.substr(kSurPrefix.size())), nullptr, true);
}

inline std::string component_modality(int i) { return i == 1 ? "1" : "2"; }
inline int other_component(int i) { return 3 - i; }

// ---------------------------------------------------------------------------
// sur_i and rsur_i
// ---------------------------------------------------------------------------

// Surrogate formula standing for a boxed subformula: P(x) when the body is
// open, A x . P(x) when it is closed.
inline Formula surrogate_of(const Formula& boxed) {
  Formula atom = mk_atom(surrogate_name(boxed));
  return boxed->open ? atom : mk_forall(atom);
}

// sur_i: replace the maximal boxes of the other component by surrogates.
inline Formula surrogate_fo(int i, const Formula& f) {
  const std::string& foreign = component_modality(other_component(i));
  if (f->kind == Conn::Box && f->name == foreign) return surrogate_of(f);
  switch (f->kind) {
    case Conn::Atom:
    case Conn::Eq: return f;
    case Conn::Not: return mk_not(surrogate_fo(i, f->a));
    case Conn::Box: return mk_box(f->name, surrogate_fo(i, f->a));
    case Conn::Exists: return mk_exists(surrogate_fo(i, f->a));
    case Conn::And: return mk_and(surrogate_fo(i, f->a), surrogate_fo(i, f->b));
  }
  return f;
}

inline PropFormula surrogate_prop(int i, const PropFormula& f) {
  const std::string& foreign = component_modality(other_component(i));
  if (f->kind == PConn::Box && f->name == foreign) return mk_pletter(surrogate_name(f));
  switch (f->kind) {
    case PConn::Letter: return f;
    case PConn::Not: return mk_pnot(surrogate_prop(i, f->a));
    case PConn::Box: return mk_pbox(f->name, surrogate_prop(i, f->a));
    case PConn::And: return mk_pand(surrogate_prop(i, f->a), surrogate_prop(i, f->b));
  }
  return f;
}

// rsur_i: re-introduce the boxes the surrogates stand for, with the
// replacement bodies built from surrogates for their own foreign boxes.
inline Formula restore_fo(int i, const Formula& f) {
  const std::string& foreign = component_modality(other_component(i));
  auto expand = [&](const std::string& name) {
    Formula boxed = decode_surrogate(name);
    if (boxed->kind != Conn::Box || boxed->name != foreign)
      throw std::invalid_argument("surrogate does not name a component-" + foreign +
                                  " box: " + name);
    return surrogate_fo(other_component(i), boxed);
  };
  // closed surrogate pattern: ~E x . ~P(x)
  if (f->kind == Conn::Not && f->a->kind == Conn::Exists && f->a->a->kind == Conn::Not &&
      f->a->a->a->kind == Conn::Atom && is_surrogate_name(f->a->a->a->name) &&
      f->a->a->a->t1.is_var) {
    return expand(f->a->a->a->name);
  }
  switch (f->kind) {
    case Conn::Atom:
      if (is_surrogate_name(f->name)) {
        Formula boxed = decode_surrogate(f->name);
        if (!boxed->open)
          throw std::invalid_argument("closed surrogate used outside its pattern: " + f->name);
        return expand(f->name);
      }
      return f;
    case Conn::Eq: return f;
    case Conn::Not: return mk_not(restore_fo(i, f->a));
    case Conn::Box: return mk_box(f->name, restore_fo(i, f->a));
    case Conn::Exists: return mk_exists(restore_fo(i, f->a));
    case Conn::And: return mk_and(restore_fo(i, f->a), restore_fo(i, f->b));
  }
  return f;
}

inline PropFormula restore_prop(int i, const PropFormula& f) {
  const std::string& foreign = component_modality(other_component(i));
  switch (f->kind) {
    case PConn::Letter:
      if (is_surrogate_name(f->name)) {
        PropFormula boxed = decode_surrogate_prop(f->name);
        if (boxed->kind != PConn::Box || boxed->name != foreign)
          throw std::invalid_argument("surrogate does not name a component-" + foreign +
                                      " box: " + f->name);
        return surrogate_prop(other_component(i), boxed);
      }
      return f;
    case PConn::Not: return mk_pnot(restore_prop(i, f->a));
    case PConn::Box: return mk_pbox(f->name, restore_prop(i, f->a));
    case PConn::And: return mk_pand(restore_prop(i, f->a), restore_prop(i, f->b));
  }
  return f;
}

template <class F>
bool contains_surrogate(const F& f) {
  if constexpr (Syn<F>::first_order) {
    if (f->kind == Conn::Atom) return is_surrogate_name(f->name);
    if (f->kind == Conn::Eq) return false;
  } else {
    if (f->kind == PConn::Letter) return is_surrogate_name(f->name);
  }
  if (Syn<F>::is_and(f))
    return contains_surrogate(Syn<F>::left(f)) || contains_surrogate(Syn<F>::right(f));
  return contains_surrogate(Syn<F>::child(f));
}

// ---------------------------------------------------------------------------
// theta
// ---------------------------------------------------------------------------

// First-order: atoms plus all subformulas of foreign-boxed subformulas.
inline FormulaSet theta(int i, const FormulaSet& phi) {
  const std::string& foreign = component_modality(other_component(i));
  FormulaSet out;
  for (const Formula& f : phi) {
    if (f->kind == Conn::Atom) out.insert(f);
    if (f->kind == Conn::Box && f->name == foreign)
      for (const Formula& g : subformulas(f)) out.insert(g);
  }
  return out;
}

// Propositional: letters plus all subformulas of foreign-boxed subformulas.
inline PropSet theta(int i, const PropSet& phi) {
  const std::string& foreign = component_modality(other_component(i));
  PropSet out;
  for (const PropFormula& f : phi) {
    if (f->kind == PConn::Letter) out.insert(f);
    if (f->kind == PConn::Box && f->name == foreign)
      for (const PropFormula& g : subformulas(f)) out.insert(g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alternation depth and modal depth
// ---------------------------------------------------------------------------

struct AdpPair {
  int lead1 = 0;  // restore-chain length starting from sur_1
  int lead2 = 0;
};

template <class F>
AdpPair adp_pair(const F& f) {
  if constexpr (Syn<F>::first_order) {
    if (f->kind == Conn::Atom || f->kind == Conn::Eq) return {};
  } else {
    if (f->kind == PConn::Letter) return {};
  }
  if (Syn<F>::is_and(f)) {
    AdpPair l = adp_pair(Syn<F>::left(f));
    AdpPair r = adp_pair(Syn<F>::right(f));
    return {std::max(l.lead1, r.lead1), std::max(l.lead2, r.lead2)};
  }
  AdpPair c = adp_pair(Syn<F>::child(f));
  if (Syn<F>::is_box(f)) {
    const std::string& id = Syn<F>::box_id(f);
    if (id == component_modality(1)) return {c.lead1, 1 + c.lead1};
    if (id == component_modality(2)) return {1 + c.lead2, c.lead2};
  }
  return c;  // negation, quantifier, shared-S5 box
}

template <class F>
AdpPair adp_pair(const std::vector<F>& fs) {
  AdpPair acc;
  for (const F& f : fs) {
    AdpPair p = adp_pair(f);
    acc.lead1 = std::max(acc.lead1, p.lead1);
    acc.lead2 = std::max(acc.lead2, p.lead2);
  }
  return acc;
}

template <class F>
int adp_i(int i, const F& f) {
  AdpPair p = adp_pair(f);
  return i == 1 ? p.lead1 : p.lead2;
}

struct Adp {
  int value = 0;
  int leading = 1;  // component attaining the minimum; ties resolve to 1
};

inline Adp adp_of(const AdpPair& p) {
  if (p.lead1 <= p.lead2) return {p.lead1, 1};
  return {p.lead2, 2};
}
template <class F>
Adp adp(const F& f) {
  return adp_of(adp_pair(f));
}
template <class F>
Adp adp(const std::vector<F>& fs) {
  return adp_of(adp_pair(fs));
}

template <class F>
int md(int i, const F& f) {
  if constexpr (Syn<F>::first_order) {
    if (f->kind == Conn::Atom || f->kind == Conn::Eq) return 0;
  } else {
    if (f->kind == PConn::Letter) return 0;
  }
  if (Syn<F>::is_and(f)) return std::max(md(i, Syn<F>::left(f)), md(i, Syn<F>::right(f)));
  int c = md(i, Syn<F>::child(f));
  if (Syn<F>::is_box(f) && Syn<F>::box_id(f) == component_modality(i)) return 1 + c;
  return c;
}

template <class F>
int md(int i, const std::vector<F>& fs) {
  int m = 0;
  for (const F& f : fs) m = std::max(m, md(i, f));
  return m;
}

// Depth slice: members of phi whose component-i modal depth is at most h.
template <class F>
typename Syn<F>::Set gamma(int i, int h, const typename Syn<F>::Set& phi) {
  typename Syn<F>::Set out;
  if (h < 0) return out;
  for (const F& f : phi)
    if (md(i, f) <= h) out.insert(f);
  return out;
}

}  // namespace ovml
