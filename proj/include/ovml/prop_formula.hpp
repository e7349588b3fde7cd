#pragma once

// Propositional multimodal formulas. One distinguished modality id plays the
// shared S5 role; by convention it is "E" unless a caller says otherwise.

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovml/formula.hpp"  // hash_mix, kFalsePred

namespace ovml {

inline const std::string kSharedS5 = "E";

enum class PConn : uint8_t { Letter, Not, And, Box };

struct PropNode;
using PropFormula = std::shared_ptr<const PropNode>;

struct PropNode {
  PConn kind;
  std::string name;  // Letter name or Box modality id
  PropFormula a, b;
  size_t hash = 0;
  int size = 1;
};

inline PropFormula mk_pnode(PropNode n) {
  size_t h = (static_cast<size_t>(n.kind) + 17) * 0x100000001b3ULL;
  h = detail::hash_mix(h, std::hash<std::string>{}(n.name));
  switch (n.kind) {
    case PConn::Letter: n.size = 1; break;
    case PConn::Not:
    case PConn::Box:
      h = detail::hash_mix(h, n.a->hash);
      n.size = 1 + n.a->size;
      break;
    case PConn::And:
      h = detail::hash_mix(h, n.a->hash);
      h = detail::hash_mix(h, n.b->hash);
      n.size = 1 + n.a->size + n.b->size;
      break;
  }
  n.hash = h;
  return std::make_shared<const PropNode>(std::move(n));
}

inline PropFormula mk_pletter(std::string name) {
  PropNode n;
  n.kind = PConn::Letter;
  n.name = std::move(name);
  return mk_pnode(std::move(n));
}
inline PropFormula mk_pnot(PropFormula f) {
  PropNode n;
  n.kind = PConn::Not;
  n.a = std::move(f);
  return mk_pnode(std::move(n));
}
inline PropFormula mk_pand(PropFormula l, PropFormula r) {
  PropNode n;
  n.kind = PConn::And;
  n.a = std::move(l);
  n.b = std::move(r);
  return mk_pnode(std::move(n));
}
inline PropFormula mk_pbox(std::string modality, PropFormula f) {
  PropNode n;
  n.kind = PConn::Box;
  n.name = std::move(modality);
  n.a = std::move(f);
  return mk_pnode(std::move(n));
}

inline bool equal(const PropFormula& x, const PropFormula& y) {
  if (x.get() == y.get()) return true;
  if (x->hash != y->hash || x->kind != y->kind || x->name != y->name) return false;
  switch (x->kind) {
    case PConn::Letter: return true;
    case PConn::Not:
    case PConn::Box: return equal(x->a, y->a);
    case PConn::And: return equal(x->a, y->a) && equal(x->b, y->b);
  }
  return false;
}

inline int compare(const PropFormula& x, const PropFormula& y) {
  if (x.get() == y.get()) return 0;
  if (x->size != y->size) return x->size < y->size ? -1 : 1;
  if (x->kind != y->kind) return x->kind < y->kind ? -1 : 1;
  if (int c = x->name.compare(y->name)) return c < 0 ? -1 : 1;
  switch (x->kind) {
    case PConn::Letter: return 0;
    case PConn::Not:
    case PConn::Box: return compare(x->a, y->a);
    case PConn::And: {
      if (int c = compare(x->a, y->a)) return c;
      return compare(x->b, y->b);
    }
  }
  return 0;
}

struct PropLess {
  bool operator()(const PropFormula& x, const PropFormula& y) const { return compare(x, y) < 0; }
};
using PropSet = std::set<PropFormula, PropLess>;

inline PropFormula mk_pbottom() {
  static const PropFormula bot = [] {
    PropFormula p = mk_pletter(kFalsePred);
    return mk_pand(p, mk_pnot(p));
  }();
  return bot;
}
inline PropFormula mk_ptop() {
  static const PropFormula top = mk_pnot(mk_pbottom());
  return top;
}
inline bool is_bottom(const PropFormula& f) { return equal(f, mk_pbottom()); }
inline bool is_top(const PropFormula& f) { return equal(f, mk_ptop()); }

inline PropFormula mk_por(PropFormula l, PropFormula r) {
  return mk_pnot(mk_pand(mk_pnot(std::move(l)), mk_pnot(std::move(r))));
}
inline PropFormula mk_pimplies(PropFormula l, PropFormula r) {
  return mk_pnot(mk_pand(std::move(l), mk_pnot(std::move(r))));
}
inline PropFormula mk_piff(const PropFormula& l, const PropFormula& r) {
  return mk_pand(mk_pimplies(l, r), mk_pimplies(r, l));
}
inline PropFormula mk_pdiamond(const std::string& modality, PropFormula f) {
  return mk_pnot(mk_pbox(modality, mk_pnot(std::move(f))));
}

inline PropFormula pconj_all(const std::vector<PropFormula>& fs) {
  if (fs.empty()) return mk_ptop();
  PropFormula r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = mk_pand(r, fs[i]);
  return r;
}
inline PropFormula pdisj_all(const std::vector<PropFormula>& fs) {
  if (fs.empty()) return mk_pbottom();
  PropFormula r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = mk_por(r, fs[i]);
  return r;
}

inline PropFormula mk_pbox_upto(const std::string& modality, int n, const PropFormula& f) {
  PropFormula acc = f;
  PropFormula boxed = f;
  for (int k = 1; k <= n; ++k) {
    boxed = mk_pbox(modality, boxed);
    acc = mk_pand(acc, boxed);
  }
  return acc;
}

// box_iE_pow(i, m, f): the m-fold E-relative prefix,
//   pow(1) = []E []i []E f,   pow(m+1) = []E []i []E pow(m).
inline PropFormula mk_box_iE_pow(const std::string& mod_i, int m, const PropFormula& f,
                                 const std::string& mod_e = kSharedS5) {
  if (m < 1) throw std::invalid_argument("box_iE_pow requires m >= 1");
  PropFormula acc = f;
  for (int k = 0; k < m; ++k) acc = mk_pbox(mod_e, mk_pbox(mod_i, mk_pbox(mod_e, acc)));
  return acc;
}
// box_iE_upto(i, m, f) = f & pow(1) & ... & pow(m)
inline PropFormula mk_box_iE_upto(const std::string& mod_i, int m, const PropFormula& f,
                                  const std::string& mod_e = kSharedS5) {
  PropFormula acc = f;
  for (int k = 1; k <= m; ++k) acc = mk_pand(acc, mk_box_iE_pow(mod_i, k, f, mod_e));
  return acc;
}

// lcom / rcom axiom instances over a single letter.
inline PropFormula mk_lcom(const std::string& mod, const std::string& letter = "p",
                           const std::string& mod_e = kSharedS5) {
  PropFormula p = mk_pletter(letter);
  return mk_pimplies(mk_pbox(mod, mk_pbox(mod_e, p)), mk_pbox(mod_e, mk_pbox(mod, p)));
}
inline PropFormula mk_rcom(const std::string& mod, const std::string& letter = "p",
                           const std::string& mod_e = kSharedS5) {
  PropFormula p = mk_pletter(letter);
  return mk_pimplies(mk_pbox(mod_e, mk_pbox(mod, p)), mk_pbox(mod, mk_pbox(mod_e, p)));
}

// ---------------------------------------------------------------------------

namespace detail {
inline void print_punary(std::string& out, const PropFormula& f);
inline void print_pconj(std::string& out, const PropFormula& f) {
  if (is_bottom(f)) { out += "false"; return; }
  if (is_top(f)) { out += "true"; return; }
  if (f->kind == PConn::And) {
    print_pconj(out, f->a);
    out += " & ";
    print_punary(out, f->b);
    return;
  }
  print_punary(out, f);
}
inline void print_punary(std::string& out, const PropFormula& f) {
  if (is_bottom(f)) { out += "false"; return; }
  if (is_top(f)) { out += "true"; return; }
  switch (f->kind) {
    case PConn::Letter: out += f->name; break;
    case PConn::Not:
      out += "~";
      print_punary(out, f->a);
      break;
    case PConn::Box:
      out += "[]";
      out += f->name;
      out += " ";
      print_punary(out, f->a);
      break;
    case PConn::And:
      out += "(";
      print_pconj(out, f);
      out += ")";
      break;
  }
}
}  // namespace detail

inline std::string print(const PropFormula& f) {
  std::string out;
  detail::print_pconj(out, f);
  return out;
}

namespace detail {
inline void collect_psub(const PropFormula& f, PropSet& out) {
  if (!out.insert(f).second) return;
  switch (f->kind) {
    case PConn::Letter: break;
    case PConn::Not:
    case PConn::Box: collect_psub(f->a, out); break;
    case PConn::And:
      collect_psub(f->a, out);
      collect_psub(f->b, out);
      break;
  }
}
}  // namespace detail

inline PropSet subformulas(const PropFormula& f) {
  PropSet out;
  detail::collect_psub(f, out);
  return out;
}
inline PropSet subformulas(const std::vector<PropFormula>& fs) {
  PropSet out;
  for (const auto& f : fs) detail::collect_psub(f, out);
  return out;
}

inline PropFormula substitute_prop(const PropFormula& f,
                                   const std::map<std::string, PropFormula>& sigma) {
  switch (f->kind) {
    case PConn::Letter: {
      auto it = sigma.find(f->name);
      return it == sigma.end() ? f : it->second;
    }
    case PConn::Not: return mk_pnot(substitute_prop(f->a, sigma));
    case PConn::Box: return mk_pbox(f->name, substitute_prop(f->a, sigma));
    case PConn::And:
      return mk_pand(substitute_prop(f->a, sigma), substitute_prop(f->b, sigma));
  }
  return f;
}

inline void collect_letters(const PropFormula& f, std::set<std::string>& out) {
  switch (f->kind) {
    case PConn::Letter: out.insert(f->name); break;
    case PConn::Not:
    case PConn::Box: collect_letters(f->a, out); break;
    case PConn::And:
      collect_letters(f->a, out);
      collect_letters(f->b, out);
      break;
  }
}
inline void collect_modalities(const PropFormula& f, std::set<std::string>& out) {
  switch (f->kind) {
    case PConn::Letter: break;
    case PConn::Box:
      out.insert(f->name);
      collect_modalities(f->a, out);
      break;
    case PConn::Not: collect_modalities(f->a, out); break;
    case PConn::And:
      collect_modalities(f->a, out);
      collect_modalities(f->b, out);
      break;
  }
}

}  // namespace ovml
