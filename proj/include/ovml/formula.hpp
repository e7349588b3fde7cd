#pragma once

// One-variable modal formulas: core AST, derived-operator builders, printing,
// subformula closure and uniform substitution.
//
// Core node kinds are Atom, Eq, Not, And, Box, Exists. Everything else
// (->, |, forall, diamonds, proposition letters, true/false, the dotted
// navigation boxes) is a builder that expands eagerly, so downstream code
// only ever sees core nodes.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovml {

struct Term {
  bool is_var = true;        // the single individual variable x
  std::string constant;      // meaningful iff !is_var

  static Term var() { return Term{true, {}}; }
  static Term cons(std::string name) { return Term{false, std::move(name)}; }

  friend bool operator==(const Term& a, const Term& b) {
    return a.is_var == b.is_var && (a.is_var || a.constant == b.constant);
  }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b) {
    if (a.is_var != b.is_var) return a.is_var;
    return !a.is_var && a.constant < b.constant;
  }
};

enum class Conn : uint8_t { Atom, Eq, Not, And, Box, Exists };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  Conn kind;
  std::string name;   // Atom: predicate name; Box: modality id
  Term t1, t2;        // Atom uses t1; Eq uses t1, t2
  Formula a, b;       // unary ops use a; And uses a, b
  size_t hash = 0;
  bool open = false;  // x occurs free
  int size = 1;       // core node count
};

namespace detail {
inline size_t hash_mix(size_t h, size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}
inline size_t term_hash(const Term& t) {
  return t.is_var ? 0x51ed270b : std::hash<std::string>{}(t.constant);
}
}  // namespace detail

inline bool equal(const Formula& x, const Formula& y);

inline Formula mk_node(FormulaNode n) {
  size_t h = static_cast<size_t>(n.kind) * 0x100000001b3ULL;
  h = detail::hash_mix(h, std::hash<std::string>{}(n.name));
  switch (n.kind) {
    case Conn::Atom:
      h = detail::hash_mix(h, detail::term_hash(n.t1));
      n.open = n.t1.is_var;
      n.size = 1;
      break;
    case Conn::Eq:
      h = detail::hash_mix(h, detail::term_hash(n.t1));
      h = detail::hash_mix(h, detail::term_hash(n.t2));
      n.open = n.t1.is_var || n.t2.is_var;
      n.size = 1;
      break;
    case Conn::Not:
    case Conn::Box:
      h = detail::hash_mix(h, n.a->hash);
      n.open = n.a->open;
      n.size = 1 + n.a->size;
      break;
    case Conn::And:
      h = detail::hash_mix(h, n.a->hash);
      h = detail::hash_mix(h, n.b->hash);
      n.open = n.a->open || n.b->open;
      n.size = 1 + n.a->size + n.b->size;
      break;
    case Conn::Exists:
      h = detail::hash_mix(h, n.a->hash);
      n.open = false;
      n.size = 1 + n.a->size;
      break;
  }
  n.hash = h;
  return std::make_shared<const FormulaNode>(std::move(n));
}

inline Formula mk_atom(std::string pred, Term t = Term::var()) {
  FormulaNode n;
  n.kind = Conn::Atom;
  n.name = std::move(pred);
  n.t1 = std::move(t);
  return mk_node(std::move(n));
}
inline Formula mk_eq(Term l, Term r) {
  FormulaNode n;
  n.kind = Conn::Eq;
  n.t1 = std::move(l);
  n.t2 = std::move(r);
  return mk_node(std::move(n));
}
inline Formula mk_not(Formula f) {
  FormulaNode n;
  n.kind = Conn::Not;
  n.a = std::move(f);
  return mk_node(std::move(n));
}
inline Formula mk_and(Formula l, Formula r) {
  FormulaNode n;
  n.kind = Conn::And;
  n.a = std::move(l);
  n.b = std::move(r);
  return mk_node(std::move(n));
}
inline Formula mk_box(std::string modality, Formula f) {
  FormulaNode n;
  n.kind = Conn::Box;
  n.name = std::move(modality);
  n.a = std::move(f);
  return mk_node(std::move(n));
}
inline Formula mk_exists(Formula f) {
  FormulaNode n;
  n.kind = Conn::Exists;
  n.a = std::move(f);
  return mk_node(std::move(n));
}

inline bool equal(const Formula& x, const Formula& y) {
  if (x.get() == y.get()) return true;
  if (x->hash != y->hash || x->kind != y->kind) return false;
  switch (x->kind) {
    case Conn::Atom: return x->name == y->name && x->t1 == y->t1;
    case Conn::Eq: return x->t1 == y->t1 && x->t2 == y->t2;
    case Conn::Not:
    case Conn::Exists: return equal(x->a, y->a);
    case Conn::Box: return x->name == y->name && equal(x->a, y->a);
    case Conn::And: return equal(x->a, y->a) && equal(x->b, y->b);
  }
  return false;
}

// Total structural order; used for canonical bases and map keys.
inline int compare(const Formula& x, const Formula& y) {
  if (x.get() == y.get()) return 0;
  if (x->size != y->size) return x->size < y->size ? -1 : 1;
  if (x->kind != y->kind) return x->kind < y->kind ? -1 : 1;
  auto cmp_term = [](const Term& a, const Term& b) {
    if (a == b) return 0;
    return a < b ? -1 : 1;
  };
  switch (x->kind) {
    case Conn::Atom: {
      if (int c = x->name.compare(y->name)) return c < 0 ? -1 : 1;
      return cmp_term(x->t1, y->t1);
    }
    case Conn::Eq: {
      if (int c = cmp_term(x->t1, y->t1)) return c;
      return cmp_term(x->t2, y->t2);
    }
    case Conn::Not:
    case Conn::Exists: return compare(x->a, y->a);
    case Conn::Box: {
      if (int c = x->name.compare(y->name)) return c < 0 ? -1 : 1;
      return compare(x->a, y->a);
    }
    case Conn::And: {
      if (int c = compare(x->a, y->a)) return c;
      return compare(x->b, y->b);
    }
  }
  return 0;
}

struct FormulaLess {
  bool operator()(const Formula& x, const Formula& y) const { return compare(x, y) < 0; }
};
using FormulaSet = std::set<Formula, FormulaLess>;

// ---------------------------------------------------------------------------
// Derived operators
// ---------------------------------------------------------------------------

inline const std::string kFalsePred = "__false";
inline const std::string kNavLetter = "__nav";

inline Formula mk_letter(const std::string& name) {
  return mk_exists(mk_atom(name));
}
inline Formula mk_bottom() {
  static const Formula bot = [] {
    Formula e = mk_letter(kFalsePred);
    return mk_and(e, mk_not(e));
  }();
  return bot;
}
inline Formula mk_top() {
  static const Formula top = mk_not(mk_bottom());
  return top;
}
inline bool is_bottom(const Formula& f) { return equal(f, mk_bottom()); }
inline bool is_top(const Formula& f) { return equal(f, mk_top()); }

inline Formula mk_or(Formula l, Formula r) {
  return mk_not(mk_and(mk_not(std::move(l)), mk_not(std::move(r))));
}
inline Formula mk_implies(Formula l, Formula r) {
  return mk_not(mk_and(std::move(l), mk_not(std::move(r))));
}
inline Formula mk_iff(const Formula& l, const Formula& r) {
  return mk_and(mk_implies(l, r), mk_implies(r, l));
}
inline Formula mk_forall(Formula f) {
  return mk_not(mk_exists(mk_not(std::move(f))));
}
inline Formula mk_diamond(const std::string& modality, Formula f) {
  return mk_not(mk_box(modality, mk_not(std::move(f))));
}

inline Formula conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return mk_top();
  Formula r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = mk_and(r, fs[i]);
  return r;
}
inline Formula disj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return mk_bottom();
  Formula r = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) r = mk_or(r, fs[i]);
  return r;
}

// box_upto(id, n, f) = f & []f & ... & []^n f
inline Formula mk_box_upto(const std::string& modality, int n, const Formula& f) {
  Formula acc = f;
  Formula boxed = f;
  for (int k = 1; k <= n; ++k) {
    boxed = mk_box(modality, boxed);
    acc = mk_and(acc, boxed);
  }
  return acc;
}

// Navigation boxes over an explicit letter p; the two modal arguments default
// to the fused components.
inline Formula mk_dbox(const std::string& p, const Formula& f,
                       const std::string& m1 = "1", const std::string& m2 = "2") {
  Formula lp = mk_letter(p);
  Formula pos = mk_implies(lp, mk_box(m1, mk_implies(mk_not(lp), mk_box(m2, mk_implies(lp, f)))));
  Formula neg = mk_implies(mk_not(lp), mk_box(m1, mk_implies(lp, mk_box(m2, mk_implies(mk_not(lp), f)))));
  return mk_and(pos, neg);
}
inline Formula mk_ddiamond(const std::string& p, const Formula& f,
                           const std::string& m1 = "1", const std::string& m2 = "2") {
  return mk_not(mk_dbox(p, mk_not(f), m1, m2));
}

// counter(psi, psi') for open arguments; next(psi) for a closed argument.
inline Formula mk_counter(const std::string& p, const Formula& psi, const Formula& psi2,
                          const std::string& m1 = "1", const std::string& m2 = "2") {
  if (!psi->open || !psi2->open)
    throw std::invalid_argument("counter requires open arguments");
  return mk_and(mk_forall(mk_implies(psi, mk_dbox(p, psi2, m1, m2))),
                mk_forall(mk_implies(mk_ddiamond(p, psi2, m1, m2), psi)));
}
inline Formula mk_next(const std::string& p, const Formula& psi,
                       const std::string& m1 = "1", const std::string& m2 = "2") {
  if (psi->open) throw std::invalid_argument("next requires a closed argument");
  return mk_and(mk_ddiamond(p, psi, m1, m2), mk_dbox(p, psi, m1, m2));
}

// box_plus / diamond_plus: reflexive closure of one step.
inline Formula mk_box_plus(const std::string& modality, const Formula& f) {
  return mk_and(f, mk_box(modality, f));
}
inline Formula mk_diamond_plus(const std::string& modality, const Formula& f) {
  return mk_or(f, mk_diamond(modality, f));
}

// card(I, P, c): at every I-world the local component of the second modality
// has exactly as many worlds as P has elements, counted through the
// non-rigid constant c.
inline Formula mk_card(const Formula& i_sentence, const std::string& pred,
                       const std::string& cons,
                       const std::string& m_diff = "1", const std::string& m_fin = "2") {
  if (i_sentence->open) throw std::invalid_argument("card requires a closed marker sentence");
  Formula x_is_c = mk_eq(Term::var(), Term::cons(cons));
  Formula once = mk_box_plus(m_fin, mk_forall(mk_implies(x_is_c, mk_box(m_fin, mk_not(x_is_c)))));
  Formula sweep = mk_forall(mk_iff(mk_atom(pred), mk_diamond_plus(m_fin, x_is_c)));
  return mk_box_plus(m_diff, mk_implies(i_sentence, mk_and(once, sweep)));
}

// ---------------------------------------------------------------------------
// Language
// ---------------------------------------------------------------------------

struct Language {
  std::set<std::string> modality_ids;
  std::set<std::string> predicates;  // empty set = open signature
  bool equality = false;
  std::set<std::string> constants;
  bool open_modalities = false;  // accept any modality id (internal decoding)

  static Language fused(bool equality = false) {
    Language l;
    l.modality_ids = {"1", "2"};
    l.equality = equality;
    return l;
  }
  static Language mono(const std::string& id) {
    Language l;
    l.modality_ids = {id};
    return l;
  }
};

inline void check_language(const Language& lang) {
  if (lang.modality_ids.empty())
    throw std::invalid_argument("language requires at least one modality");
  if (!lang.equality && !lang.constants.empty())
    throw std::invalid_argument("constants require equality");
}

inline bool well_formed(const Formula& f, const Language& lang, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  switch (f->kind) {
    case Conn::Atom:
      if (!f->t1.is_var && !lang.equality) return fail("constant argument without equality");
      if (!lang.predicates.empty() && f->name != kFalsePred && !lang.predicates.count(f->name))
        return fail("unknown predicate " + f->name);
      return true;
    case Conn::Eq:
      if (!lang.equality) return fail("equality disabled in this language");
      return true;
    case Conn::Not:
    case Conn::Exists: return well_formed(f->a, lang, why);
    case Conn::Box:
      if (!lang.modality_ids.count(f->name)) return fail("unknown modality " + f->name);
      return well_formed(f->a, lang, why);
    case Conn::And:
      return well_formed(f->a, lang, why) && well_formed(f->b, lang, why);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace detail {
inline void print_term(std::string& out, const Term& t) {
  out += t.is_var ? "x" : t.constant;
}
inline void print_unary(std::string& out, const Formula& f);
inline void print_conj(std::string& out, const Formula& f) {
  if (is_bottom(f)) { out += "false"; return; }
  if (is_top(f)) { out += "true"; return; }
  if (f->kind == Conn::And) {
    print_conj(out, f->a);
    out += " & ";
    print_unary(out, f->b);
    return;
  }
  print_unary(out, f);
}
inline void print_unary(std::string& out, const Formula& f) {
  if (is_bottom(f)) { out += "false"; return; }
  if (is_top(f)) { out += "true"; return; }
  switch (f->kind) {
    case Conn::Atom:
      out += f->name;
      out += "(";
      print_term(out, f->t1);
      out += ")";
      break;
    case Conn::Eq:
      print_term(out, f->t1);
      out += " = ";
      print_term(out, f->t2);
      break;
    case Conn::Not:
      out += "~";
      print_unary(out, f->a);
      break;
    case Conn::Box:
      out += "[]";
      out += f->name;
      out += " ";
      print_unary(out, f->a);
      break;
    case Conn::Exists:
      out += "E x . ";
      print_unary(out, f->a);
      break;
    case Conn::And:
      out += "(";
      print_conj(out, f);
      out += ")";
      break;
  }
}
}  // namespace detail

inline std::string print(const Formula& f) {
  std::string out;
  detail::print_conj(out, f);
  return out;
}

// ---------------------------------------------------------------------------
// Subformulas and substitution
// ---------------------------------------------------------------------------

namespace detail {
inline void collect_sub(const Formula& f, FormulaSet& out) {
  if (!out.insert(f).second) return;
  switch (f->kind) {
    case Conn::Atom:
    case Conn::Eq: break;
    case Conn::Not:
    case Conn::Box:
    case Conn::Exists: collect_sub(f->a, out); break;
    case Conn::And:
      collect_sub(f->a, out);
      collect_sub(f->b, out);
      break;
  }
}
}  // namespace detail

inline FormulaSet subformulas(const Formula& f) {
  FormulaSet out;
  detail::collect_sub(f, out);
  return out;
}
inline FormulaSet subformulas(const std::vector<Formula>& fs) {
  FormulaSet out;
  for (const auto& f : fs) detail::collect_sub(f, out);
  return out;
}

// Uniform substitution of one-variable formulas for P(x) atoms.
inline Formula substitute(const Formula& f, const std::map<std::string, Formula>& sigma) {
  switch (f->kind) {
    case Conn::Atom: {
      auto it = sigma.find(f->name);
      if (it == sigma.end()) return f;
      if (!f->t1.is_var)
        throw std::invalid_argument("substitution target must have the form P(x), got P(" +
                                    f->t1.constant + ")");
      return it->second;
    }
    case Conn::Eq: return f;
    case Conn::Not: return mk_not(substitute(f->a, sigma));
    case Conn::Box: return mk_box(f->name, substitute(f->a, sigma));
    case Conn::Exists: return mk_exists(substitute(f->a, sigma));
    case Conn::And: return mk_and(substitute(f->a, sigma), substitute(f->b, sigma));
  }
  return f;
}

inline bool equality_free(const Formula& f) {
  switch (f->kind) {
    case Conn::Atom: return f->t1.is_var;
    case Conn::Eq: return false;
    case Conn::Not:
    case Conn::Box:
    case Conn::Exists: return equality_free(f->a);
    case Conn::And: return equality_free(f->a) && equality_free(f->b);
  }
  return true;
}

inline void collect_predicates(const Formula& f, std::set<std::string>& out) {
  switch (f->kind) {
    case Conn::Atom: out.insert(f->name); break;
    case Conn::Eq: break;
    case Conn::Not:
    case Conn::Box:
    case Conn::Exists: collect_predicates(f->a, out); break;
    case Conn::And:
      collect_predicates(f->a, out);
      collect_predicates(f->b, out);
      break;
  }
}
inline void collect_constants(const Formula& f, std::set<std::string>& out) {
  auto term = [&](const Term& t) {
    if (!t.is_var) out.insert(t.constant);
  };
  switch (f->kind) {
    case Conn::Atom: term(f->t1); break;
    case Conn::Eq:
      term(f->t1);
      term(f->t2);
      break;
    case Conn::Not:
    case Conn::Box:
    case Conn::Exists: collect_constants(f->a, out); break;
    case Conn::And:
      collect_constants(f->a, out);
      collect_constants(f->b, out);
      break;
  }
}
inline void collect_modalities(const Formula& f, std::set<std::string>& out) {
  switch (f->kind) {
    case Conn::Atom:
    case Conn::Eq: break;
    case Conn::Box:
      out.insert(f->name);
      collect_modalities(f->a, out);
      break;
    case Conn::Not:
    case Conn::Exists: collect_modalities(f->a, out); break;
    case Conn::And:
      collect_modalities(f->a, out);
      collect_modalities(f->b, out);
      break;
  }
}

}  // namespace ovml
