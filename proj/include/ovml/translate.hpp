#pragma once

// The homomorphic translation between equality-free one-variable formulas and
// propositional formulas with a shared S5 modality:
//   P(x) -> p,  E x f -> <>E f*,  boxes preserved.
// Letter names equal predicate names, which makes the inverse exact.

#include <map>
#include <stdexcept>
#include <string>

#include "ovml/formula.hpp"
#include "ovml/prop_formula.hpp"

namespace ovml {

inline PropFormula translate_star(const Formula& f, const std::string& mod_e = kSharedS5) {
  switch (f->kind) {
    case Conn::Atom:
      if (!f->t1.is_var) throw std::invalid_argument("translate_star: constants not allowed");
      return mk_pletter(f->name);
    case Conn::Eq: throw std::invalid_argument("translate_star: equality not allowed");
    case Conn::Not: return mk_pnot(translate_star(f->a, mod_e));
    case Conn::And:
      return mk_pand(translate_star(f->a, mod_e), translate_star(f->b, mod_e));
    case Conn::Box:
      if (f->name == mod_e)
        throw std::invalid_argument("translate_star: modality id collides with " + mod_e);
      return mk_pbox(f->name, translate_star(f->a, mod_e));
    case Conn::Exists: return mk_pdiamond(mod_e, translate_star(f->a, mod_e));
  }
  throw std::logic_error("unreachable");
}

inline Formula translate_star_inv(const PropFormula& f, const std::string& mod_e = kSharedS5) {
  switch (f->kind) {
    case PConn::Letter: return mk_atom(f->name);
    case PConn::Not:
      // ~[]E ~g is the image of E x . g
      if (f->a->kind == PConn::Box && f->a->name == mod_e && f->a->a->kind == PConn::Not)
        return mk_exists(translate_star_inv(f->a->a->a, mod_e));
      return mk_not(translate_star_inv(f->a, mod_e));
    case PConn::And:
      return mk_and(translate_star_inv(f->a, mod_e), translate_star_inv(f->b, mod_e));
    case PConn::Box:
      if (f->name == mod_e) return mk_forall(translate_star_inv(f->a, mod_e));
      return mk_box(f->name, translate_star_inv(f->a, mod_e));
  }
  throw std::logic_error("unreachable");
}

// Image of a substitution under the translation.
inline std::map<std::string, PropFormula> translate_star_subst(
    const std::map<std::string, Formula>& sigma, const std::string& mod_e = kSharedS5) {
  std::map<std::string, PropFormula> out;
  for (const auto& [pred, img] : sigma) out.emplace(pred, translate_star(img, mod_e));
  return out;
}

}  // namespace ovml
