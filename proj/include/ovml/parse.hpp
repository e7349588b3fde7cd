#pragma once

// Recursive-descent parsers for the ASCII grammar.
//
//   P(x)  P(c)  x = c  c1 = c2  ~f  f & f  f | f  f -> f
//   E x . f   A x . f   []<id> f   <><id> f   false  true
//
// Precedence ~ > & > | > ->; box/quantifier bodies parse at unary level, so
// binary bodies need explicit parentheses. Bare lowercase-or-any identifiers
// in formula position are proposition letters, sugar for E x . <id>(x).
// The propositional grammar drops terms and quantifiers.

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/prop_formula.hpp"

namespace ovml {

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), column(col_) {}
};

namespace detail {

enum class Tok { End, LParen, RParen, Tilde, Amp, Pipe, Arrow, EqSign, Dot, Box, Dia, Ident };

struct Lexer {
  std::string src;
  size_t pos = 0;
  int line = 1, col = 1;

  Tok tok = Tok::End;
  std::string text;   // Ident payload, or box/diamond modality id
  int tok_line = 1, tok_col = 1;

  explicit Lexer(std::string s) : src(std::move(s)) { next(); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tok_line, tok_col); }

  char peek() const { return pos < src.size() ? src[pos] : '\0'; }
  char get() {
    char c = src[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }
  std::string read_ident() {
    std::string s;
    while (pos < src.size() && ident_char(peek())) s += get();
    return s;
  }

  void next() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(peek()))) get();
    tok_line = line;
    tok_col = col;
    if (pos >= src.size()) {
      tok = Tok::End;
      return;
    }
    char c = get();
    switch (c) {
      case '(': tok = Tok::LParen; return;
      case ')': tok = Tok::RParen; return;
      case '~': tok = Tok::Tilde; return;
      case '&': tok = Tok::Amp; return;
      case '|': tok = Tok::Pipe; return;
      case '.': tok = Tok::Dot; return;
      case '=': tok = Tok::EqSign; return;
      case '-':
        if (peek() == '>') {
          get();
          tok = Tok::Arrow;
          return;
        }
        throw ParseError("unexpected '-'", tok_line, tok_col);
      case '[':
        if (peek() == ']') {
          get();
          text = read_ident();
          if (text.empty()) throw ParseError("box needs a modality id", tok_line, tok_col);
          tok = Tok::Box;
          return;
        }
        throw ParseError("unexpected '['", tok_line, tok_col);
      case '<':
        if (peek() == '>') {
          get();
          text = read_ident();
          if (text.empty()) throw ParseError("diamond needs a modality id", tok_line, tok_col);
          tok = Tok::Dia;
          return;
        }
        throw ParseError("unexpected '<'", tok_line, tok_col);
      default:
        if (ident_char(c)) {
          text = std::string(1, c) + read_ident();
          tok = Tok::Ident;
          return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", tok_line, tok_col);
    }
  }
};

inline bool reserved_word(const std::string& s) {
  return s == "E" || s == "A" || s == "x" || s == "true" || s == "false";
}

struct FoParser {
  Lexer lx;
  const Language& lang;
  bool allow_reserved;

  FoParser(std::string s, const Language& l, bool allow_res)
      : lx(std::move(s)), lang(l), allow_reserved(allow_res) {}

  void check_name(const std::string& n) {
    if (!allow_reserved && n.rfind("__", 0) == 0)
      lx.fail("reserved identifier " + n);
  }
  void check_modality(const std::string& id) {
    if (!lang.open_modalities && !lang.modality_ids.count(id)) lx.fail("unknown modality " + id);
  }
  void need_equality(const std::string& what) {
    if (!lang.equality) lx.fail(what + " requires a language with equality");
  }

  Formula formula() {
    Formula l = disj();
    if (lx.tok == Tok::Arrow) {
      lx.next();
      return mk_implies(l, formula());
    }
    return l;
  }
  Formula disj() {
    Formula l = conj();
    while (lx.tok == Tok::Pipe) {
      lx.next();
      l = mk_or(l, conj());
    }
    return l;
  }
  Formula conj() {
    Formula l = unary();
    while (lx.tok == Tok::Amp) {
      lx.next();
      l = mk_and(l, unary());
    }
    return l;
  }
  Formula unary() {
    switch (lx.tok) {
      case Tok::Tilde:
        lx.next();
        return mk_not(unary());
      case Tok::Box: {
        std::string id = lx.text;
        check_modality(id);
        lx.next();
        return mk_box(id, unary());
      }
      case Tok::Dia: {
        std::string id = lx.text;
        check_modality(id);
        lx.next();
        return mk_diamond(id, unary());
      }
      case Tok::Ident:
        if (lx.text == "E" || lx.text == "A") {
          bool exists = lx.text == "E";
          lx.next();
          if (lx.tok != Tok::Ident || lx.text != "x") lx.fail("expected 'x' after quantifier");
          lx.next();
          if (lx.tok != Tok::Dot) lx.fail("expected '.' after quantified variable");
          lx.next();
          Formula body = unary();
          return exists ? mk_exists(body) : mk_forall(body);
        }
        return primary();
      default: return primary();
    }
  }
  Term term_from_ident(const std::string& id) {
    if (id == "x") return Term::var();
    if (reserved_word(id)) lx.fail("'" + id + "' cannot be used as a term");
    check_name(id);
    need_equality("constant '" + id + "'");
    if (!lang.constants.empty() && !lang.constants.count(id)) lx.fail("unknown constant " + id);
    return Term::cons(id);
  }
  Formula primary() {
    switch (lx.tok) {
      case Tok::LParen: {
        lx.next();
        Formula f = formula();
        if (lx.tok != Tok::RParen) lx.fail("expected ')'");
        lx.next();
        return f;
      }
      case Tok::Ident: {
        std::string id = lx.text;
        if (id == "true") {
          lx.next();
          return mk_top();
        }
        if (id == "false") {
          lx.next();
          return mk_bottom();
        }
        lx.next();
        if (lx.tok == Tok::LParen) {
          if (reserved_word(id)) lx.fail("'" + id + "' cannot be used as a predicate");
          check_name(id);
          if (!lang.predicates.empty() && !lang.predicates.count(id))
            lx.fail("unknown predicate " + id);
          lx.next();
          if (lx.tok != Tok::Ident) lx.fail("expected a term");
          Term t = term_from_ident(lx.text);
          lx.next();
          if (lx.tok != Tok::RParen) lx.fail("expected ')'");
          lx.next();
          return mk_atom(id, t);
        }
        if (lx.tok == Tok::EqSign) {
          need_equality("equality");
          Term l = term_from_ident(id);
          lx.next();
          if (lx.tok != Tok::Ident) lx.fail("expected a term");
          Term r = term_from_ident(lx.text);
          lx.next();
          return mk_eq(l, r);
        }
        if (reserved_word(id)) lx.fail("'" + id + "' is not a formula");
        check_name(id);
        return mk_letter(id);
      }
      default: lx.fail("expected a formula");
    }
  }
};

struct PropParser {
  Lexer lx;
  const std::set<std::string>* modality_ids;  // null = open
  bool allow_reserved;

  PropParser(std::string s, const std::set<std::string>* mods, bool allow_res)
      : lx(std::move(s)), modality_ids(mods), allow_reserved(allow_res) {}

  void check_modality(const std::string& id) {
    if (modality_ids && !modality_ids->count(id)) lx.fail("unknown modality " + id);
  }

  PropFormula formula() {
    PropFormula l = disj();
    if (lx.tok == Tok::Arrow) {
      lx.next();
      return mk_pimplies(l, formula());
    }
    return l;
  }
  PropFormula disj() {
    PropFormula l = conj();
    while (lx.tok == Tok::Pipe) {
      lx.next();
      l = mk_por(l, conj());
    }
    return l;
  }
  PropFormula conj() {
    PropFormula l = unary();
    while (lx.tok == Tok::Amp) {
      lx.next();
      l = mk_pand(l, unary());
    }
    return l;
  }
  PropFormula unary() {
    switch (lx.tok) {
      case Tok::Tilde:
        lx.next();
        return mk_pnot(unary());
      case Tok::Box: {
        std::string id = lx.text;
        check_modality(id);
        lx.next();
        return mk_pbox(id, unary());
      }
      case Tok::Dia: {
        std::string id = lx.text;
        check_modality(id);
        lx.next();
        return mk_pdiamond(id, unary());
      }
      default: return primary();
    }
  }
  PropFormula primary() {
    switch (lx.tok) {
      case Tok::LParen: {
        lx.next();
        PropFormula f = formula();
        if (lx.tok != Tok::RParen) lx.fail("expected ')'");
        lx.next();
        return f;
      }
      case Tok::Ident: {
        std::string id = lx.text;
        if (id == "true") {
          lx.next();
          return mk_ptop();
        }
        if (id == "false") {
          lx.next();
          return mk_pbottom();
        }
        if (reserved_word(id)) lx.fail("'" + id + "' is not a letter");
        if (!allow_reserved && id.rfind("__", 0) == 0) lx.fail("reserved identifier " + id);
        lx.next();
        return mk_pletter(id);
      }
      default: lx.fail("expected a formula");
    }
  }
};

}  // namespace detail

inline Formula parse(const std::string& text, const Language& lang,
                     bool allow_reserved = false) {
  check_language(lang);
  detail::FoParser p(text, lang, allow_reserved);
  Formula f = p.formula();
  if (p.lx.tok != detail::Tok::End) p.lx.fail("trailing input");
  return f;
}

inline PropFormula parse_prop(const std::string& text,
                              const std::set<std::string>* modality_ids = nullptr,
                              bool allow_reserved = false) {
  detail::PropParser p(text, modality_ids, allow_reserved);
  PropFormula f = p.formula();
  if (p.lx.tok != detail::Tok::End) p.lx.fail("trailing input");
  return f;
}

}  // namespace ovml
