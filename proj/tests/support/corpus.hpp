#pragma once

// The fused-formula corpus for the oracle-agreement suites: an exhaustive
// enumeration of small canonical formulas, a curated list of the usual
// suspects, and a seeded random stratum up to twelve core nodes. Everything
// is equality-free over at most two predicates with alternation and modal
// depth at most two.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/measures.hpp"
#include "ovml/parse.hpp"

namespace ovml::testgen {

inline bool corpus_ok(const Formula& f) {
  AdpPair a = adp_pair(f);
  return std::min(a.lead1, a.lead2) <= 2 && md(1, f) <= 2 && md(2, f) <= 2;
}

inline std::vector<Formula> corpus_formulas(int exhaustive_nodes = 5, int random_count = 120,
                                            uint32_t seed = 20260808) {
  std::vector<std::vector<Formula>> by_size(static_cast<size_t>(exhaustive_nodes) + 1);
  by_size[1] = {mk_atom("P"), mk_atom("Q")};
  for (int n = 2; n <= exhaustive_nodes; ++n) {
    for (const Formula& a : by_size[static_cast<size_t>(n - 1)]) {
      if (a->kind != Conn::Not) by_size[static_cast<size_t>(n)].push_back(mk_not(a));
      by_size[static_cast<size_t>(n)].push_back(mk_exists(a));
      by_size[static_cast<size_t>(n)].push_back(mk_box("1", a));
      by_size[static_cast<size_t>(n)].push_back(mk_box("2", a));
    }
    for (int k = 1; k + 1 < n; ++k)
      for (const Formula& a : by_size[static_cast<size_t>(k)])
        for (const Formula& b : by_size[static_cast<size_t>(n - 1 - k)])
          if (compare(a, b) <= 0) by_size[static_cast<size_t>(n)].push_back(mk_and(a, b));
  }
  std::vector<Formula> out;
  for (const auto& layer : by_size)
    for (const Formula& f : layer)
      if (corpus_ok(f)) out.push_back(f);

  Language l = Language::fused();
  for (const char* s : {
           "[]1 (P(x) & Q(x)) -> []1 P(x)",
           "[]1 (P(x) -> Q(x)) -> ([]1 P(x) -> []1 Q(x))",
           "[]1 []2 p -> []2 []1 p",
           "[]2 []1 p -> []1 []2 p",
           "[]1 []2 P(x) -> []2 []1 P(x)",
           "A x . []1 P(x) -> []1 A x . P(x)",
           "[]1 A x . P(x) -> A x . []1 P(x)",
           "A x . []2 P(x) -> []2 A x . P(x)",
           "[]2 A x . P(x) -> A x . []2 P(x)",
           "E x . []1 P(x) -> []1 E x . P(x)",
           "[]1 E x . P(x) -> E x . []1 P(x)",
           "<>1 <>2 p & <>2 <>2 <>1 r",
           "~(<>1 <>2 p & <>2 <>2 <>1 r)",
           "[]1 []2 p & []2 []2 []1 r",
           "[]1 p -> p",
           "[]2 p -> <>2 p",
           "p -> []1 <>1 p",
           "<>1 []2 P(x) -> []2 <>1 P(x)",
       }) {
    Formula f = parse(s, l);
    if (corpus_ok(f)) out.push_back(f);
  }

  std::mt19937 rng(seed);
  std::vector<std::string> preds{"P", "Q"};
  std::function<Formula(int)> gen = [&](int budget) -> Formula {
    if (budget <= 1) return mk_atom(preds[rng() % 2]);
    switch (rng() % 6) {
      case 0: return mk_atom(preds[rng() % 2]);
      case 1: return mk_not(gen(budget - 1));
      case 2: {
        int left = 1 + static_cast<int>(rng() % static_cast<uint32_t>(std::max(1, budget - 2)));
        return mk_and(gen(left), gen(budget - 1 - left));
      }
      case 3: return mk_exists(gen(budget - 1));
      case 4: return mk_box("1", gen(budget - 1));
      default: return mk_box("2", gen(budget - 1));
    }
  };
  int made = 0;
  while (made < random_count) {
    Formula f = gen(4 + static_cast<int>(rng() % 9));
    if (f->size > 12 || !corpus_ok(f)) continue;
    out.push_back(f);
    ++made;
  }

  // dedupe, preserving order
  std::vector<Formula> dedup;
  FormulaSet seen;
  for (const Formula& f : out)
    if (seen.insert(f).second) dedup.push_back(f);
  return dedup;
}

inline std::vector<std::pair<Formula, Formula>> corpus_global_pairs(uint32_t seed = 111) {
  Language l = Language::fused();
  std::vector<std::pair<Formula, Formula>> out = {
      {mk_top(), mk_top()},
      {mk_bottom(), parse("P(x)", l)},
      {mk_top(), parse("A x . []1 P(x) -> []1 A x . P(x)", l)},
      {parse("p", l), parse("[]1 p", l)},
      {parse("p", l), parse("[]2 []1 p", l)},
      {parse("P(x)", l), parse("E x . P(x)", l)},
      {parse("E x . P(x)", l), parse("P(x)", l)},
      {parse("P(x)", l), parse("[]1 P(x) & []2 P(x)", l)},
      {parse("p & q", l), parse("q", l)},
      {parse("[]1 p", l), parse("p", l)},
      {parse("<>1 p", l), parse("p", l)},
      {parse("P(x) -> Q(x)", l), parse("[]2 (E x . P(x) -> E x . Q(x))", l)},
  };
  std::vector<Formula> fs = corpus_formulas(4, 24, seed);
  std::mt19937 rng(seed);
  for (int k = 0; k < 28; ++k) {
    const Formula& a = fs[rng() % fs.size()];
    const Formula& b = fs[rng() % fs.size()];
    if (a->size + b->size <= 14) out.emplace_back(a, b);
  }
  return out;
}

}  // namespace ovml::testgen
