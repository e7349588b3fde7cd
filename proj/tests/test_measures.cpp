#include <doctest.h>

#include "ovml/measures.hpp"
#include "ovml/parse.hpp"
#include "support/gen.hpp"

using namespace ovml;

namespace {

Formula letter(const std::string& n) { return mk_exists(mk_atom(n)); }

// paper-style running example: []1 []2 p & []2 []2 []1 r
Formula running_example() {
  return mk_and(mk_box("1", mk_box("2", letter("p"))),
                mk_box("2", mk_box("2", mk_box("1", letter("r")))));
}

// chain-length oracle: count restore steps until all surrogates are gone
int adp_by_chain(int i, const Formula& f) {
  Formula g = surrogate_fo(i, f);
  int steps = 0;
  int side = i;
  while (contains_surrogate(g)) {
    g = restore_fo(side, g);
    side = other_component(side);
    ++steps;
    REQUIRE(steps <= 64);
  }
  REQUIRE(equal(g, f));
  return steps;
}

}  // namespace

TEST_CASE("surrogate translation") {
  Formula f1 = mk_box("1", mk_atom("P"));
  CHECK(equal(surrogate_fo(1, f1), f1));
  CHECK(equal(surrogate_fo(2, mk_box("2", letter("p"))), mk_box("2", letter("p"))));

  Formula ex = running_example();
  Formula box2p = mk_box("2", letter("p"));
  Formula right = mk_box("2", mk_box("2", mk_box("1", letter("r"))));
  Formula expected = mk_and(mk_box("1", surrogate_of(box2p)), surrogate_of(right));
  CHECK(equal(surrogate_fo(1, ex), expected));
  // no foreign modality survives
  std::set<std::string> mods;
  collect_modalities(surrogate_fo(1, ex), mods);
  CHECK(!mods.count("2"));
  mods.clear();
  collect_modalities(surrogate_fo(2, ex), mods);
  CHECK(!mods.count("1"));
}

TEST_CASE("restore walks the alternation chain") {
  Formula ex = running_example();
  Formula s1 = surrogate_fo(1, ex);
  Formula r1 = restore_fo(1, s1);
  // []1 []2 p & []2 []2 sur2([]1 r)
  Formula expect1 = mk_and(mk_box("1", mk_box("2", letter("p"))),
                           mk_box("2", mk_box("2", surrogate_of(mk_box("1", letter("r"))))));
  CHECK(equal(r1, expect1));
  Formula r2 = restore_fo(2, r1);
  CHECK(equal(r2, ex));
  CHECK(equal(restore_fo(1, mk_atom("P")), mk_atom("P")));
  CHECK_THROWS(restore_fo(1, mk_atom("__sur_zzz")));
}

TEST_CASE("alternation and modal depth on the running example") {
  Formula ex = running_example();
  CHECK(adp_i(1, ex) == 2);
  CHECK(adp_i(1, mk_box("1", mk_box("2", letter("p")))) == 1);
  CHECK(adp_i(1, mk_box("2", mk_box("2", mk_box("1", letter("r"))))) == 2);
  CHECK(adp(mk_atom("P")).value == 0);
  CHECK(md(1, ex) == 1);
  CHECK(md(2, ex) == 2);
}

TEST_CASE("theta") {
  FormulaSet t1 = theta(1, subformulas(mk_box("1", mk_atom("P"))));
  CHECK(t1.size() == 1);
  CHECK(t1.count(mk_atom("P")) == 1);

  // theta(2, sub(p)): atoms only, no component-1 boxes
  FormulaSet t2 = theta(2, subformulas(letter("p")));
  CHECK(t2.size() == 1);
  CHECK(t2.count(mk_atom("p")) == 1);

  // the running example: all component-2 boxed trees survive in theta(1)
  FormulaSet th = theta(1, subformulas(running_example()));
  CHECK(th.count(mk_box("2", letter("p"))) == 1);
  CHECK(th.count(mk_box("2", mk_box("2", mk_box("1", letter("r"))))) == 1);
  CHECK(th.count(mk_box("1", letter("r"))) == 1);
  CHECK(th.count(mk_atom("p")) == 1);
  // closed under subformulas
  for (const Formula& f : th)
    for (const Formula& g : subformulas(f)) CHECK(th.count(g) == 1);
}

TEST_CASE("gamma slices") {
  FormulaSet phi = subformulas(running_example());
  CHECK(gamma<Formula>(1, -1, phi).empty());
  FormulaSet g0 = gamma<Formula>(1, 0, phi);
  for (const Formula& f : g0) CHECK(md(1, f) == 0);
  FormulaSet gall = gamma<Formula>(1, md(1, running_example()), phi);
  CHECK(gall.size() == phi.size());
}

TEST_CASE("adp structural equals chain oracle") {
  testgen::Gen g(2024);
  for (int k = 0; k < 200; ++k) {
    Formula f = g.formula(1 + g.pick(5));
    CHECK(adp_i(1, f) == adp_by_chain(1, f));
    CHECK(adp_i(2, f) == adp_by_chain(2, f));
    CHECK(std::abs(adp_i(1, f) - adp_i(2, f)) <= 1);
  }
}

TEST_CASE("measure recursion property") {
  testgen::Gen g(5150);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    Formula f = g.formula(1 + g.pick(5));
    FormulaSet phi = subformulas(f);
    std::vector<Formula> phi_vec(phi.begin(), phi.end());
    Adp a = adp(phi_vec);
    for (int i = 1; i <= 2; ++i) {
      if (adp_i(i, f) != a.value) continue;
      FormulaSet th = theta(i, subformulas(f));
      std::vector<Formula> tv(th.begin(), th.end());
      Adp at = adp(tv);
      CHECK(at.value == std::max(0, a.value - 1));
      CHECK(at.value == adp_i(other_component(i), tv.empty() ? mk_top() : conj_all(tv)));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("prop measures mirror the first-order ones") {
  PropFormula ex = mk_pand(mk_pbox("1", mk_pbox("2", mk_pletter("p"))),
                           mk_pbox("2", mk_pbox("2", mk_pbox("1", mk_pletter("r")))));
  CHECK(adp_i(1, ex) == 2);
  CHECK(md(2, ex) == 2);
  PropSet th = theta(1, subformulas(ex));
  CHECK(th.count(mk_pbox("2", mk_pletter("p"))) == 1);
  CHECK(th.count(mk_pletter("p")) == 1);
  // []E is transparent for both measures
  PropFormula withe = mk_pbox("E", mk_pbox("1", mk_pletter("p")));
  CHECK(adp_i(1, withe) == 0);
  CHECK(adp_i(2, withe) == 1);
  CHECK(md(1, withe) == 1);

  PropFormula s = surrogate_prop(1, ex);
  std::set<std::string> mods;
  collect_modalities(s, mods);
  CHECK(!mods.count("2"));
  CHECK(equal(restore_prop(2, restore_prop(1, s)), ex));
}
