#include <doctest.h>

#include "ovml/bounded.hpp"
#include "ovml/parse.hpp"
#include "support/gen.hpp"

using namespace ovml;

namespace {
Language l1() { return Language::mono("1"); }
}  // namespace

TEST_CASE("bounded decider trivial validity") {
  auto d = bounded_decider(FrameClassSpec::all(), "1", 3, 2, DomainMode::Expanding, true);
  Formula f = parse("P(x) -> P(x)", l1());
  CHECK(d->decide_local(f).is(Verdict::Valid));
  // determinism across calls
  CHECK(d->decide_local(f).is(Verdict::Valid));
}

TEST_CASE("bounded decider finds the BF counterexample globally") {
  auto d = bounded_decider(FrameClassSpec::all(), "1", 3, 2, DomainMode::Expanding, true);
  Formula bf = parse("A x . []1 P(x) -> []1 A x . P(x)", l1());
  DecisionOutcome out = d->decide_global(mk_top(), bf);
  REQUIRE(out.is(Verdict::Invalid));
  REQUIRE(out.witness.has_value());
  CHECK(holds_globally(*out.witness, mk_top()));
  CHECK_FALSE(holds_at(*out.witness, out.witness_world, bf));
  CHECK(out.witness->num_worlds() <= 2);
}

TEST_CASE("BF is valid on equivalence frames with constant domains") {
  auto d = bounded_decider(FrameClassSpec::equivalence(), "1", 3, 2, DomainMode::Constant, true);
  Formula bf = parse("A x . []1 P(x) -> []1 A x . P(x)", l1());
  CHECK(d->decide_local(bf).is(Verdict::Valid));
}

TEST_CASE("without an fmp assumption exhaustion reports unknown") {
  auto d = bounded_decider(FrameClassSpec::all(), "1", 2, 2, DomainMode::Expanding, false);
  Formula f = parse("P(x) -> P(x)", l1());
  CHECK(d->decide_local(f).is(Verdict::Unknown));
}

TEST_CASE("open formulas are refuted through some assignment") {
  // P(x) | A x . ~P(x) is invalid but never fails under *all* assignments
  auto d = bounded_decider(FrameClassSpec::all(), "1", 2, 2, DomainMode::Expanding, true);
  Formula f = parse("P(x) | A x . ~P(x)", l1());
  DecisionOutcome out = d->decide_local(f);
  REQUIRE(out.is(Verdict::Invalid));
  CHECK_FALSE(holds_at(*out.witness, out.witness_world, f));
}

TEST_CASE("plain and sat engines agree") {
  testgen::Gen g(8080);
  g.modalities = {"1"};
  auto dp = bounded_decider(FrameClassSpec::all(), "1", 2, 2, DomainMode::Expanding, true,
                            SearchEngine::Plain);
  auto ds = bounded_decider(FrameClassSpec::all(), "1", 2, 2, DomainMode::Expanding, true,
                            SearchEngine::Sat);
  for (int k = 0; k < 40; ++k) {
    Formula f = g.formula(1 + g.pick(3));
    CHECK(dp->decide_local(f).verdict == ds->decide_local(f).verdict);
  }
  auto dpe = bounded_decider(FrameClassSpec::equivalence(), "1", 2, 2, DomainMode::Constant, true,
                             SearchEngine::Plain);
  auto dse = bounded_decider(FrameClassSpec::equivalence(), "1", 2, 2, DomainMode::Constant, true,
                             SearchEngine::Sat);
  for (int k = 0; k < 25; ++k) {
    Formula f = g.formula(1 + g.pick(3));
    Formula gl = g.formula(1 + g.pick(2));
    CHECK(dpe->decide_local(f).verdict == dse->decide_local(f).verdict);
    CHECK(dpe->decide_global(gl, f).verdict == dse->decide_global(gl, f).verdict);
  }
}

TEST_CASE("sat engine handles equality and constants") {
  FrameClassSpec diff = FrameClassSpec::difference();
  auto d = std::make_shared<BoundedComponentDecider>(diff, "1", 3, 2, DomainMode::Constant, true,
                                                     SearchEngine::Sat);
  Language l = Language::mono("1");
  l.equality = true;
  Formula f = parse("E x . x = c", l);
  CHECK(d->decide_local(f).is(Verdict::Valid));
  Formula g2 = parse("x = c", l);
  DecisionOutcome out = d->decide_local(g2);
  REQUIRE(out.is(Verdict::Invalid));
  CHECK_FALSE(holds_at(*out.witness, out.witness_world, g2));
}

TEST_CASE("fo1 decider") {
  auto d = fo1_decider();
  Formula f1 = parse("E x . P(x) -> P(x)", l1());
  DecisionOutcome o1 = d->decide_local(f1);
  REQUIRE(o1.is(Verdict::Invalid));
  REQUIRE(o1.witness.has_value());
  CHECK_FALSE(holds_at(*o1.witness, o1.witness_world, f1));

  CHECK(d->decide_local(parse("P(x) -> E x . P(x)", l1())).is(Verdict::Valid));
  CHECK(d->decide_local(parse("A x . P(x) | E x . ~P(x)", l1())).is(Verdict::Valid));
  CHECK_THROWS(d->decide_local(parse("[]1 P(x)", l1())));
  CHECK(d->decide_global(parse("P(x)", l1()), parse("A x . P(x)", l1())).is(Verdict::Valid));
}

TEST_CASE("fo1 agrees with the bounded decider on the quantifier-only fragment") {
  auto f1 = fo1_decider();
  auto bd = bounded_decider(FrameClassSpec::all(), "1", 2, 3, DomainMode::Constant, true);
  // exhaustive small formulas over two predicates
  std::vector<Formula> layer{mk_atom("P"), mk_atom("Q")};
  std::vector<Formula> all = layer;
  for (int round = 0; round < 2; ++round) {
    std::vector<Formula> next;
    for (const Formula& a : layer) {
      next.push_back(mk_not(a));
      next.push_back(mk_exists(a));
      for (const Formula& b : all)
        if (a->size + b->size <= 5) next.push_back(mk_and(a, b));
    }
    for (const Formula& f : next) all.push_back(f);
    layer = next;
  }
  int compared = 0;
  for (const Formula& f : all) {
    if (f->size > 6) continue;
    CHECK(f1->decide_local(f).verdict == bd->decide_local(f).verdict);
    ++compared;
  }
  CHECK(compared >= 30);
}

TEST_CASE("witnesses always refute under the checker") {
  testgen::Gen g(5);
  g.modalities = {"1"};
  auto d = bounded_decider(FrameClassSpec::all(), "1", 3, 2, DomainMode::Expanding, true);
  for (int k = 0; k < 30; ++k) {
    Formula f = g.formula(1 + g.pick(4));
    DecisionOutcome out = d->decide_local(f);
    if (out.is(Verdict::Invalid)) {
      REQUIRE(out.witness.has_value());
      std::string why;
      CHECK(validate(*out.witness, &why));
      CHECK_FALSE(holds_at(*out.witness, out.witness_world, f));
    }
  }
}
