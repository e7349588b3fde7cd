#include <doctest.h>

#include "ovml/semantics.hpp"
#include "ovml/types.hpp"
#include "support/gen.hpp"

using namespace ovml;

namespace {

// brute-force quasistate filter straight from the definition
template <class F>
std::vector<std::vector<TypeBits>> brute_quasistates(const BasePtr<F>& base) {
  std::vector<TypeSet<F>> types = enumerate_types(base);
  std::vector<std::vector<TypeBits>> out;
  size_t n = types.size();
  REQUIRE(n <= 16);
  for (uint64_t s = 1; s < (uint64_t{1} << n); ++s) {
    std::vector<TypeBits> q;
    for (size_t j = 0; j < n; ++j)
      if (s & (uint64_t{1} << j)) q.push_back(types[j].bits);
    bool ok = true;
    for (int i = 0; ok && i < base->size(); ++i) {
      const F& f = base->at(i);
      if (!Syn<F>::is_saturating(f, base->mod_e())) continue;
      int body = base->index_of(Syn<F>::child(f));
      bool rhs = !Syn<F>::saturate_some;
      for (TypeBits t : q) {
        bool b = (t >> body) & 1;
        if (Syn<F>::saturate_some)
          rhs = rhs || b;
        else
          rhs = rhs && b;
      }
      for (TypeBits t : q)
        if (bool((t >> i) & 1) != rhs) ok = false;
    }
    if (ok) out.push_back(q);
  }
  return out;
}

}  // namespace

TEST_CASE("type enumeration counts") {
  auto base1 = make_base<Formula>(subformulas(mk_atom("P")));
  CHECK(enumerate_types(base1).size() == 2);

  auto base2 = make_base<Formula>(subformulas(mk_exists(mk_atom("P"))));
  CHECK(enumerate_types(base2).size() == 4);

  auto base3 = make_base<Formula>(subformulas(mk_and(mk_atom("P"), mk_atom("Q"))));
  auto types3 = enumerate_types(base3);
  CHECK(types3.size() == 4);
  // (t2): the conjunction sign is forced
  int ci = base3->index_of(mk_and(mk_atom("P"), mk_atom("Q")));
  int pi = base3->index_of(mk_atom("P"));
  int qi = base3->index_of(mk_atom("Q"));
  for (const auto& t : types3)
    CHECK(bool(t.bits >> ci & 1) == (bool(t.bits >> pi & 1) && bool(t.bits >> qi & 1)));
}

TEST_CASE("t1 holds by construction") {
  Formula f = mk_not(mk_and(mk_atom("P"), mk_not(mk_atom("Q"))));
  auto base = make_base<Formula>(subformulas(f));
  for (const auto& t : enumerate_types(base))
    for (int i = 0; i < base->size(); ++i)
      if (Syn<Formula>::is_not(base->at(i))) {
        int j = base->index_of(base->at(i)->a);
        CHECK(bool(t.bits >> i & 1) == !bool(t.bits >> j & 1));
      }
}

TEST_CASE("quasistate enumeration matches brute force") {
  auto base = make_base<Formula>(subformulas(mk_exists(mk_atom("P"))));
  auto qs = enumerate_quasistates(base);
  CHECK(qs.size() == 3);
  auto brute = brute_quasistates(base);
  CHECK(brute.size() == 3);
  for (auto& b : brute) {
    std::sort(b.begin(), b.end());
    bool found = false;
    for (const auto& q : qs) found = found || q.types == b;
    CHECK(found);
  }

  // no quantified member: saturation is vacuous
  auto base2 = make_base<Formula>(subformulas(mk_atom("P")));
  CHECK(enumerate_quasistates(base2).size() == 3);

  // propositional mirror with the shared-S5 clause
  auto pbase = make_base<PropFormula>(subformulas(mk_pdiamond("E", mk_pletter("p"))));
  auto pqs = enumerate_quasistates(pbase);
  auto pbrute = brute_quasistates(pbase);
  CHECK(pqs.size() == pbrute.size());
  CHECK(pqs.size() == 3);
}

TEST_CASE("randomized quasistate enumeration agrees with brute force") {
  testgen::Gen g(31337);
  for (int k = 0; k < 60; ++k) {
    Formula f = g.formula(1 + g.pick(3));
    auto base = make_base<Formula>(subformulas(f));
    if (enumerate_types(base).size() > 16) continue;
    auto fast = enumerate_quasistates(base);
    auto brute = brute_quasistates(base);
    CHECK(fast.size() == brute.size());
  }
}

TEST_CASE("realisability sentence shape") {
  auto base = make_base<Formula>(subformulas(mk_atom("P")));
  Quasistate<Formula> q{base, {Base<Formula>::bit(0)}};
  Formula hat = realisability(q);
  CHECK(equal(hat, mk_and(mk_forall(mk_atom("P")), mk_exists(mk_atom("P")))));

  Quasistate<Formula> q2{base, {0, Base<Formula>::bit(0)}};
  Formula hat2 = realisability(q2);
  Formula np = mk_not(mk_atom("P"));
  Formula disj = mk_or(np, mk_atom("P"));
  CHECK(equal(hat2, mk_and(mk_forall(disj), mk_and(mk_exists(np), mk_exists(mk_atom("P"))))));

  CHECK(is_bottom(realisability_disj(std::vector<Quasistate<Formula>>{})));

  // propositional variant uses the shared box
  auto pbase = make_base<PropFormula>(subformulas(mk_pletter("p")));
  Quasistate<PropFormula> pq{pbase, {Base<PropFormula>::bit(0)}};
  CHECK(equal(realisability(pq),
              mk_pand(mk_pbox("E", mk_pletter("p")), mk_pdiamond("E", mk_pletter("p")))));
}

TEST_CASE("restriction") {
  Formula f = mk_and(mk_exists(mk_atom("P")), mk_atom("Q"));
  auto base = make_base<Formula>(subformulas(f));
  auto empty = make_base<Formula>(FormulaSet{});
  auto types = enumerate_types(base);
  for (const auto& t : types) CHECK(restrict_type(t, empty).bits == 0);

  FormulaSet sub;
  sub.insert(mk_atom("Q"));
  auto qbase = make_base<Formula>(sub);
  for (const auto& t : types)
    CHECK(bool(restrict_type(t, qbase).bits & 1) == t.has(mk_atom("Q")));
}

TEST_CASE("element types form a quasistate satisfied by its realisability") {
  testgen::Gen g(808);
  std::map<std::string, FrameClassSpec> specs{{"1", FrameClassSpec::all()},
                                              {"2", FrameClassSpec::all()}};
  int tried = 0;
  for (int k = 0; k < 20 && tried < 12; ++k) {
    Formula f = g.formula(1 + g.pick(3));
    if (!equality_free(f)) continue;
    auto base = make_base<Formula>(subformulas(f));
    // a couple of random-ish models via the enumerator
    int seen = 0;
    for_each_fomodel(specs, 2, 2, DomainMode::Expanding, {"P", "Q"}, {},
                     [&](const FOKripkeModel& m) {
                       if (++seen % 97 != 0) return seen < 2000;
                       for (int w = 0; w < m.num_worlds(); ++w) {
                         Quasistate<Formula> q = element_types(m, w, base);
                         CHECK(quasistate_ok(*base, q.types));
                         CHECK(holds_at(m, w, realisability(q)));
                       }
                       ++tried;
                       return seen < 2000;
                     });
  }
  CHECK(tried >= 5);
}

TEST_CASE("type count bound") {
  testgen::Gen g(11);
  for (int k = 0; k < 50; ++k) {
    Formula f = g.formula(1 + g.pick(4));
    auto base = make_base<Formula>(subformulas(f));
    double bound = std::pow(2.0, base->size());
    CHECK(static_cast<double>(enumerate_types(base).size()) <= bound);
  }
}
