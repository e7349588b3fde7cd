#include <doctest.h>

#include "ovml/model_io.hpp"
#include "ovml/semantics.hpp"
#include "ovml/translate.hpp"
#include "support/gen.hpp"

using namespace ovml;

namespace {

FOKripkeModel single_world_model() {
  FOKripkeModel m;
  m.frame.num_worlds = 1;
  m.frame.relation("1");
  m.domains = {0b1};
  m.preds["P"] = {0b1};
  return m;
}

// two worlds w -> v, expanding domains {e} then {e,f}
FOKripkeModel bf_counterexample() {
  FOKripkeModel m;
  m.frame.num_worlds = 2;
  m.frame.add_edge("1", 0, 1);
  m.domains = {0b01, 0b11};
  m.preds["P"] = {0b00, 0b01};
  m.mode = DomainMode::Expanding;
  return m;
}

}  // namespace

TEST_CASE("truth clauses") {
  FOKripkeModel m = single_world_model();
  CHECK(check(m, 0, 0, mk_atom("P")));
  CHECK(holds_at(m, 0, mk_exists(mk_atom("P"))));
  CHECK(holds_globally(m, mk_top()));
  CHECK_FALSE(holds_globally(m, mk_bottom()));

  FOKripkeModel two;
  two.frame.num_worlds = 2;
  two.frame.add_edge("1", 0, 1);
  two.domains = {0b1, 0b1};
  two.preds["P"] = {0b0, 0b1};
  CHECK(check(two, 0, 0, mk_box("1", mk_atom("P"))));
  CHECK_FALSE(check(two, 0, 0, mk_atom("P")));
}

TEST_CASE("BF fails on expanding domains") {
  FOKripkeModel m = bf_counterexample();
  std::string why;
  CHECK(validate(m, &why));
  Formula all_box = mk_forall(mk_box("1", mk_atom("P")));
  Formula box_all = mk_box("1", mk_forall(mk_atom("P")));
  CHECK(holds_at(m, 0, all_box));
  CHECK_FALSE(holds_at(m, 0, box_all));
}

TEST_CASE("equality and constants") {
  FOKripkeModel m = single_world_model();
  m.consts["c"] = {0};
  CHECK(holds_at(m, 0, mk_exists(mk_eq(Term::var(), Term::cons("c")))));
  CHECK(holds_at(m, 0, mk_eq(Term::cons("c"), Term::cons("c"))));
  CHECK_THROWS(check(m, 0, 0, mk_atom("P", Term::cons("missing"))));
}

TEST_CASE("validation rejects bad models") {
  FOKripkeModel m = bf_counterexample();
  std::string why;
  m.domains = {0b11, 0b01};  // shrinking along the edge
  CHECK_FALSE(validate(m, &why));
  m = bf_counterexample();
  m.preds["P"] = {0b10, 0b01};  // P exceeds domain at world 0
  CHECK_FALSE(validate(m, &why));
  m = bf_counterexample();
  m.mode = DomainMode::Constant;
  CHECK_FALSE(validate(m, &why));
  m = bf_counterexample();
  m.consts["c"] = {1, 1};  // outside domain at world 0
  CHECK_FALSE(validate(m, &why));
}

TEST_CASE("frame properties") {
  Frame one;
  one.num_worlds = 1;
  one.add_edge("1", 0, 0);
  CHECK(frame_equivalence(one, "1"));
  CHECK_FALSE(frame_difference(one, "1"));
  CHECK_FALSE(frame_nontrivial(one));

  Frame two;
  two.num_worlds = 2;
  two.add_edge("1", 0, 1);
  two.add_edge("1", 1, 0);
  CHECK(frame_difference(two, "1"));
  CHECK(frame_nontrivial(two));
  CHECK_FALSE(frame_equivalence(two, "1"));

  // difference class allows isolated worlds and disjoint cliques
  Frame mix;
  mix.num_worlds = 3;
  mix.add_edge("1", 0, 1);
  mix.add_edge("1", 1, 0);
  CHECK(frame_difference(mix, "1"));
}

TEST_CASE("lcom and rcom match exhaustive axiom validity on small frames") {
  PropFormula lcom = mk_lcom("1", "p", "E");
  PropFormula rcom = mk_rcom("1", "p", "E");
  // all two-relation frames on <= 3 worlds
  for (int n = 1; n <= 3; ++n) {
    uint64_t cells = uint64_t{1} << (n * n);
    for (uint64_t rc = 0; rc < cells; ++rc)
      for (uint64_t ec = 0; ec < cells; ++ec) {
        Frame f;
        f.num_worlds = n;
        for (int w = 0; w < n; ++w)
          for (int v = 0; v < n; ++v) {
            if ((rc >> (w * n + v)) & 1) f.add_edge("1", w, v);
            if ((ec >> (w * n + v)) & 1) f.add_edge("E", w, v);
          }
        // axiom validity under all single-letter valuations
        bool lcom_valid = true, rcom_valid = true;
        for (uint64_t val = 0; val < (uint64_t{1} << n); ++val) {
          PropKripkeModel m;
          m.frame = f;
          m.valuation["p"] = val;
          PropEvaluator ev(m);
          uint64_t all = (uint64_t{1} << n) - 1;
          if (ev.eval(lcom) != all) lcom_valid = false;
          if (ev.eval(rcom) != all) rcom_valid = false;
        }
        bool lp = frame_lcom(f, "1", "E");
        bool rp = frame_rcom(f, "1", "E");
        if (lp != lcom_valid || rp != rcom_valid) {
          CHECK(lp == lcom_valid);
          CHECK(rp == rcom_valid);
        }
      }
  }
}

TEST_CASE("frame enumeration counts") {
  std::map<std::string, FrameClassSpec> all1{{"1", FrameClassSpec::all()}};
  CHECK(enumerate_frames(all1, 1).size() == 2);
  std::map<std::string, FrameClassSpec> eq1{{"1", FrameClassSpec::equivalence()}};
  CHECK(enumerate_frames(eq1, 2).size() == 2);
  CHECK(enumerate_frames(eq1, 3).size() == 5);
  std::map<std::string, FrameClassSpec> diff1{{"1", FrameClassSpec::difference()}};
  CHECK(enumerate_frames(diff1, 3).size() == 5);  // partitions of 3 worlds into cliques

  // fixed one-world reflexive frame: two models over one predicate
  Frame f;
  f.num_worlds = 1;
  f.add_edge("1", 0, 0);
  int count = 0;
  for_each_model_on_frame(f, 1, DomainMode::Expanding, {"P"}, {}, [&](const FOKripkeModel&) {
    ++count;
    return true;
  });
  CHECK(count == 2);
}

TEST_CASE("disjoint union stays in the difference class") {
  Frame a;
  a.num_worlds = 2;
  a.add_edge("1", 0, 1);
  a.add_edge("1", 1, 0);
  Frame b;
  b.num_worlds = 1;
  b.relation("1");
  Frame u = disjoint_union({a, b});
  CHECK(u.num_worlds == 3);
  CHECK(frame_difference(u, "1"));
}

TEST_CASE("propositional checker") {
  PropKripkeModel m;
  m.frame.num_worlds = 2;
  m.frame.add_edge("E", 0, 0);
  m.frame.add_edge("E", 0, 1);
  m.frame.add_edge("E", 1, 0);
  m.frame.add_edge("E", 1, 1);
  m.valuation["p"] = 0b10;
  CHECK(check_prop(m, 0, mk_pdiamond("E", mk_pletter("p"))));
  CHECK_FALSE(check_prop(m, 0, mk_pbox("E", mk_pletter("p"))));
}

TEST_CASE("model checker agrees with the translation on companions") {
  testgen::Gen g(7117);
  std::map<std::string, FrameClassSpec> specs{{"1", FrameClassSpec::all()},
                                              {"2", FrameClassSpec::all()}};
  int used = 0;
  int seen = 0;
  for_each_fomodel(specs, 2, 2, DomainMode::Expanding, {"P", "Q"}, {},
                   [&](const FOKripkeModel& m) {
                     ++seen;
                     if (seen % 1009 != 0) return used < 10;
                     ++used;
                     PropKripkeModel pm = prop_companion(m);
                     for (int k = 0; k < 8; ++k) {
                       Formula f = g.formula(1 + g.pick(3));
                       PropFormula pf = translate_star(f);
                       PropEvaluator ev(pm);
                       // pair worlds appear in domain order per world
                       int idx = 0;
                       for (int w = 0; w < m.num_worlds(); ++w) {
                         bool fo = holds_at(m, w, f);
                         bool pr = true;
                         for (int e = 0; e < kMaxElems; ++e)
                           if ((m.domains[static_cast<size_t>(w)] >> e) & 1) {
                             pr = pr && ((ev.eval(pf) >> idx) & 1);
                             ++idx;
                           }
                         CHECK(fo == pr);
                       }
                     }
                     return used < 10;
                   });
  CHECK(used == 10);
}

TEST_CASE("model json round trip") {
  FOKripkeModel m = bf_counterexample();
  m.consts.clear();
  std::string text = model_to_text(m);
  FOKripkeModel back = model_from_text(text);
  CHECK(model_to_text(back) == text);
  CHECK(back.num_worlds() == 2);
  CHECK(back.domains == m.domains);
  CHECK(back.preds.at("P") == m.preds.at("P"));
  CHECK(back.mode == m.mode);
}
