#include <doctest.h>

#include "ovml/encoders.hpp"
#include "ovml/oracle.hpp"
#include "ovml/parse.hpp"

using namespace ovml;

namespace {
std::map<std::string, int> sol(std::initializer_list<std::pair<const std::string, int>> xs) {
  return std::map<std::string, int>(xs);
}
}  // namespace

TEST_CASE("diophantine encoding shape") {
  auto eqs = parse_equations("y = 1\n");
  Formula phi = encode_diophantine(eqs);
  std::set<std::string> consts;
  collect_constants(phi, consts);
  CHECK(consts.count("c_0_1") == 1);  // the single equation constant
  CHECK(consts.count("c_y") == 1);    // the per-variable card constant
  std::set<std::string> preds;
  collect_predicates(phi, preds);
  CHECK(preds.count("P_y") == 1);
  CHECK(preds.count("C_y") == 1);
  // determinism
  CHECK(print(encode_diophantine(eqs)) == print(phi));
}

TEST_CASE("diophantine witnesses satisfy their encodings") {
  struct Case {
    const char* eqs;
    std::map<std::string, int> solution;
  };
  std::vector<Case> cases = {
      {"y = 1\n", sol({{"y", 1}})},
      {"y = 2\nz1 = 1\nz2 = 1\ny = z1 + z2\n", sol({{"y", 2}, {"z1", 1}, {"z2", 1}})},
      {"y = 1\nz1 = 1\nz2 = 1\ny = z1 * z2\n", sol({{"y", 1}, {"z1", 1}, {"z2", 1}})},
  };
  for (const auto& c : cases) {
    auto eqs = parse_equations(c.eqs);
    Formula phi = encode_diophantine(eqs);
    FOKripkeModel m = witness_model_diophantine(eqs, c.solution);
    std::string why;
    REQUIRE(validate(m, &why));
    CHECK(frame_difference(m.frame, "1"));
    CHECK(frame_difference(m.frame, "2"));
    CHECK(holds_globally(m, phi));
  }
  CHECK_THROWS(witness_model_diophantine(parse_equations("y = 2\n"), sol({{"y", 1}})));
}

TEST_CASE("unsolvable system has no tiny model") {
  auto eqs = parse_equations("y = 1\nz = 1\ny = z + z\n");
  Formula phi = encode_diophantine(eqs);
  FusedOracle oracle;
  oracle.class1 = FrameClassSpec::difference();
  oracle.class2 = FrameClassSpec::difference();
  oracle.max_worlds = 3;
  oracle.max_elems = 2;
  oracle.mode = DomainMode::Constant;
  CHECK(oracle.globally_satisfiable(phi).is(Verdict::Valid));  // no model found
}

TEST_CASE("card counts component worlds against predicate size") {
  // brute force over small difference frames with one constant
  Formula iy = mk_exists(mk_atom("M"));
  Formula card = mk_card(iy, "P", "c", "1", "2");
  std::map<std::string, FrameClassSpec> specs{{"1", FrameClassSpec::difference()},
                                              {"2", FrameClassSpec::difference()}};
  int checked = 0;
  for (int n = 1; n <= 2; ++n) {
    for_each_fomodel(specs, n, 2, DomainMode::Constant, {"M", "P"}, {"c"},
                     [&](const FOKripkeModel& m) {
                       bool semantic = true;
                       for (int w = 0; w < m.num_worlds(); ++w) {
                         if (!holds_at(m, w, iy)) continue;
                         // component of w along relation 2, including w
                         uint64_t comp = (uint64_t{1} << w) | m.frame.succ("2", w);
                         int size = __builtin_popcountll(comp);
                         int psize = __builtin_popcountll(m.pred_mask("P", w));
                         if (size != psize) semantic = false;
                       }
                       bool holds = holds_globally(m, card);
                       if (holds) CHECK(semantic);
                       ++checked;
                       return true;
                     });
  }
  CHECK(checked > 1000);
}

TEST_CASE("minsky encoding shapes") {
  // zero-instruction machine: only the halting state
  MinskyMachine m0;
  MinskyEncoding enc0 = encode_minsky(m0);
  CHECK(equal(enc0.state, mk_not(mk_letter("q0"))));
  // init and state sentences jointly unsatisfiable at the root
  FOKripkeModel w0 = simulate_minsky_model(m0, 0);
  CHECK(holds_at(w0, 0, enc0.init));
  CHECK_FALSE(holds_at(w0, 0, enc0.state));

  MinskyMachine inc = parse_machine("q0: inc r1 -> halt\n");
  CHECK(inc.num_states() == 2);
  MinskyEncoding enc = encode_minsky(inc);
  CHECK(equal(enc.state, mk_not(mk_letter("q1"))));
  CHECK(print(encode_minsky(inc).instr) == print(enc.instr));
}

TEST_CASE("incrementing machine reaches the halting state at step one") {
  MinskyMachine m = parse_machine("q0: inc r1 -> halt\n");
  MinskyEncoding enc = encode_minsky(m);
  FOKripkeModel prefix = simulate_minsky_model(m, 1);
  std::string why;
  REQUIRE(validate(prefix, &why));
  // the step-1 world carries q1 = halt and one element in V1
  int w1 = 2;
  CHECK(__builtin_popcountll(prefix.pred_mask("V1", w1)) == 1);
  CHECK_FALSE(holds_at(prefix, w1, enc.state));
  CHECK(holds_at(prefix, 0, enc.init));
}

TEST_CASE("looping machine prefix satisfies the whole encoding") {
  // on (0,0) the decrement goes to the zero branch forever
  MinskyMachine m = parse_machine("q0: dec r1 -> halt | q0\n");
  MinskyEncoding enc = encode_minsky(m);
  FOKripkeModel prefix = simulate_minsky_model(m, 4);
  std::string why;
  REQUIRE(validate(prefix, &why));
  CHECK(holds_at(prefix, 0, enc.init));
  Formula both = mk_and(enc.state, enc.instr);
  for (int w = 0; w < prefix.num_worlds(); ++w) {
    if ((prefix.frontier >> w) & 1) continue;
    CHECK(holds_at(prefix, w, both));
  }
  CHECK(holds_globally(prefix, both));
  // the navigation letter marks exactly the p-worlds
  for (int i = 0; i <= 4; ++i) CHECK(prefix.pred_mask(kNavLetter, 2 * i) != 0);
  for (int i = 0; i < 4; ++i) CHECK(prefix.pred_mask(kNavLetter, 2 * i + 1) == 0);
}

TEST_CASE("machine parser") {
  MinskyMachine m = parse_machine("q0: inc r2 -> q1\nq1: dec r2 -> q1 | halt\n");
  CHECK(m.num_states() == 3);
  CHECK(m.instrs[0].inc);
  CHECK(m.instrs[0].reg == 2);
  CHECK(m.instrs[0].next_pos == 1);
  CHECK_FALSE(m.instrs[1].inc);
  CHECK(m.instrs[1].next_pos == 1);
  CHECK(m.instrs[1].next_zero == 2);
  CHECK_THROWS(parse_machine("q0: inc r3 -> halt\n"));
  CHECK_THROWS(parse_machine("q0: dec r1 -> q0\n"));
  CHECK_THROWS(parse_machine("q0: inc r1 -> nowhere\n"));
}

TEST_CASE("equation parser") {
  auto eqs = parse_equations("y = 4\na = 2\nb = 2\ny = a * b\n");
  CHECK(eqs.size() == 4);
  CHECK(eqs[0].kind == ElementaryEquation::Kind::Const);
  CHECK(eqs[3].kind == ElementaryEquation::Kind::Prod);
  CHECK_THROWS(parse_equations("y = \n"));
  CHECK_THROWS(parse_equations(""));
  CHECK_THROWS(parse_equations("y = 0\n"));
}
