#pragma once

// Generators for the undecidability constructions: Diophantine equation
// systems over the difference logics, and two-counter machine simulations,
// with witness-model builders so the encodings can be validated end to end
// by the model checker.
//
// Modality "1" is the difference box, modality "2" the finite-components
// one. Fresh names are deterministic: c_{e}_{i}, Q_{e}_{k}, J_{e}, C_y, P_y,
// the per-variable card constant c_{y}, and __nav for the navigation letter.

#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/semantics.hpp"

namespace ovml {

// ---------------------------------------------------------------------------
// Diophantine systems
// ---------------------------------------------------------------------------

struct ElementaryEquation {
  enum class Kind { Const, Sum, Prod } kind;
  std::string y;
  int n = 0;            // Const
  std::string z1, z2;   // Sum / Prod

  static ElementaryEquation constant(std::string y, int n) {
    if (n < 1) throw std::invalid_argument("constants must be positive");
    return {Kind::Const, std::move(y), n, {}, {}};
  }
  static ElementaryEquation sum(std::string y, std::string z1, std::string z2) {
    return {Kind::Sum, std::move(y), 0, std::move(z1), std::move(z2)};
  }
  static ElementaryEquation prod(std::string y, std::string z1, std::string z2) {
    return {Kind::Prod, std::move(y), 0, std::move(z1), std::move(z2)};
  }
};

namespace detail {

inline std::vector<std::string> equation_variables(const std::vector<ElementaryEquation>& eqs) {
  std::vector<std::string> vars;
  auto add = [&](const std::string& v) {
    if (v.empty()) return;
    for (const auto& w : vars)
      if (w == v) return;
    vars.push_back(v);
  };
  for (const auto& e : eqs) {
    add(e.y);
    add(e.z1);
    add(e.z2);
  }
  return vars;
}

inline Formula marker(const std::string& y) { return mk_exists(mk_atom("C_" + y)); }

}  // namespace detail

inline Formula encode_diophantine(const std::vector<ElementaryEquation>& eqs) {
  if (eqs.empty()) throw std::invalid_argument("empty equation system");
  const std::string D = "1", C = "2";
  std::vector<Formula> parts;

  for (const auto& y : detail::equation_variables(eqs)) {
    Formula iy = detail::marker(y);
    Formula py = mk_atom("P_" + y);
    parts.push_back(mk_diamond_plus(D, mk_and(iy, mk_box(D, mk_not(iy)))));
    parts.push_back(mk_card(iy, "P_" + y, "c_" + y, D, C));
    parts.push_back(mk_exists(py));
    parts.push_back(mk_box_plus(D, mk_forall(mk_implies(py, mk_box(D, py)))));
  }

  for (size_t ei = 0; ei < eqs.size(); ++ei) {
    const ElementaryEquation& e = eqs[ei];
    std::string es = std::to_string(ei);
    Formula py = mk_atom("P_" + e.y);
    switch (e.kind) {
      case ElementaryEquation::Kind::Const: {
        std::vector<Formula> eqdisj;
        for (int i = 1; i <= e.n; ++i)
          eqdisj.push_back(mk_eq(Term::var(), Term::cons("c_" + es + "_" + std::to_string(i))));
        parts.push_back(mk_forall(mk_iff(py, disj_all(eqdisj))));
        for (int i = 1; i <= e.n; ++i)
          for (int j = i + 1; j <= e.n; ++j)
            parts.push_back(mk_not(mk_eq(Term::cons("c_" + es + "_" + std::to_string(i)),
                                         Term::cons("c_" + es + "_" + std::to_string(j)))));
        break;
      }
      case ElementaryEquation::Kind::Sum: {
        Formula q1 = mk_atom("Q_" + es + "_1");
        Formula q2 = mk_atom("Q_" + es + "_2");
        parts.push_back(mk_card(detail::marker(e.z1), "Q_" + es + "_1", "c_" + es + "_1", D, C));
        parts.push_back(mk_card(detail::marker(e.z2), "Q_" + es + "_2", "c_" + es + "_2", D, C));
        parts.push_back(mk_box_plus(D, mk_forall(mk_implies(q1, mk_box_plus(D, mk_not(q2))))));
        parts.push_back(mk_box_plus(D, mk_implies(mk_exists(q1), detail::marker(e.z1))));
        parts.push_back(mk_box_plus(D, mk_implies(mk_exists(q2), detail::marker(e.z2))));
        parts.push_back(mk_forall(
            mk_iff(py, mk_or(mk_diamond_plus(D, q1), mk_diamond_plus(D, q2)))));
        break;
      }
      case ElementaryEquation::Kind::Prod: {
        Formula jx = mk_and(mk_atom("J_" + es), mk_eq(Term::cons("c_" + es), Term::var()));
        Formula ex_j = mk_exists(jx);
        Formula pz2 = mk_atom("P_" + e.z2);
        Formula qe = mk_atom("Q_" + es);
        parts.push_back(mk_forall(mk_iff(pz2, mk_diamond_plus(D, jx))));
        parts.push_back(mk_box_plus(D, mk_forall(mk_implies(jx, mk_box(D, mk_not(jx))))));
        parts.push_back(mk_card(ex_j, "P_" + e.z1, "c_" + es + "_1", D, C));
        parts.push_back(mk_card(ex_j, "Q_" + es, "c_" + es + "_2", D, C));
        parts.push_back(mk_box_plus(D, mk_forall(mk_implies(qe, mk_box(D, mk_not(qe))))));
        parts.push_back(mk_box_plus(D, mk_implies(mk_exists(qe), ex_j)));
        parts.push_back(mk_forall(mk_iff(py, mk_diamond_plus(D, qe))));
        break;
      }
    }
  }
  return conj_all(parts);
}

// Finite constant-domain witness over a difference + finite-difference frame.
// Worlds form lcm-many copies of the marker pattern; component rows of the
// second relation run diagonally across copies so every card sentence counts
// the right block.
inline FOKripkeModel witness_model_diophantine(const std::vector<ElementaryEquation>& eqs,
                                               const std::map<std::string, int>& solution) {
  std::vector<std::string> vars = detail::equation_variables(eqs);
  auto val = [&](const std::string& v) {
    auto it = solution.find(v);
    if (it == solution.end()) throw std::invalid_argument("no value for variable " + v);
    if (it->second < 1) throw std::invalid_argument("solution values must be positive");
    return it->second;
  };
  for (const auto& e : eqs) {
    switch (e.kind) {
      case ElementaryEquation::Kind::Const:
        if (val(e.y) != e.n) throw std::invalid_argument("solution violates " + e.y);
        break;
      case ElementaryEquation::Kind::Sum:
        if (val(e.y) != val(e.z1) + val(e.z2))
          throw std::invalid_argument("solution violates " + e.y);
        break;
      case ElementaryEquation::Kind::Prod:
        if (val(e.y) != val(e.z1) * val(e.z2))
          throw std::invalid_argument("solution violates " + e.y);
        break;
    }
  }

  // rows: one per variable, plus one per (prod equation, j < z2)
  struct Row {
    enum class Kind { Marker, Jrow } kind;
    std::string var;   // marker rows
    size_t eq = 0;     // j rows
    int j = 0;
    int group = 1;     // component size along the second relation
  };
  std::vector<Row> rows;
  std::map<std::string, int> row_of_var;
  for (const auto& v : vars) {
    row_of_var[v] = static_cast<int>(rows.size());
    rows.push_back({Row::Kind::Marker, v, 0, 0, val(v)});
  }
  std::map<size_t, int> first_jrow;
  for (size_t ei = 0; ei < eqs.size(); ++ei)
    if (eqs[ei].kind == ElementaryEquation::Kind::Prod) {
      first_jrow[ei] = static_cast<int>(rows.size());
      for (int j = 0; j < val(eqs[ei].z2); ++j)
        rows.push_back({Row::Kind::Jrow, {}, ei, j, val(eqs[ei].z1)});
    }

  int cliques = 1;
  for (const auto& r : rows) cliques = std::lcm(cliques, r.group);
  int n_rows = static_cast<int>(rows.size());
  int n_worlds = cliques * n_rows;
  if (n_worlds > kMaxWorlds) throw std::invalid_argument("witness model too large");
  auto world = [&](int clique, int row) { return clique * n_rows + row; };

  // element blocks per variable
  std::map<std::string, int> block;
  int n_elems = 0;
  for (const auto& v : vars) {
    block[v] = n_elems;
    n_elems += val(v);
  }
  if (n_elems > kMaxElems) throw std::invalid_argument("witness domain too large");
  uint64_t full = (uint64_t{1} << n_elems) - 1;

  FOKripkeModel m;
  m.mode = DomainMode::Constant;
  m.frame.num_worlds = n_worlds;
  m.domains.assign(static_cast<size_t>(n_worlds), full);
  auto& r1 = m.frame.relation("1");
  auto& r2 = m.frame.relation("2");
  for (int k = 0; k < cliques; ++k)
    for (int a = 0; a < n_rows; ++a)
      for (int b = 0; b < n_rows; ++b)
        if (a != b) r1[static_cast<size_t>(world(k, a))] |= uint64_t{1} << world(k, b);
  for (int r = 0; r < n_rows; ++r) {
    int g = rows[static_cast<size_t>(r)].group;
    for (int k1 = 0; k1 < cliques; ++k1)
      for (int k2 = 0; k2 < cliques; ++k2)
        if (k1 != k2 && k1 / g == k2 / g)
          r2[static_cast<size_t>(world(k1, r))] |= uint64_t{1} << world(k2, r);
  }

  auto pred = [&](const std::string& name) -> std::vector<uint64_t>& {
    auto it = m.preds.find(name);
    if (it == m.preds.end())
      it = m.preds.emplace(name, std::vector<uint64_t>(static_cast<size_t>(n_worlds), 0)).first;
    return it->second;
  };
  auto cons = [&](const std::string& name) -> std::vector<int>& {
    auto it = m.consts.find(name);
    if (it == m.consts.end())
      it = m.consts.emplace(name, std::vector<int>(static_cast<size_t>(n_worlds), 0)).first;
    return it->second;
  };

  for (const auto& v : vars) {
    uint64_t bmask = ((uint64_t{1} << val(v)) - 1) << block[v];
    auto& pv = pred("P_" + v);
    for (int w = 0; w < n_worlds; ++w) pv[static_cast<size_t>(w)] = bmask;
    auto& cv = pred("C_" + v);
    auto& ccard = cons("c_" + v);
    int r = row_of_var[v];
    for (int k = 0; k < cliques; ++k) {
      cv[static_cast<size_t>(world(k, r))] = uint64_t{1} << block[v];
      ccard[static_cast<size_t>(world(k, r))] = block[v] + (k % val(v));
    }
  }

  for (size_t ei = 0; ei < eqs.size(); ++ei) {
    const ElementaryEquation& e = eqs[ei];
    std::string es = std::to_string(ei);
    switch (e.kind) {
      case ElementaryEquation::Kind::Const: {
        for (int i = 1; i <= e.n; ++i) {
          auto& ci = cons("c_" + es + "_" + std::to_string(i));
          for (int w = 0; w < n_worlds; ++w) ci[static_cast<size_t>(w)] = block[e.y] + i - 1;
        }
        break;
      }
      case ElementaryEquation::Kind::Sum: {
        int r1v = row_of_var[e.z1], r2v = row_of_var[e.z2];
        uint64_t q1mask = ((uint64_t{1} << val(e.z1)) - 1) << block[e.y];
        uint64_t q2mask = ((uint64_t{1} << val(e.z2)) - 1) << (block[e.y] + val(e.z1));
        auto& q1 = pred("Q_" + es + "_1");
        auto& q2 = pred("Q_" + es + "_2");
        auto& c1 = cons("c_" + es + "_1");
        auto& c2 = cons("c_" + es + "_2");
        for (int k = 0; k < cliques; ++k) {
          q1[static_cast<size_t>(world(k, r1v))] = q1mask;
          q2[static_cast<size_t>(world(k, r2v))] = q2mask;
          c1[static_cast<size_t>(world(k, r1v))] = block[e.y] + (k % val(e.z1));
          c2[static_cast<size_t>(world(k, r2v))] = block[e.y] + val(e.z1) + (k % val(e.z2));
        }
        break;
      }
      case ElementaryEquation::Kind::Prod: {
        auto& jpred = pred("J_" + es);
        auto& jc = cons("c_" + es);
        auto& qe = pred("Q_" + es);
        auto& c1 = cons("c_" + es + "_1");
        auto& c2 = cons("c_" + es + "_2");
        int z1 = val(e.z1);
        for (int j = 0; j < val(e.z2); ++j) {
          int r = first_jrow[ei] + j;
          for (int k = 0; k < cliques; ++k) {
            int w = world(k, r);
            jpred[static_cast<size_t>(w)] = uint64_t{1} << (block[e.z2] + j);
            jc[static_cast<size_t>(w)] = block[e.z2] + j;
            qe[static_cast<size_t>(w)] = ((uint64_t{1} << z1) - 1) << (block[e.y] + j * z1);
            c1[static_cast<size_t>(w)] = block[e.z1] + (k % z1);
            c2[static_cast<size_t>(w)] = block[e.y] + j * z1 + (k % z1);
          }
        }
        break;
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Minsky machines
// ---------------------------------------------------------------------------

struct MinskyInstr {
  bool inc = true;
  int reg = 1;              // 1 or 2
  int next_pos = 0;         // inc target, or dec target when the register is positive
  int next_zero = 0;        // dec target when the register is zero
};

struct MinskyMachine {
  // states q_0 .. q_N with q_N halting; instruction i executes in state q_i
  std::vector<MinskyInstr> instrs;
  int num_states() const { return static_cast<int>(instrs.size()) + 1; }

  void validate() const {
    int n = static_cast<int>(instrs.size());
    for (const auto& in : instrs) {
      if (in.reg != 1 && in.reg != 2) throw std::invalid_argument("register must be 1 or 2");
      if (in.next_pos < 0 || in.next_pos > n || in.next_zero < 0 || in.next_zero > n)
        throw std::invalid_argument("instruction target out of range");
    }
  }
};

struct MinskyEncoding {
  Formula init, state, instr;  // varphi_init, varphi_Q, varphi_I
};

namespace detail {
inline Formula state_letter(int i) { return mk_letter("q" + std::to_string(i)); }
inline Formula reg_atom(int k) { return mk_atom(k == 1 ? "V1" : "V2"); }
inline Formula reg_atom_c(int k) {
  return mk_atom(k == 1 ? "V1" : "V2", Term::cons("c"));
}
}  // namespace detail

inline MinskyEncoding encode_minsky(const MinskyMachine& m) {
  m.validate();
  int n = static_cast<int>(m.instrs.size());
  MinskyEncoding out;
  out.init = mk_and(mk_and(detail::state_letter(0), mk_not(mk_exists(detail::reg_atom(1)))),
                    mk_not(mk_exists(detail::reg_atom(2))));

  std::vector<Formula> qparts;
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      qparts.push_back(mk_not(mk_and(detail::state_letter(i), detail::state_letter(j))));
  qparts.push_back(mk_not(detail::state_letter(n)));
  out.state = conj_all(qparts);

  std::vector<Formula> iparts;
  Formula x_is_c = mk_eq(Term::var(), Term::cons("c"));
  for (int i = 0; i < n; ++i) {
    const MinskyInstr& in = m.instrs[static_cast<size_t>(i)];
    Formula qi = detail::state_letter(i);
    int k = in.reg, o = 3 - in.reg;
    Formula vk = detail::reg_atom(k), vo = detail::reg_atom(o);
    if (in.inc) {
      Formula guard = mk_and(qi, mk_not(detail::reg_atom_c(k)));
      Formula eff = mk_and(
          mk_and(mk_next(kNavLetter, detail::state_letter(in.next_pos)),
                 mk_counter(kNavLetter, mk_or(vk, x_is_c), vk)),
          mk_counter(kNavLetter, vo, vo));
      iparts.push_back(mk_implies(guard, eff));
    } else {
      Formula guard_pos = mk_and(qi, detail::reg_atom_c(k));
      Formula eff_pos = mk_and(
          mk_and(mk_next(kNavLetter, detail::state_letter(in.next_pos)),
                 mk_counter(kNavLetter, mk_and(vk, mk_not(x_is_c)), vk)),
          mk_counter(kNavLetter, vo, vo));
      Formula guard_zero = mk_and(qi, mk_not(mk_exists(vk)));
      Formula eff_zero =
          mk_and(mk_and(mk_next(kNavLetter, detail::state_letter(in.next_zero)),
                        mk_counter(kNavLetter, vk, vk)),
                 mk_counter(kNavLetter, vo, vo));
      iparts.push_back(mk_and(mk_implies(guard_pos, eff_pos), mk_implies(guard_zero, eff_zero)));
    }
  }
  out.instr = conj_all(iparts);
  return out;
}

// The alternating-path prefix simulating the computation on (0, 0); the last
// path world is the frontier.
inline FOKripkeModel simulate_minsky_model(const MinskyMachine& m, int steps) {
  m.validate();
  int n = static_cast<int>(m.instrs.size());

  struct Config {
    int state;
    uint64_t v1, v2;
    int c = 0;  // denotation chosen at this world
  };
  std::vector<Config> run{{0, 0, 0, 0}};
  int max_elem = 0;
  for (int t = 0; t < steps; ++t) {
    Config cur = run.back();
    if (cur.state >= n) break;  // halted
    const MinskyInstr& in = m.instrs[static_cast<size_t>(cur.state)];
    uint64_t vk = in.reg == 1 ? cur.v1 : cur.v2;
    Config next = cur;
    if (in.inc) {
      int fresh = 0;
      while ((vk >> fresh) & 1) ++fresh;
      max_elem = std::max(max_elem, fresh);
      run.back().c = fresh;
      uint64_t nvk = vk | (uint64_t{1} << fresh);
      next.state = in.next_pos;
      (in.reg == 1 ? next.v1 : next.v2) = nvk;
    } else if (vk != 0) {
      int victim = 0;
      while (!((vk >> victim) & 1)) ++victim;
      run.back().c = victim;
      next.state = in.next_pos;
      (in.reg == 1 ? next.v1 : next.v2) = vk & ~(uint64_t{1} << victim);
    } else {
      run.back().c = 0;
      next.state = in.next_zero;
    }
    next.c = 0;
    run.push_back(next);
  }

  int rounds = static_cast<int>(run.size()) - 1;
  int n_worlds = 2 * rounds + 1;  // w^0 v^0 w^1 ... w^rounds
  int n_elems = std::max(1, max_elem + 1);
  FOKripkeModel model;
  model.mode = DomainMode::Constant;
  model.frame.num_worlds = n_worlds;
  model.frame.relation("1");
  model.frame.relation("2");
  model.domains.assign(static_cast<size_t>(n_worlds), (uint64_t{1} << n_elems) - 1);
  uint64_t full = (uint64_t{1} << n_elems) - 1;

  for (int i = 0; i <= m.num_states(); ++i)
    model.preds["q" + std::to_string(i)].assign(static_cast<size_t>(n_worlds), 0);
  model.preds["V1"].assign(static_cast<size_t>(n_worlds), 0);
  model.preds["V2"].assign(static_cast<size_t>(n_worlds), 0);
  model.preds[kNavLetter].assign(static_cast<size_t>(n_worlds), 0);
  model.consts["c"].assign(static_cast<size_t>(n_worlds), 0);

  auto w_world = [](int i) { return 2 * i; };
  for (int i = 0; i <= rounds; ++i) {
    const Config& cfgw = run[static_cast<size_t>(i)];
    int w = w_world(i);
    model.preds[kNavLetter][static_cast<size_t>(w)] = full;
    model.preds["q" + std::to_string(cfgw.state)][static_cast<size_t>(w)] = full;
    model.preds["V1"][static_cast<size_t>(w)] = cfgw.v1;
    model.preds["V2"][static_cast<size_t>(w)] = cfgw.v2;
    model.consts["c"][static_cast<size_t>(w)] = cfgw.c;
    if (i < rounds) {
      int v = w + 1;
      model.frame.add_edge("1", w, v);
      model.frame.add_edge("2", v, w + 2);
      model.preds["V1"][static_cast<size_t>(v)] = cfgw.v1;
      model.preds["V2"][static_cast<size_t>(v)] = cfgw.v2;
      model.consts["c"][static_cast<size_t>(v)] = cfgw.c;
    }
  }
  model.frontier = uint64_t{1} << w_world(rounds);
  return model;
}

// ---------------------------------------------------------------------------
// Input formats
// ---------------------------------------------------------------------------

inline std::vector<ElementaryEquation> parse_equations(const std::string& text) {
  std::vector<ElementaryEquation> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string y, eq, a, op, b;
    if (!(ls >> y)) continue;  // blank line
    if (y[0] == '#') continue;
    if (!(ls >> eq >> a) || eq != "=")
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected <var> = ...");
    if (ls >> op) {
      if (!(ls >> b))
        throw std::invalid_argument("line " + std::to_string(lineno) + ": missing operand");
      if (op == "+")
        out.push_back(ElementaryEquation::sum(y, a, b));
      else if (op == "*")
        out.push_back(ElementaryEquation::prod(y, a, b));
      else
        throw std::invalid_argument("line " + std::to_string(lineno) + ": operator must be + or *");
    } else {
      try {
        out.push_back(ElementaryEquation::constant(y, std::stoi(a)));
      } catch (const std::invalid_argument&) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": expected a number");
      }
    }
  }
  if (out.empty()) throw std::invalid_argument("no equations given");
  return out;
}

inline MinskyMachine parse_machine(const std::string& text) {
  struct Line {
    std::string label, kind, reg, arrow, t1, pipe, t2;
  };
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::istringstream ls(raw);
    Line l;
    if (!(ls >> l.label)) continue;
    if (l.label[0] == '#') continue;
    if (l.label.back() != ':')
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'state:'");
    l.label.pop_back();
    if (!(ls >> l.kind >> l.reg >> l.arrow >> l.t1) || l.arrow != "->")
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'inc|dec rK -> state'");
    if (l.kind == "dec") {
      if (!(ls >> l.pipe >> l.t2) || l.pipe != "|")
        throw std::invalid_argument("line " + std::to_string(lineno) +
                                    ": dec needs '-> state | state'");
    } else if (l.kind != "inc") {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": instruction must be inc or dec");
    }
    lines.push_back(l);
  }
  std::map<std::string, int> index;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (index.count(lines[i].label))
      throw std::invalid_argument("duplicate state " + lines[i].label);
    index[lines[i].label] = static_cast<int>(i);
  }
  index["halt"] = static_cast<int>(lines.size());
  auto state_of = [&](const std::string& s) {
    auto it = index.find(s);
    if (it == index.end()) throw std::invalid_argument("unknown state " + s);
    return it->second;
  };
  MinskyMachine m;
  for (const auto& l : lines) {
    MinskyInstr in;
    if (l.reg != "r1" && l.reg != "r2")
      throw std::invalid_argument("register must be r1 or r2");
    in.reg = l.reg == "r1" ? 1 : 2;
    in.inc = l.kind == "inc";
    in.next_pos = state_of(l.t1);
    in.next_zero = in.inc ? in.next_pos : state_of(l.t2);
    m.instrs.push_back(in);
  }
  m.validate();
  return m;
}

}  // namespace ovml
