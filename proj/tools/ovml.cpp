// Batch front end for the one-variable modal logic toolkit.
//
// Exit codes: 0 valid/holds, 1 invalid/fails, 2 unknown, >= 10 usage or
// parse errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ovml/encoders.hpp"
#include "ovml/fusion.hpp"
#include "ovml/model_io.hpp"
#include "ovml/oracle.hpp"
#include "ovml/parse.hpp"
#include "ovml/prop_fusion.hpp"
#include "ovml/translate.hpp"

namespace {

using namespace ovml;

constexpr int kExitValid = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 10;
constexpr int kExitParse = 11;

struct LogicChoice {
  std::string name = "K";

  FrameClassSpec spec() const {
    if (name == "K") return FrameClassSpec::all();
    if (name == "S5") return FrameClassSpec::equivalence();
    if (name == "Diff") return FrameClassSpec::difference();
    throw CLI::ValidationError("--l", "unknown logic " + name + " (use K, S5 or Diff)");
  }
  bool decidable() const { return name == "K" || name == "S5"; }
};

struct CommonOpts {
  LogicChoice l1, l2;
  std::string mode = "xd";
  int max_worlds = 4;
  int max_elems = 2;
  bool assume_fmp = true;
  std::string strategy = "auto";
  std::string cert_path;
  std::string dot_path;
  bool allow_reserved = false;

  DomainMode domain_mode() const {
    if (mode == "xd") return DomainMode::Expanding;
    if (mode == "cd") return DomainMode::Constant;
    throw CLI::ValidationError("--mode", "must be xd or cd");
  }
  GlobalStrategy global_strategy() const {
    if (strategy == "subsets") return GlobalStrategy::SubsetEnumeration;
    if (strategy == "fixpoint") return GlobalStrategy::EliminationFixpoint;
    if (strategy == "lazy") return GlobalStrategy::LazyClosure;
    if (strategy == "auto") return GlobalStrategy::Auto;
    throw CLI::ValidationError("--strategy", "must be subsets, fixpoint, lazy or auto");
  }
  FusionConfig fusion() const {
    if (!l1.decidable() || !l2.decidable())
      throw CLI::ValidationError("--l1/--l2", "deciders exist for K and S5 only");
    FusionConfig cfg;
    cfg.d1 = bounded_decider(l1.spec(), "1", max_worlds, max_elems, domain_mode(), assume_fmp);
    cfg.d2 = bounded_decider(l2.spec(), "2", max_worlds, max_elems, domain_mode(), assume_fmp);
    cfg.mode = domain_mode();
    cfg.strategy = global_strategy();
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--l1", o.l1.name, "component logic 1 (K, S5, Diff)");
  cmd->add_option("--l2", o.l2.name, "component logic 2 (K, S5, Diff)");
  cmd->add_option("--mode", o.mode, "domain mode: xd or cd");
  cmd->add_option("--max-worlds", o.max_worlds, "component search bound on worlds");
  cmd->add_option("--max-elems", o.max_elems, "component search bound on elements");
  cmd->add_flag("--assume-fmp-bound,!--no-assume-fmp-bound", o.assume_fmp,
                "treat exhausted search as validity");
  cmd->add_option("--strategy", o.strategy, "global strategy: subsets, fixpoint, lazy, auto");
  cmd->add_option("--cert", o.cert_path, "write the certificate here");
  cmd->add_option("--dot", o.dot_path, "write a DOT dump of the witness frame here");
  cmd->add_flag("--allow-reserved", o.allow_reserved, "accept reserved __ identifiers");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int report(const DecisionOutcome& out, const CommonOpts& o) {
  std::cout << to_string(out.verdict);
  if (!out.note.empty()) std::cout << " (" << out.note << ")";
  std::cout << "\n";
  if (!o.cert_path.empty()) {
    std::ofstream cert(o.cert_path);
    if (out.witness) {
      cert << model_to_text(*out.witness);
    } else {
      for (const auto& line : out.certificate) cert << line << "\n";
    }
  }
  if (!o.dot_path.empty() && out.witness) {
    std::ofstream dot(o.dot_path);
    dot << frame_to_dot(out.witness->frame);
  }
  switch (out.verdict) {
    case Verdict::Valid: return kExitValid;
    case Verdict::Invalid: return kExitInvalid;
    case Verdict::Unknown: return kExitUnknown;
  }
  return kExitUnknown;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision procedures for fusions of one-variable modal logics"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string formula_text, phi_text, psi_text;
  std::string model_path, input_path, solution_text, output_path;
  int world = -1;
  int steps = 3;
  bool global_check = false;
  bool inverse = false;

  auto* dl = app.add_subcommand("decide-local", "decide local consequence of a fused formula");
  add_common(dl, opts);
  dl->add_option("formula", formula_text, "formula over []1, []2")->required();

  auto* dg = app.add_subcommand("decide-global", "decide global consequence phi |-* psi");
  add_common(dg, opts);
  dg->add_option("--phi", phi_text, "global premise")->required();
  dg->add_option("--psi", psi_text, "goal")->required();

  auto* cm = app.add_subcommand("check-model", "evaluate a formula on a model");
  add_common(cm, opts);
  cm->add_option("--model", model_path, "model file (JSON interchange)")->required();
  cm->add_option("--formula", formula_text, "formula to check")->required();
  cm->add_option("--world", world, "world to check at (default: global)");
  cm->add_flag("--global", global_check, "check at every non-frontier world");

  auto* eq = app.add_subcommand("enumerate-quasistates", "enumerate quasistates of sub(phi)");
  add_common(eq, opts);
  eq->add_option("formula", formula_text, "formula over []1, []2")->required();

  auto* ed = app.add_subcommand("encode-diophantine", "emit the equation-system encoding");
  add_common(ed, opts);
  ed->add_option("--equations", input_path, "equation file: y = 3, y = z1 + z2, y = z1 * z2")
      ->required();
  ed->add_option("--solution", solution_text, "solution like y=2,z1=1,z2=1; emits a witness model");
  ed->add_option("--out", output_path, "write the witness model here");

  auto* em = app.add_subcommand("encode-minsky", "emit the two-counter machine encoding");
  add_common(em, opts);
  em->add_option("--machine", input_path, "machine file: q0: inc r1 -> q1 / q0: dec r1 -> q1 | q2")
      ->required();
  em->add_option("--simulate", steps, "also emit the k-step simulation prefix");
  em->add_option("--out", output_path, "write the prefix model here");

  auto* ts = app.add_subcommand("translate-star", "translate between the two languages");
  add_common(ts, opts);
  ts->add_option("formula", formula_text, "formula to translate")->required();
  ts->add_flag("--inverse", inverse, "translate a propositional formula back");

  auto* gf = app.add_subcommand("counterexample-gfmp",
                                "emit the global-fmp counterexample and a finite prefix");
  add_common(gf, opts);
  gf->add_option("--k", steps, "prefix depth");
  gf->add_option("--out", output_path, "write the prefix model here");

  CLI11_PARSE(app, argc, argv);

  try {
    Language lang = Language::fused();

    if (dl->parsed()) {
      Formula f = parse(formula_text, lang, opts.allow_reserved);
      FusionConfig cfg = opts.fusion();
      DecisionOutcome out = decide_local_fusion(cfg, f);
      if (out.is(Verdict::Invalid) && (!opts.cert_path.empty() || !opts.dot_path.empty())) {
        auto cmodel = build_countermodel_local(cfg, f);
        if (cmodel) {
          out.witness = cmodel->first;
          out.witness_world = cmodel->second;
        }
      }
      return report(out, opts);
    }
    if (dg->parsed()) {
      Formula phi = parse(phi_text, lang, opts.allow_reserved);
      Formula psi = parse(psi_text, lang, opts.allow_reserved);
      return report(decide_global_fusion(opts.fusion(), phi, psi), opts);
    }
    if (cm->parsed()) {
      FOKripkeModel m = model_from_text(slurp(model_path));
      std::string why;
      if (!validate(m, &why)) {
        std::cerr << "invalid model: " << why << "\n";
        return kExitParse;
      }
      Language ml = Language::fused(true);
      ml.open_modalities = true;
      Formula f = parse(formula_text, ml, opts.allow_reserved);
      bool ok = (world >= 0 && !global_check) ? holds_at(m, world, f) : holds_globally(m, f);
      std::cout << (ok ? "holds" : "fails") << "\n";
      return ok ? kExitValid : kExitInvalid;
    }
    if (eq->parsed()) {
      Formula f = parse(formula_text, lang, opts.allow_reserved);
      auto base = make_base<Formula>(subformulas(f));
      auto qs = enumerate_quasistates(base);
      for (const auto& q : qs) std::cout << dump_quasistate(q) << "\n";
      std::cout << qs.size() << " quasistates\n";
      return kExitValid;
    }
    if (ed->parsed()) {
      auto eqs = parse_equations(slurp(input_path));
      Formula phi = encode_diophantine(eqs);
      std::cout << print(phi) << "\n";
      if (!solution_text.empty()) {
        std::map<std::string, int> sol;
        std::istringstream ss(solution_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
          auto pos = item.find('=');
          if (pos == std::string::npos) throw std::runtime_error("bad solution entry " + item);
          sol[item.substr(0, pos)] = std::stoi(item.substr(pos + 1));
        }
        FOKripkeModel m = witness_model_diophantine(eqs, sol);
        bool ok = holds_globally(m, phi);
        std::cerr << "witness " << (ok ? "holds" : "fails") << " globally\n";
        if (!output_path.empty()) std::ofstream(output_path) << model_to_text(m);
        if (!ok) return kExitInvalid;
      }
      return kExitValid;
    }
    if (em->parsed()) {
      MinskyMachine m = parse_machine(slurp(input_path));
      MinskyEncoding enc = encode_minsky(m);
      std::cout << "init: " << print(enc.init) << "\n";
      std::cout << "state: " << print(enc.state) << "\n";
      std::cout << "instr: " << print(enc.instr) << "\n";
      if (em->count("--simulate") || !output_path.empty()) {
        FOKripkeModel prefix = simulate_minsky_model(m, steps);
        if (!output_path.empty()) std::ofstream(output_path) << model_to_text(prefix);
      }
      return kExitValid;
    }
    if (ts->parsed()) {
      if (inverse) {
        PropFormula f = parse_prop(formula_text, nullptr, opts.allow_reserved);
        std::cout << print(translate_star_inv(f)) << "\n";
      } else {
        Formula f = parse(formula_text, lang, opts.allow_reserved);
        std::cout << print(translate_star(f)) << "\n";
      }
      return kExitValid;
    }
    if (gf->parsed()) {
      GfmpCounterexample g = global_fmp_counterexample();
      std::cout << print(g.phi) << "\n";
      FOKripkeModel prefix = g.prefix(steps);
      bool ok = holds_globally(prefix, g.phi);
      std::cerr << "prefix of depth " << steps << " " << (ok ? "satisfies" : "fails")
                << " the formula at non-frontier worlds\n";
      if (!output_path.empty()) std::ofstream(output_path) << model_to_text(prefix);
      return ok ? kExitValid : kExitInvalid;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
