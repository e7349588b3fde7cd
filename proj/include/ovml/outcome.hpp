#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ovml/semantics.hpp"

namespace ovml {

enum class Verdict { Valid, Invalid, Unknown };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

struct DecisionOutcome {
  Verdict verdict = Verdict::Unknown;
  std::optional<FOKripkeModel> witness;  // refutes the query; distinguished world below
  int witness_world = 0;
  std::string note;                          // resource bound, taint reason, ...
  std::vector<std::string> certificate;      // e.g. witnessing quasistate dumps

  static DecisionOutcome valid() { return {Verdict::Valid, std::nullopt, 0, {}, {}}; }
  static DecisionOutcome invalid() { return {Verdict::Invalid, std::nullopt, 0, {}, {}}; }
  static DecisionOutcome invalid_with(FOKripkeModel m, int w) {
    DecisionOutcome o;
    o.verdict = Verdict::Invalid;
    o.witness = std::move(m);
    o.witness_world = w;
    return o;
  }
  static DecisionOutcome unknown(std::string why) {
    DecisionOutcome o;
    o.note = std::move(why);
    return o;
  }
  bool is(Verdict v) const { return verdict == v; }
};

}  // namespace ovml
