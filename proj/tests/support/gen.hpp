#pragma once

// Seeded random formula generators used across the test suites.

#include <random>
#include <string>
#include <vector>

#include "ovml/formula.hpp"
#include "ovml/prop_formula.hpp"

namespace ovml::testgen {

struct Gen {
  std::mt19937 rng;
  std::vector<std::string> preds{"P", "Q"};
  std::vector<std::string> modalities{"1", "2"};

  explicit Gen(uint32_t seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<uint32_t>(n)); }

  Formula formula(int depth) {
    if (depth <= 0) return mk_atom(preds[static_cast<size_t>(pick(static_cast<int>(preds.size())))]);
    switch (pick(6)) {
      case 0: return mk_atom(preds[static_cast<size_t>(pick(static_cast<int>(preds.size())))]);
      case 1: return mk_not(formula(depth - 1));
      case 2: return mk_and(formula(depth - 1), formula(depth - 1));
      case 3: return mk_exists(formula(depth - 1));
      default:
        return mk_box(modalities[static_cast<size_t>(pick(static_cast<int>(modalities.size())))],
                      formula(depth - 1));
    }
  }

  PropFormula prop(int depth, const std::vector<std::string>& mods = {"1", "2", "E"}) {
    if (depth <= 0) return mk_pletter(preds[static_cast<size_t>(pick(static_cast<int>(preds.size())))]);
    switch (pick(5)) {
      case 0: return mk_pletter(preds[static_cast<size_t>(pick(static_cast<int>(preds.size())))]);
      case 1: return mk_pnot(prop(depth - 1, mods));
      case 2: return mk_pand(prop(depth - 1, mods), prop(depth - 1, mods));
      default:
        return mk_pbox(mods[static_cast<size_t>(pick(static_cast<int>(mods.size())))],
                       prop(depth - 1, mods));
    }
  }
};

}  // namespace ovml::testgen
