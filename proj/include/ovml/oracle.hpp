#pragma once

// Direct bounded search over fused frames: the ground-truth cross-check for
// the quasistate pipeline. Exhaustion counts as validity only under an
// explicit fmp assumption at the configured bounds.

#include "ovml/bounded.hpp"

namespace ovml {

struct FusedOracle {
  FrameClassSpec class1 = FrameClassSpec::all();
  FrameClassSpec class2 = FrameClassSpec::all();
  int max_worlds = 3;
  int max_elems = 2;
  DomainMode mode = DomainMode::Expanding;
  bool assume_fmp = true;
  SearchEngine engine = SearchEngine::Sat;

  BoundedQuery base() const {
    BoundedQuery q;
    q.frames["1"] = class1;
    q.frames["2"] = class2;
    q.n_worlds = max_worlds;
    q.n_elems = max_elems;
    q.mode = mode;
    return q;
  }

  DecisionOutcome finish(const SearchResult& r) const {
    switch (r.status) {
      case SearchStatus::Found: return DecisionOutcome::invalid_with(*r.model, r.refute_world);
      case SearchStatus::Exhausted:
        return assume_fmp ? DecisionOutcome::valid()
                          : DecisionOutcome::unknown("exhausted without an fmp assumption");
      case SearchStatus::ResourceOut: return DecisionOutcome::unknown("resource budget exhausted");
    }
    return DecisionOutcome::unknown("unreachable");
  }

  DecisionOutcome local(const Formula& f) const {
    BoundedQuery q = base();
    q.refute = f;
    return finish(bounded_search(q, engine));
  }
  DecisionOutcome global(const Formula& premise, const Formula& goal) const {
    BoundedQuery q = base();
    q.global_true.push_back(premise);
    q.refute = goal;
    return finish(bounded_search(q, engine));
  }
  // is there a bounded model making f true everywhere?
  DecisionOutcome globally_satisfiable(const Formula& f) const {
    BoundedQuery q = base();
    q.global_true.push_back(f);
    return finish(bounded_search(q, engine));
  }
};

}  // namespace ovml
