#pragma once

#include <compare>
#include <string>

#include "cfx/schema.hpp"

namespace cfx {

// Which explainer produced a candidate. Ensemble order is (rank, restart).
struct Provenance {
  std::string explainer;
  int rank = 0;
  int restart = 0;

  friend bool operator==(const Provenance& a, const Provenance& b) {
    return a.rank == b.rank && a.restart == b.restart && a.explainer == b.explainer;
  }
};

inline bool provenance_less(const Provenance& a, const Provenance& b) {
  return a.rank != b.rank ? a.rank < b.rank : a.restart < b.restart;
}

// A proposed counterfactual x' for some query x.
struct Candidate {
  Instance x_prime;
  Provenance source;
  int predicted = -1;       // model class index for x_prime
  bool valid = false;       // predicted == desired class
  bool actionable = false;  // no immutable feature differs from x
};

// True when x_prime keeps every immutable feature of x.
bool is_actionable(const Instance& x, const Instance& x_prime, const FeatureSchema& schema);

}  // namespace cfx
