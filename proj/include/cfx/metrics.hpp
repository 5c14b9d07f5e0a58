#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfx/dataset.hpp"
#include "cfx/heom.hpp"
#include "cfx/model.hpp"
#include "cfx/schema.hpp"

namespace cfx {

enum class Direction { kMin, kMax };

inline constexpr std::size_t kDefaultNeighborK = 5;

// Quality of one counterfactual. The first three fields are the selection
// criteria; sparsity and instability are reported only.
struct CriteriaVector {
  double proximity = 0.0;    // min
  double feasibility = 0.0;  // min
  double dpow = 0.0;         // max
  std::optional<int> sparsity;        // min
  std::optional<double> instability;  // min

  // (proximity, feasibility, dpow) in that order.
  std::vector<double> selection() const { return {proximity, feasibility, dpow}; }
};

inline const std::vector<Direction>& selection_directions() {
  static const std::vector<Direction> dirs = {Direction::kMin, Direction::kMin, Direction::kMax};
  return dirs;
}

// Continuous values closer than this (raw units) count as unchanged.
inline constexpr double kSparsityTolerance = 1e-9;

double proximity(const Instance& x, const Instance& x_prime, const Heom& metric);

// Mean HEOM distance from x_prime to its k nearest training rows.
double feasibility(const Instance& x_prime, const Dataset& data, std::size_t k);

int sparsity(const Instance& x, const Instance& x_prime, const FeatureSchema& schema);

// Fraction of x_prime's k nearest training rows that the model assigns to
// the same class as x_prime.
double discriminative_power(const Instance& x_prime, const Dataset& data, const Model& model,
                            std::size_t k);

// Proximity, feasibility, dpow and sparsity from a single neighbour search.
CriteriaVector score_candidate(const Instance& x, const Instance& x_prime, const Dataset& data,
                               const Model& model, const Heom& metric, std::size_t k);

// Counterfactual procedure under test: the selected x' for a query, or
// nullopt when the procedure finds none.
using Procedure = std::function<std::optional<Instance>(const Instance&)>;

// Memoizes a procedure's output per (procedure name, dataset row). Safe to
// share between threads; concurrent misses on the same key may both compute,
// the first stored result wins.
class ProcedureCache {
 public:
  std::optional<Instance> get_or_compute(const std::string& procedure, std::size_t row,
                                         const Instance& query, const Procedure& run);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::size_t>, std::optional<Instance>> entries_;
};

// HEOM distance between x_prime (the procedure's output for x) and the
// procedure's output for x's nearest training neighbour. nullopt when the
// procedure finds nothing for the neighbour.
std::optional<double> instability(const Instance& x, const Instance& x_prime, const Dataset& data,
                                  const std::string& procedure_name, const Procedure& procedure,
                                  ProcedureCache& cache);

// The nearest training row of x (excluding x's own row), used by instability.
std::size_t nearest_training_row(const Instance& x, const Dataset& data);

// One method's result on one query.
struct MethodOutcome {
  std::optional<CriteriaVector> criteria;  // nullopt: no counterfactual
  bool actionable = false;
};

// One row of the metrics table. Means run over covered queries; instability
// over queries where it is defined. NaN marks a mean over nothing.
struct SummaryRow {
  double proximity = 0.0;
  double feasibility = 0.0;
  double dpow = 0.0;
  double sparsity = 0.0;
  double instability = 0.0;
  double coverage = 0.0;
  double actionability = 0.0;
  std::size_t queries = 0;
  std::size_t covered = 0;
  std::size_t instability_missing = 0;  // covered queries without instability
};

// Throws ParameterError on an empty outcome list.
SummaryRow aggregate_stats(const std::vector<MethodOutcome>& outcomes);

}  // namespace cfx
