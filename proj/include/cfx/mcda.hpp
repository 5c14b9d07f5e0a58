#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cfx/candidate.hpp"
#include "cfx/metrics.hpp"

namespace cfx {

using Point = std::vector<double>;

// Order-preserving filters over annotated candidates.
std::vector<Candidate> filter_valid(const std::vector<Candidate>& cands, int desired_class);
std::vector<Candidate> filter_actionable(const std::vector<Candidate>& cands, const Instance& x,
                                         const FeatureSchema& schema);

// a is at least as good as b everywhere and strictly better somewhere.
// Throws ParameterError when arities differ.
bool dominates(std::span<const double> a, std::span<const double> b,
               std::span<const Direction> dirs);

struct ParetoFront {
  std::vector<std::size_t> members;  // indices into the input, ascending
  std::size_t dominated_count = 0;
};

// Exact non-dominated subset. Points with identical criteria are all kept.
ParetoFront pareto_front(std::span<const Point> points, std::span<const Direction> dirs);

// Min-max normalization per criterion over `points`, then max criteria are
// flipped to 1 - v so that smaller is better everywhere. A criterion with
// zero spread maps to 0.
std::vector<Point> normalize_criteria(std::span<const Point> points,
                                      std::span<const Direction> dirs);

enum class DistanceMetric { kL1, kL2, kLinf, kNadirPlane };

std::string_view metric_name(DistanceMetric m);  // "L1", "L2", "Linf", "nadir"
std::optional<DistanceMetric> parse_metric(std::string_view name);

// Distance between two points under L1, L2 or Linf.
double lp_distance(std::span<const double> a, std::span<const double> b, DistanceMetric m);

struct IdealPoint {
  Point raw;         // best value per criterion over the front
  Point normalized;  // image in the normalized, min-oriented space
};

IdealPoint ideal_point(std::span<const Point> raw, std::span<const Point> normalized,
                       std::span<const std::size_t> front, std::span<const Direction> dirs);

// Worst normalized value per criterion over the front.
Point nadir_point(std::span<const Point> normalized, std::span<const std::size_t> front);

// Front member (an index into `normalized`) closest to `ideal` under m; ties
// go to the smallest index. nullopt for an empty front.
std::optional<std::size_t> select_ideal(std::span<const Point> normalized,
                                        std::span<const std::size_t> front,
                                        std::span<const double> ideal, DistanceMetric m);

// Front member with the smallest offset along the ideal-nadir axis, measured
// from the hyperplane through the ideal point orthogonal to that axis. Falls
// back to L2 ideal selection when ideal and nadir coincide.
std::optional<std::size_t> select_nadir_plane(std::span<const Point> normalized,
                                              std::span<const std::size_t> front,
                                              std::span<const double> ideal);

struct SurvivalCounts {
  std::size_t all = 0;
  std::size_t valid = 0;
  std::size_t actionable = 0;
  std::size_t front = 0;
  std::size_t chosen = 0;

  bool operator==(const SurvivalCounts&) const = default;
};

struct SelectionResult {
  DistanceMetric metric = DistanceMetric::kL2;
  SurvivalCounts counts;
  // Valid and actionable candidates in provenance order, with their criteria.
  std::vector<Candidate> pool;
  std::vector<CriteriaVector> criteria;
  std::vector<Point> normalized;
  std::vector<std::size_t> front;  // indices into pool
  std::optional<IdealPoint> ideal;
  std::optional<std::size_t> chosen;  // index into pool
  // Survival counts restricted to each explainer's candidates.
  std::map<std::string, SurvivalCounts> per_explainer;

  const Candidate* chosen_candidate() const { return chosen ? &pool[*chosen] : nullptr; }
  const CriteriaVector* chosen_criteria() const { return chosen ? &criteria[*chosen] : nullptr; }
};

// Criteria for the candidate at an index of the selection input.
using Scorer = std::function<CriteriaVector(std::size_t)>;

// Validity and actionability filters, dominance filter on (proximity,
// feasibility, dpow), then ideal point selection. `cands` must be annotated;
// the scorer is only called for valid and actionable candidates.
SelectionResult select_counterfactual(const std::vector<Candidate>& cands, const Scorer& score,
                                      DistanceMetric metric);

nlohmann::json to_json(const SelectionResult& result, const FeatureSchema& schema);

}  // namespace cfx
