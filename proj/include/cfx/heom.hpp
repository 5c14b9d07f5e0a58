#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cfx/dataset.hpp"
#include "cfx/schema.hpp"

namespace cfx {

// Heterogeneous Euclidean-Overlap Metric.
//
// Per-feature term: categorical features contribute 0 when equal and 1
// otherwise (an unknown category always contributes 1); continuous features
// contribute |a - b| / (max - min), clipped to [0, 1]. A zero-width range
// contributes 0 for equal values and 1 otherwise. The distance is the
// Euclidean norm of the per-feature terms.
class Heom {
 public:
  Heom() = default;
  Heom(const FeatureSchema& schema, const RangeTable& ranges);

  std::size_t size() const { return categorical_.size(); }

  double term(std::size_t feature, double a, double b) const;
  double operator()(std::span<const double> a, std::span<const double> b) const;
  double operator()(const Instance& a, const Instance& b) const {
    return (*this)(a.view(), b.view());
  }

 private:
  std::vector<char> categorical_;
  std::vector<double> inv_width_;  // 0 marks a zero-width continuous feature
};

double heom_distance(const Instance& a, const Instance& b, const FeatureSchema& schema,
                     const RangeTable& ranges);

struct Neighbor {
  std::size_t row;  // index into Dataset::rows
  double distance;
};

// k nearest rows among `candidates` (indices into `rows`), ascending by
// distance with ties broken by ascending row index. `exclude` removes one row
// index from consideration. Throws ParameterError when k is zero or exceeds the
// number of eligible rows.
std::vector<Neighbor> nearest_rows(const Instance& query, std::span<const Instance> rows,
                                   std::span<const std::size_t> candidates, const Heom& metric,
                                   std::size_t k, std::optional<std::size_t> exclude = {});

// k nearest training rows of `data`. With exclude_self, the training row whose
// index equals query.id is skipped.
std::vector<Neighbor> knn(const Instance& query, const Dataset& data, std::size_t k,
                          bool exclude_self);
std::vector<Neighbor> knn(const Instance& query, const Dataset& data, const Heom& metric,
                          std::size_t k, bool exclude_self);

}  // namespace cfx
