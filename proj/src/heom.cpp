#include "cfx/heom.hpp"

#include <algorithm>
#include <cmath>

#include "cfx/error.hpp"

namespace cfx {

Heom::Heom(const FeatureSchema& schema, const RangeTable& ranges)
    : categorical_(schema.size()), inv_width_(schema.size(), 0.0) {
  if (ranges.size() != schema.size()) {
    throw ParameterError("range table does not match schema");
  }
  for (std::size_t f = 0; f < schema.size(); ++f) {
    categorical_[f] = schema[f].categorical() ? 1 : 0;
    if (!categorical_[f] && !ranges.zero_width(f)) inv_width_[f] = 1.0 / ranges[f].width();
  }
}

double Heom::term(std::size_t f, double a, double b) const {
  if (categorical_[f]) {
    return (a == b && a != kUnknownCategory) ? 0.0 : 1.0;
  }
  if (inv_width_[f] == 0.0) return a == b ? 0.0 : 1.0;
  return std::min(1.0, std::abs(a - b) * inv_width_[f]);
}

double Heom::operator()(std::span<const double> a, std::span<const double> b) const {
  double sum = 0.0;
  for (std::size_t f = 0; f < categorical_.size(); ++f) {
    const double d = term(f, a[f], b[f]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double heom_distance(const Instance& a, const Instance& b, const FeatureSchema& schema,
                     const RangeTable& ranges) {
  return Heom(schema, ranges)(a, b);
}

std::vector<Neighbor> nearest_rows(const Instance& query, std::span<const Instance> rows,
                                   std::span<const std::size_t> candidates, const Heom& metric,
                                   std::size_t k, std::optional<std::size_t> exclude) {
  std::vector<Neighbor> all;
  all.reserve(candidates.size());
  for (std::size_t idx : candidates) {
    if (exclude && idx == *exclude) continue;
    all.push_back({idx, metric(query, rows[idx])});
  }
  if (k == 0 || k > all.size()) {
    throw ParameterError("k = " + std::to_string(k) + " but only " + std::to_string(all.size()) +
                         " rows are eligible");
  }
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.row < b.row);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  return all;
}

std::vector<Neighbor> knn(const Instance& query, const Dataset& data, const Heom& metric,
                          std::size_t k, bool exclude_self) {
  std::optional<std::size_t> exclude;
  if (exclude_self && query.id && *query.id >= 0) exclude = static_cast<std::size_t>(*query.id);
  return nearest_rows(query, data.rows, data.train, metric, k, exclude);
}

std::vector<Neighbor> knn(const Instance& query, const Dataset& data, std::size_t k,
                          bool exclude_self) {
  return knn(query, data, Heom(data.schema, data.ranges), k, exclude_self);
}

}  // namespace cfx
