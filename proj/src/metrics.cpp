#include "cfx/metrics.hpp"

#include <cmath>
#include <limits>

#include "cfx/error.hpp"

namespace cfx {

double proximity(const Instance& x, const Instance& x_prime, const Heom& metric) {
  return metric(x, x_prime);
}

namespace {

double mean_distance(const std::vector<Neighbor>& neighbors) {
  double sum = 0.0;
  for (const auto& n : neighbors) sum += n.distance;
  return sum / static_cast<double>(neighbors.size());
}

double agreement(const std::vector<Neighbor>& neighbors, const Dataset& data, const Model& model,
                 int cls) {
  std::size_t same = 0;
  for (const auto& n : neighbors) {
    if (model.predict(data.rows[n.row]) == cls) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(neighbors.size());
}

}  // namespace

double feasibility(const Instance& x_prime, const Dataset& data, std::size_t k) {
  return mean_distance(knn(x_prime, data, k, false));
}

int sparsity(const Instance& x, const Instance& x_prime, const FeatureSchema& schema) {
  int changed = 0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].categorical()) {
      changed += x[f] != x_prime[f];
    } else {
      changed += std::abs(x[f] - x_prime[f]) > kSparsityTolerance;
    }
  }
  return changed;
}

double discriminative_power(const Instance& x_prime, const Dataset& data, const Model& model,
                            std::size_t k) {
  return agreement(knn(x_prime, data, k, false), data, model, model.predict(x_prime));
}

CriteriaVector score_candidate(const Instance& x, const Instance& x_prime, const Dataset& data,
                               const Model& model, const Heom& metric, std::size_t k) {
  const auto neighbors = knn(x_prime, data, metric, k, false);
  CriteriaVector c;
  c.proximity = metric(x, x_prime);
  c.feasibility = mean_distance(neighbors);
  c.dpow = agreement(neighbors, data, model, model.predict(x_prime));
  c.sparsity = sparsity(x, x_prime, data.schema);
  return c;
}

std::optional<Instance> ProcedureCache::get_or_compute(const std::string& procedure,
                                                       std::size_t row, const Instance& query,
                                                       const Procedure& run) {
  const auto key = std::make_pair(procedure, row);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto result = run(query);
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(result)).first->second;
}

std::size_t ProcedureCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t nearest_training_row(const Instance& x, const Dataset& data) {
  return knn(x, data, 1, true).front().row;
}

std::optional<double> instability(const Instance& x, const Instance& x_prime, const Dataset& data,
                                  const std::string& procedure_name, const Procedure& procedure,
                                  ProcedureCache& cache) {
  const std::size_t row = nearest_training_row(x, data);
  const auto other = cache.get_or_compute(procedure_name, row, data.rows[row], procedure);
  if (!other) return std::nullopt;
  return heom_distance(x_prime, *other, data.schema, data.ranges);
}

SummaryRow aggregate_stats(const std::vector<MethodOutcome>& outcomes) {
  if (outcomes.empty()) throw ParameterError("cannot summarize an empty result list");
  SummaryRow row;
  row.queries = outcomes.size();
  std::size_t actionable = 0;
  std::size_t with_instability = 0;
  for (const auto& o : outcomes) {
    if (!o.criteria) continue;
    ++row.covered;
    if (o.actionable) ++actionable;
    row.proximity += o.criteria->proximity;
    row.feasibility += o.criteria->feasibility;
    row.dpow += o.criteria->dpow;
    row.sparsity += o.criteria->sparsity.value_or(0);
    if (o.criteria->instability) {
      row.instability += *o.criteria->instability;
      ++with_instability;
    } else {
      ++row.instability_missing;
    }
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  const auto covered = static_cast<double>(row.covered);
  if (row.covered == 0) {
    row.proximity = row.feasibility = row.dpow = row.sparsity = kNaN;
  } else {
    row.proximity /= covered;
    row.feasibility /= covered;
    row.dpow /= covered;
    row.sparsity /= covered;
  }
  row.instability = with_instability == 0 ? kNaN
                                          : row.instability / static_cast<double>(with_instability);
  row.coverage = covered / static_cast<double>(row.queries);
  row.actionability = static_cast<double>(actionable) / static_cast<double>(row.queries);
  return row;
}

}  // namespace cfx
