#include "cfx/mcda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfx/error.hpp"

namespace cfx {

std::vector<Candidate> filter_valid(const std::vector<Candidate>& cands, int desired_class) {
  std::vector<Candidate> out;
  for (const auto& c : cands) {
    if (c.predicted == desired_class) out.push_back(c);
  }
  return out;
}

std::vector<Candidate> filter_actionable(const std::vector<Candidate>& cands, const Instance& x,
                                         const FeatureSchema& schema) {
  std::vector<Candidate> out;
  for (const auto& c : cands) {
    if (is_actionable(x, c.x_prime, schema)) out.push_back(c);
  }
  return out;
}

bool dominates(std::span<const double> a, std::span<const double> b,
               std::span<const Direction> dirs) {
  if (a.size() != b.size() || a.size() != dirs.size()) {
    throw ParameterError("criteria arity mismatch");
  }
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double better = dirs[i] == Direction::kMin ? b[i] - a[i] : a[i] - b[i];
    if (better < 0) return false;
    if (better > 0) strictly = true;
  }
  return strictly;
}

ParetoFront pareto_front(std::span<const Point> points, std::span<const Direction> dirs) {
  ParetoFront front;
  if (points.empty()) return front;
  for (const auto& p : points) {
    if (p.size() != dirs.size()) throw ParameterError("criteria arity mismatch");
  }
  // In lexicographic order of the min-oriented values, nothing can be
  // dominated by a point that comes after it, and anything dominated is
  // dominated by some earlier front member. One pass against the accepted
  // front therefore suffices.
  auto oriented = [&](std::size_t i, std::size_t c) {
    return dirs[c] == Direction::kMin ? points[i][c] : -points[i][c];
  };
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < dirs.size(); ++c) {
      const double va = oriented(a, c);
      const double vb = oriented(b, c);
      if (va != vb) return va < vb;
    }
    return a < b;
  });
  for (std::size_t i : order) {
    const bool beaten = std::any_of(front.members.begin(), front.members.end(), [&](std::size_t m) {
      return dominates(points[m], points[i], dirs);
    });
    if (beaten) {
      ++front.dominated_count;
    } else {
      front.members.push_back(i);
    }
  }
  std::sort(front.members.begin(), front.members.end());
  return front;
}

std::vector<Point> normalize_criteria(std::span<const Point> points,
                                      std::span<const Direction> dirs) {
  std::vector<Point> out(points.begin(), points.end());
  for (std::size_t c = 0; c < dirs.size(); ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : points) {
      lo = std::min(lo, p[c]);
      hi = std::max(hi, p[c]);
    }
    const double spread = hi - lo;
    for (auto& p : out) {
      if (!(spread > 0.0)) {
        p[c] = 0.0;
        continue;
      }
      const double v = (p[c] - lo) / spread;
      p[c] = dirs[c] == Direction::kMin ? v : 1.0 - v;
    }
  }
  return out;
}

std::string_view metric_name(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::kL1: return "L1";
    case DistanceMetric::kL2: return "L2";
    case DistanceMetric::kLinf: return "Linf";
    case DistanceMetric::kNadirPlane: return "nadir";
  }
  return "unknown";
}

std::optional<DistanceMetric> parse_metric(std::string_view name) {
  for (auto m : {DistanceMetric::kL1, DistanceMetric::kL2, DistanceMetric::kLinf,
                 DistanceMetric::kNadirPlane}) {
    if (metric_name(m) == name) return m;
  }
  return std::nullopt;
}

double lp_distance(std::span<const double> a, std::span<const double> b, DistanceMetric m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    switch (m) {
      case DistanceMetric::kL1: acc += d; break;
      case DistanceMetric::kLinf: acc = std::max(acc, d); break;
      default: acc += d * d; break;
    }
  }
  return m == DistanceMetric::kL2 || m == DistanceMetric::kNadirPlane ? std::sqrt(acc) : acc;
}

IdealPoint ideal_point(std::span<const Point> raw, std::span<const Point> normalized,
                       std::span<const std::size_t> front, std::span<const Direction> dirs) {
  IdealPoint ideal;
  if (front.empty()) return ideal;
  ideal.raw = raw[front[0]];
  ideal.normalized = normalized[front[0]];
  for (std::size_t m : front) {
    for (std::size_t c = 0; c < dirs.size(); ++c) {
      ideal.raw[c] = dirs[c] == Direction::kMin ? std::min(ideal.raw[c], raw[m][c])
                                                : std::max(ideal.raw[c], raw[m][c]);
      ideal.normalized[c] = std::min(ideal.normalized[c], normalized[m][c]);
    }
  }
  return ideal;
}

Point nadir_point(std::span<const Point> normalized, std::span<const std::size_t> front) {
  if (front.empty()) return {};
  Point nadir = normalized[front[0]];
  for (std::size_t m : front) {
    for (std::size_t c = 0; c < nadir.size(); ++c) nadir[c] = std::max(nadir[c], normalized[m][c]);
  }
  return nadir;
}

namespace {

template <typename Score>
std::optional<std::size_t> argmin_first(std::span<const std::size_t> front, Score score) {
  std::optional<std::size_t> best;
  double best_value = 0.0;
  for (std::size_t m : front) {
    const double v = score(m);
    if (!best || v < best_value || (v == best_value && m < *best)) {
      best = m;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

std::optional<std::size_t> select_ideal(std::span<const Point> normalized,
                                        std::span<const std::size_t> front,
                                        std::span<const double> ideal, DistanceMetric m) {
  if (m == DistanceMetric::kNadirPlane) return select_nadir_plane(normalized, front, ideal);
  return argmin_first(front, [&](std::size_t i) { return lp_distance(normalized[i], ideal, m); });
}

std::optional<std::size_t> select_nadir_plane(std::span<const Point> normalized,
                                              std::span<const std::size_t> front,
                                              std::span<const double> ideal) {
  const Point nadir = nadir_point(normalized, front);
  Point axis(ideal.size());
  double length = 0.0;
  for (std::size_t c = 0; c < ideal.size(); ++c) {
    axis[c] = nadir[c] - ideal[c];
    length += axis[c] * axis[c];
  }
  length = std::sqrt(length);
  if (!(length > 0.0)) return select_ideal(normalized, front, ideal, DistanceMetric::kL2);
  return argmin_first(front, [&](std::size_t i) {
    double t = 0.0;
    for (std::size_t c = 0; c < ideal.size(); ++c) t += (normalized[i][c] - ideal[c]) * axis[c];
    return std::abs(t / length);
  });
}

SelectionResult select_counterfactual(const std::vector<Candidate>& cands, const Scorer& score,
                                      DistanceMetric metric) {
  SelectionResult result;
  result.metric = metric;
  result.counts.all = cands.size();
  // Pool order is provenance order, so index ties below resolve by it.
  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return provenance_less(cands[a].source, cands[b].source);
  });
  for (std::size_t i : order) {
    const auto& c = cands[i];
    auto& per = result.per_explainer[c.source.explainer];
    ++per.all;
    if (!c.valid) continue;
    ++result.counts.valid;
    ++per.valid;
    if (!c.actionable) continue;
    ++result.counts.actionable;
    ++per.actionable;
    result.pool.push_back(c);
    result.criteria.push_back(score(i));
  }

  const auto& dirs = selection_directions();
  std::vector<Point> raw;
  raw.reserve(result.criteria.size());
  for (const auto& c : result.criteria) raw.push_back(c.selection());
  result.normalized = normalize_criteria(raw, dirs);
  result.front = pareto_front(raw, dirs).members;
  result.counts.front = result.front.size();
  for (std::size_t m : result.front) ++result.per_explainer[result.pool[m].source.explainer].front;
  if (result.front.empty()) return result;

  result.ideal = ideal_point(raw, result.normalized, result.front, dirs);
  result.chosen = select_ideal(result.normalized, result.front, result.ideal->normalized, metric);
  if (result.chosen) {
    result.counts.chosen = 1;
    result.per_explainer[result.pool[*result.chosen].source.explainer].chosen = 1;
  }
  return result;
}

namespace {

nlohmann::json criteria_json(const CriteriaVector& c) {
  nlohmann::json j = {{"proximity", c.proximity}, {"feasibility", c.feasibility}, {"dpow", c.dpow}};
  if (c.sparsity) j["sparsity"] = *c.sparsity;
  if (c.instability) j["instability"] = *c.instability;
  return j;
}

nlohmann::json counts_json(const SurvivalCounts& s) {
  return {{"all", s.all},
          {"valid", s.valid},
          {"actionable", s.actionable},
          {"front", s.front},
          {"chosen", s.chosen}};
}

}  // namespace

nlohmann::json to_json(const SelectionResult& result, const FeatureSchema& schema) {
  nlohmann::json j;
  j["metric"] = metric_name(result.metric);
  j["counts"] = counts_json(result.counts);
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [name, counts] : result.per_explainer) per[name] = counts_json(counts);
  j["per_explainer"] = per;
  nlohmann::json front = nlohmann::json::array();
  for (std::size_t m : result.front) {
    auto entry = criteria_json(result.criteria[m]);
    entry["explainer"] = result.pool[m].source.explainer;
    entry["restart"] = result.pool[m].source.restart;
    front.push_back(entry);
  }
  j["front"] = front;
  if (result.ideal) {
    j["ideal"] = {{"raw", result.ideal->raw}, {"normalized", result.ideal->normalized}};
  } else {
    j["ideal"] = nullptr;
  }
  if (const Candidate* c = result.chosen_candidate()) {
    nlohmann::json values = nlohmann::json::object();
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (schema[f].categorical()) {
        values[schema[f].name] = schema.format_value(f, c->x_prime[f]);
      } else {
        values[schema[f].name] = c->x_prime[f];
      }
    }
    j["chosen"] = {{"explainer", c->source.explainer},
                   {"restart", c->source.restart},
                   {"values", values},
                   {"criteria", criteria_json(*result.chosen_criteria())}};
  } else {
    j["chosen"] = nullptr;
  }
  return j;
}

}  // namespace cfx
