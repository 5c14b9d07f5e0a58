#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfx/dataset.hpp"
#include "cfx/explainers.hpp"
#include "cfx/mcda.hpp"
#include "cfx/metrics.hpp"
#include "cfx/model.hpp"

namespace cfx {

// ---------------------------------------------------------------- ranking

// Column order of the metrics table.
inline const std::vector<std::string>& measure_names() {
  static const std::vector<std::string> names = {"prox",   "feas",  "dpow", "spars",
                                                 "instab", "cover", "act"};
  return names;
}

inline const std::vector<Direction>& measure_directions() {
  static const std::vector<Direction> dirs = {Direction::kMin, Direction::kMin, Direction::kMax,
                                              Direction::kMin, Direction::kMin, Direction::kMax,
                                              Direction::kMax};
  return dirs;
}

struct MeasureMatrix {
  std::vector<std::string> methods;
  std::vector<std::vector<double>> values;  // one row per method
  std::vector<Direction> directions;
};

// Average rank per method. Each column is ranked direction-aware, ties take
// the mean of their rank positions, and NaN cells are first replaced by the
// column's worst value. Throws ParameterError on ragged input.
std::vector<double> rank_table(const MeasureMatrix& m);

// --------------------------------------------------------------- survival

struct SurvivalRow {
  std::string explainer;
  double all = 0.0;
  double valid = 0.0;
  double actionable = 0.0;
  double front = 0.0;
  double ideal = 0.0;  // fraction of queries whose selection came from here
};

// Per-explainer means over queries, one row per name in `explainers` in that
// order, followed by a "total" row over the whole ensemble.
std::vector<SurvivalRow> survival_table(const std::vector<SelectionResult>& results,
                                        const std::vector<std::string>& explainers);

// Mean of 1 - front/actionable over queries with at least one valid and
// actionable candidate; nullopt when there are none.
std::optional<double> dominance_reduction(const std::vector<SelectionResult>& results);

// ------------------------------------------------------------------ sweep

struct WeightTriple {
  double w_p = 0.0;  // proximity
  double w_d = 0.0;  // discriminative power
  double w_f = 0.0;  // feasibility
};

// All (i/n, j/n, k/n) with i + j + k = n: (n + 1)(n + 2) / 2 triples,
// w_p descending then w_d descending. Throws ParameterError for n < 1.
std::vector<WeightTriple> barycentric_grid(int n);

struct UtilityBounds {
  ValueRange proximity{0.0, 0.0};
  ValueRange dpow{0.0, 0.0};
  ValueRange feasibility{0.0, 0.0};
};

UtilityBounds fit_bounds(const std::vector<CriteriaVector>& selected);

// U = w_p (1 - prox') + w_d dpow' + w_f (1 - feas'), primes denoting min-max
// normalization under `bounds` (0 on zero spread). Higher is better.
double utility(const CriteriaVector& c, const WeightTriple& w, const UtilityBounds& bounds);

// One method's selected counterfactual for one query.
struct SelectedRecord {
  std::size_t instance = 0;  // dataset row
  std::string method;
  std::optional<CriteriaVector> criteria;
  bool actionable = false;
};

struct SweepPoint {
  WeightTriple weights;
  std::string winner;
  double utility = 0.0;
};

// For every grid triple, the method with the highest mean utility over its
// covered queries; ties go to the lexicographically smaller method name.
// Throws ParameterError when no method has a covered query.
std::vector<SweepPoint> sweep(const std::vector<SelectedRecord>& records, int n);

// --------------------------------------------------------------- harness

struct EvaluationConfig {
  ExplainerConfig explainers;
  std::size_t neighbor_k = kDefaultNeighborK;
  std::size_t instances = 30;  // first n rows of the test split; 0 = all
  std::vector<DistanceMetric> metrics = {DistanceMetric::kL1, DistanceMetric::kL2,
                                         DistanceMetric::kLinf};
  DistanceMetric survival_metric = DistanceMetric::kL1;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

inline constexpr std::string_view kRandomMethod = "random";
std::string ideal_method_name(DistanceMetric m);  // "ideal_L1", ...

struct EvaluationReport {
  std::string dataset;
  std::vector<std::string> methods;
  std::vector<SummaryRow> summary;  // aligned with methods
  std::vector<double> ranks;        // aligned with methods
  std::vector<SelectedRecord> selected;
  std::vector<std::size_t> instances;     // dataset rows evaluated
  std::vector<SelectionResult> selections;  // survival_metric, one per instance
  std::vector<SurvivalRow> survival;
  std::optional<double> reduction;
  std::vector<std::size_t> misses;  // rows where the ensemble found nothing usable
};

EvaluationReport evaluate(const Dataset& data, const Model& model, const EvaluationConfig& cfg);

MeasureMatrix measure_matrix(const std::vector<std::string>& methods,
                             const std::vector<SummaryRow>& summary);

// ---------------------------------------------------------------- reports

struct MetricsTable {
  std::vector<std::string> methods;
  std::vector<SummaryRow> rows;
  std::vector<double> ranks;
};

void write_metrics_csv(const std::filesystem::path& path, const MetricsTable& table);
MetricsTable read_metrics_csv(const std::filesystem::path& path);

void write_survival_csv(const std::filesystem::path& path, const std::vector<SurvivalRow>& rows);
std::vector<SurvivalRow> read_survival_csv(const std::filesystem::path& path);

void write_selected_csv(const std::filesystem::path& path,
                        const std::vector<SelectedRecord>& records);
std::vector<SelectedRecord> read_selected_csv(const std::filesystem::path& path);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points);
std::vector<SweepPoint> read_sweep_csv(const std::filesystem::path& path);

// FNV-1a of the canonical (sorted-key, compact) dump.
std::uint64_t config_hash(const nlohmann::json& config);

nlohmann::json make_manifest(const EvaluationReport& report, const EvaluationConfig& cfg,
                             const nlohmann::json& run_config);

// Writes metrics_, survival_ and selected_<dataset>.csv into dir.
void emit_reports(const std::filesystem::path& dir, const EvaluationReport& report);

// Per-criterion best methods of a metrics table: (prox, dpow, feas) order,
// matching the sweep corners (1,0,0), (0,1,0), (0,0,1). Ties go to the
// lexicographically smaller name.
std::array<std::string, 3> criterion_leaders(const MetricsTable& table);

}  // namespace cfx
