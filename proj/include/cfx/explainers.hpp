#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/candidate.hpp"
#include "cfx/dataset.hpp"
#include "cfx/heom.hpp"
#include "cfx/model.hpp"

namespace cfx {

enum class ExplainerId { kNun = 0, kGrowingSpheres, kWachter, kCadex, kDiverse };

inline constexpr std::array<ExplainerId, 5> kAllExplainers = {
    ExplainerId::kNun, ExplainerId::kGrowingSpheres, ExplainerId::kWachter, ExplainerId::kCadex,
    ExplainerId::kDiverse};

std::string_view explainer_name(ExplainerId id);
std::optional<ExplainerId> parse_explainer(std::string_view name);

// Nearest unlike neighbours: instance-based, returns training rows.
struct NunConfig {
  bool enabled = true;
  std::size_t k = 10;
};

// Random search in expanding HEOM layers around x, one candidate per restart.
struct GrowingSpheresConfig {
  bool enabled = true;
  std::size_t restarts = 20;
  std::size_t samples_per_layer = 200;
  std::size_t max_samples = 2000;  // per restart
  double initial_radius = 0.5;     // in range-scaled units
  std::size_t max_shrink = 12;
};

// Gradient descent on lambda * (p_target - 1)^2 + HEOM(x, x').
struct WachterConfig {
  bool enabled = true;
  std::size_t k = 10;  // final point plus k-1 sampled valid iterates
  double lambda = 10.0;
  std::size_t max_steps = 500;
  double step_size = 0.05;
  std::size_t flip_every = 25;  // categorical greedy pass period, in steps
};

// Greedy saliency-ordered edits with a cap on the number of changed features.
struct CadexConfig {
  bool enabled = true;
  std::size_t max_cap = 14;  // caps 1..max_cap
  std::size_t max_steps = 200;
  double step_size = 0.05;
};

// Randomized restarts of the gradient search, pushed away from earlier results.
struct DiverseConfig {
  bool enabled = true;
  std::size_t restarts = 20;
  double lambda = 10.0;
  std::size_t max_steps = 200;
  double step_size = 0.05;
  std::size_t flip_every = 25;
  double diversity_weight = 1.0;
  double diversity_margin = 0.5;
  double init_noise = 0.1;
  double flip_probability = 0.1;
};

struct ExplainerConfig {
  NunConfig nun;
  GrowingSpheresConfig growing_spheres;
  WachterConfig wachter;
  CadexConfig cadex;
  DiverseConfig diverse;
  std::uint64_t seed = 0;

  bool enabled(ExplainerId id) const;
  void set_enabled(ExplainerId id, bool on);
  // Throws ParameterError on k < 1 or zero budgets.
  void validate() const;
};

// Shared, read-only state for explaining queries against one dataset and
// model: the HEOM metric and the model's prediction for every dataset row.
class ExplainContext {
 public:
  // Throws ParameterError when the model was not built for data's schema.
  ExplainContext(const Dataset& data, const Model& model);

  const Dataset& data() const { return *data_; }
  const Model& model() const { return *model_; }
  const Heom& metric() const { return metric_; }
  int row_prediction(std::size_t row) const { return predictions_[row]; }

  // For binary tasks, the class other than predict(x).
  int desired_class(const Instance& x) const;

 private:
  const Dataset* data_;
  const Model* model_;
  Heom metric_;
  std::vector<int> predictions_;
};

// Runs one explainer. Candidates carry predicted classes but are not yet
// checked for validity or actionability. Deterministic for a given config;
// seeds never depend on the query's row id.
std::vector<Candidate> generate(ExplainerId id, const Instance& x, const ExplainContext& ctx,
                                const ExplainerConfig& cfg);

struct GrowingSpheresRun {
  std::optional<Instance> best;
  // HEOM distance of each successive improvement; strictly decreasing.
  std::vector<double> trace;
  std::size_t samples_used = 0;
};

GrowingSpheresRun growing_spheres_restart(const Instance& x, const ExplainContext& ctx,
                                          const GrowingSpheresConfig& cfg, std::uint64_t seed,
                                          int restart);

struct EnsembleLog {
  // Explainers that threw, with the message; they contribute no candidates.
  std::vector<std::pair<std::string, std::string>> failures;
  // Explainers that returned nothing.
  std::vector<std::string> empty;
  std::size_t duplicates_removed = 0;
};

// Fills predicted/valid/actionable for every candidate.
void annotate(std::vector<Candidate>& candidates, const Instance& x, const FeatureSchema& schema,
              const Model& model, int desired_class);

// All enabled explainers in ExplainerId order, restarts ascending, exact
// duplicates (same feature values) dropped after their first occurrence, and
// every candidate annotated against desired_class(x).
std::vector<Candidate> run_ensemble(const Instance& x, const ExplainContext& ctx,
                                    const ExplainerConfig& cfg, EnsembleLog* log = nullptr);

// Output of every enabled explainer, indexed by ExplainerId. Failures are
// logged and leave that slot empty.
std::array<std::vector<Candidate>, kAllExplainers.size()> generate_all(
    const Instance& x, const ExplainContext& ctx, const ExplainerConfig& cfg,
    EnsembleLog* log = nullptr);

// The ensemble step of run_ensemble over precomputed explainer outputs.
std::vector<Candidate> combine_candidates(
    const std::array<std::vector<Candidate>, kAllExplainers.size()>& outputs, const Instance& x,
    const ExplainContext& ctx, EnsembleLog* log = nullptr);

}  // namespace cfx
