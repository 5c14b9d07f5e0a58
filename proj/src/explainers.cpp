#include "cfx/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "cfx/error.hpp"
#include "cfx/rng.hpp"

namespace cfx {

bool is_actionable(const Instance& x, const Instance& x_prime, const FeatureSchema& schema) {
  for (std::size_t f : schema.immutable_indices()) {
    if (x[f] != x_prime[f]) return false;
  }
  return true;
}

std::string_view explainer_name(ExplainerId id) {
  switch (id) {
    case ExplainerId::kNun: return "nun";
    case ExplainerId::kGrowingSpheres: return "growing_spheres";
    case ExplainerId::kWachter: return "wachter_lite";
    case ExplainerId::kCadex: return "cadex_lite";
    case ExplainerId::kDiverse: return "diverse_restarts";
  }
  return "unknown";
}

std::optional<ExplainerId> parse_explainer(std::string_view name) {
  for (ExplainerId id : kAllExplainers) {
    if (explainer_name(id) == name) return id;
  }
  return std::nullopt;
}

bool ExplainerConfig::enabled(ExplainerId id) const {
  switch (id) {
    case ExplainerId::kNun: return nun.enabled;
    case ExplainerId::kGrowingSpheres: return growing_spheres.enabled;
    case ExplainerId::kWachter: return wachter.enabled;
    case ExplainerId::kCadex: return cadex.enabled;
    case ExplainerId::kDiverse: return diverse.enabled;
  }
  return false;
}

void ExplainerConfig::set_enabled(ExplainerId id, bool on) {
  switch (id) {
    case ExplainerId::kNun: nun.enabled = on; break;
    case ExplainerId::kGrowingSpheres: growing_spheres.enabled = on; break;
    case ExplainerId::kWachter: wachter.enabled = on; break;
    case ExplainerId::kCadex: cadex.enabled = on; break;
    case ExplainerId::kDiverse: diverse.enabled = on; break;
  }
}

void ExplainerConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v < 1) throw ParameterError(std::string(what) + " must be >= 1");
  };
  positive(nun.k, "nun.k");
  positive(growing_spheres.restarts, "growing_spheres.restarts");
  positive(growing_spheres.samples_per_layer, "growing_spheres.samples_per_layer");
  positive(growing_spheres.max_samples, "growing_spheres.max_samples");
  positive(wachter.k, "wachter_lite.k");
  positive(wachter.max_steps, "wachter_lite.max_steps");
  positive(wachter.flip_every, "wachter_lite.flip_every");
  positive(cadex.max_cap, "cadex_lite.max_cap");
  positive(cadex.max_steps, "cadex_lite.max_steps");
  positive(diverse.restarts, "diverse_restarts.restarts");
  positive(diverse.max_steps, "diverse_restarts.max_steps");
  positive(diverse.flip_every, "diverse_restarts.flip_every");
  if (!(growing_spheres.initial_radius > 0.0)) {
    throw ParameterError("growing_spheres.initial_radius must be > 0");
  }
  for (double s : {wachter.step_size, cadex.step_size, diverse.step_size}) {
    if (!(s > 0.0)) throw ParameterError("step sizes must be > 0");
  }
}

ExplainContext::ExplainContext(const Dataset& data, const Model& model)
    : data_(&data), model_(&model), metric_(data.schema, data.ranges) {
  if (model.schema_fingerprint() != data.schema.fingerprint()) {
    throw ParameterError("model schema does not match dataset schema");
  }
  predictions_.resize(data.rows.size());
  for (std::size_t r = 0; r < data.rows.size(); ++r) predictions_[r] = model.predict(data.rows[r]);
}

int ExplainContext::desired_class(const Instance& x) const { return 1 - model_->predict(x); }

namespace {

// Features an explainer may edit, split by kind. Zero-width continuous
// features and single-category features are left alone.
struct EditableFeatures {
  std::vector<std::size_t> continuous;
  std::vector<std::size_t> categorical;

  explicit EditableFeatures(const Dataset& data) {
    for (std::size_t f = 0; f < data.schema.size(); ++f) {
      const auto& spec = data.schema[f];
      if (spec.immutable) continue;
      if (spec.categorical()) {
        if (spec.categories.size() > 1) categorical.push_back(f);
      } else if (!data.ranges.zero_width(f)) {
        continuous.push_back(f);
      }
    }
  }

  std::size_t size() const { return continuous.size() + categorical.size(); }
};

// Continuous edits stay inside the training range, widened to include x.
double clamp_to_range(const Dataset& data, const Instance& x, std::size_t f, double v) {
  const auto& r = data.ranges[f];
  return std::clamp(v, std::min(r.min, x[f]), std::max(r.max, x[f]));
}

Candidate make_candidate(Instance values, ExplainerId id, int restart, const Model& model) {
  values.id.reset();
  Candidate c;
  c.predicted = model.predict(values);
  c.x_prime = std::move(values);
  c.source = {std::string(explainer_name(id)), static_cast<int>(id), restart};
  return c;
}

// ------------------------------------------------------------------- nun

std::vector<Candidate> nearest_unlike(const Instance& x, const ExplainContext& ctx,
                                      const NunConfig& cfg) {
  const int target = ctx.desired_class(x);
  std::vector<std::size_t> pool;
  for (std::size_t r : ctx.data().train) {
    if (ctx.row_prediction(r) == target) pool.push_back(r);
  }
  std::vector<Candidate> out;
  if (pool.empty()) return out;
  const auto neighbors = nearest_rows(x, ctx.data().rows, pool, ctx.metric(),
                                      std::min(cfg.k, pool.size()));
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    out.push_back(make_candidate(ctx.data().rows[neighbors[i].row], ExplainerId::kNun,
                                 static_cast<int>(i), ctx.model()));
  }
  return out;
}

// ------------------------------------------------------- growing spheres

Instance sample_layer_point(const Instance& x, const ExplainContext& ctx,
                            const EditableFeatures& editable, double lo, double hi, Rng& rng) {
  const Dataset& data = ctx.data();
  Instance v = x;
  double radius = rng.uniform(lo, hi);
  const std::size_t m = editable.continuous.size();
  if (m > 0) {
    // Uniform in the spherical layer: radius^m uniform between lo^m and hi^m.
    const double dim = static_cast<double>(m);
    const double a = std::pow(lo, dim);
    const double b = std::pow(hi, dim);
    radius = std::pow(a + rng.uniform() * (b - a), 1.0 / dim);
    std::vector<double> dir(m);
    double norm = 0.0;
    for (double& d : dir) {
      d = rng.normal();
      norm += d * d;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t f = editable.continuous[i];
      const double step = radius * dir[i] / norm * data.ranges[f].width();
      v.values[f] = clamp_to_range(data, x, f, x[f] + step);
    }
  }
  // A category flip costs a full unit of HEOM, so flips get likelier only as
  // the layer moves outwards.
  const double flip_p = std::min(0.5, 0.25 * radius);
  for (std::size_t f : editable.categorical) {
    if (rng.uniform() >= flip_p) continue;
    const std::size_t n = data.schema[f].categories.size();
    const auto current = static_cast<std::size_t>(std::max(0.0, x[f]));
    std::size_t pick = rng.index(n - 1);
    if (pick >= current) ++pick;
    v.values[f] = static_cast<double>(pick);
  }
  return v;
}

struct LayerHit {
  std::optional<Instance> closest;
  double distance = 0.0;
};

LayerHit sample_layer(const Instance& x, const ExplainContext& ctx, const EditableFeatures& editable,
                      int target, double lo, double hi, std::size_t n, Rng& rng) {
  LayerHit hit;
  for (std::size_t i = 0; i < n; ++i) {
    Instance v = sample_layer_point(x, ctx, editable, lo, hi, rng);
    if (ctx.model().predict(v) != target) continue;
    const double d = ctx.metric()(x, v);
    if (!hit.closest || d < hit.distance) {
      hit.distance = d;
      hit.closest = std::move(v);
    }
  }
  return hit;
}

}  // namespace

GrowingSpheresRun growing_spheres_restart(const Instance& x, const ExplainContext& ctx,
                                          const GrowingSpheresConfig& cfg, std::uint64_t seed,
                                          int restart) {
  GrowingSpheresRun run;
  const EditableFeatures editable(ctx.data());
  if (editable.size() == 0) return run;
  const int target = ctx.desired_class(x);
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ExplainerId::kGrowingSpheres),
                   static_cast<std::uint64_t>(restart)));
  const std::size_t n = cfg.samples_per_layer;
  double best_distance = 0.0;

  auto budget_left = [&] { return run.samples_used + n <= cfg.max_samples; };
  auto offer = [&](LayerHit&& hit) {
    if (!hit.closest) return false;
    if (!run.best || hit.distance < best_distance) {
      best_distance = hit.distance;
      run.best = std::move(hit.closest);
      run.trace.push_back(best_distance);
    }
    return true;
  };

  // Shrink while the ball around x still contains enemies.
  double radius = cfg.initial_radius;
  bool found = false;
  for (std::size_t shrink = 0; shrink <= cfg.max_shrink && budget_left(); ++shrink) {
    run.samples_used += n;
    if (!offer(sample_layer(x, ctx, editable, target, 0.0, radius, n, rng))) break;
    found = true;
    radius /= 2.0;
  }
  // Then grow outwards layer by layer until an enemy shows up.
  const double step = radius;
  double lo = radius;
  while (budget_left()) {
    run.samples_used += n;
    const bool hit = offer(sample_layer(x, ctx, editable, target, lo, lo + step, n, rng));
    if (hit || found) break;
    lo += step;
  }
  if (!run.best) return run;

  // Feature selection: undo the smallest edits while the prediction holds.
  Instance best = *run.best;
  std::vector<std::pair<double, std::size_t>> changed;
  for (std::size_t f = 0; f < best.size(); ++f) {
    const double t = ctx.metric().term(f, x[f], best[f]);
    if (best[f] != x[f]) changed.emplace_back(t, f);
  }
  std::sort(changed.begin(), changed.end());
  for (const auto& [term, f] : changed) {
    const double kept = best.values[f];
    best.values[f] = x[f];
    if (ctx.model().predict(best) != target) best.values[f] = kept;
  }
  const double d = ctx.metric()(x, best);
  if (d < best_distance) {
    run.trace.push_back(d);
    run.best = std::move(best);
  }
  return run;
}

namespace {

std::vector<Candidate> growing_spheres(const Instance& x, const ExplainContext& ctx,
                                       const GrowingSpheresConfig& cfg, std::uint64_t seed) {
  std::vector<Candidate> out;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    auto run = growing_spheres_restart(x, ctx, cfg, seed, static_cast<int>(r));
    if (run.best) {
      out.push_back(make_candidate(std::move(*run.best), ExplainerId::kGrowingSpheres,
                                   static_cast<int>(r), ctx.model()));
    }
  }
  return out;
}

// ------------------------------------------------------ gradient search

// lambda * (p_target(v) - 1)^2 + HEOM(x, v) + mu * sum_j max(0, margin - HEOM(v, a_j))^2
// over the editable continuous features in range-scaled units, with periodic
// greedy categorical flips. Shared by wachter_lite and diverse_restarts.
class GradientSearch {
 public:
  struct Options {
    double lambda = 10.0;
    std::size_t max_steps = 500;
    double step_size = 0.05;
    std::size_t flip_every = 25;
    double diversity_weight = 0.0;
    double diversity_margin = 0.5;
    bool harvest = false;
  };

  GradientSearch(const Instance& x, const ExplainContext& ctx, const EditableFeatures& editable,
                 int target, Options opts, std::vector<Instance> anchors = {})
      : x_(x),
        ctx_(ctx),
        editable_(editable),
        target_(target),
        opts_(opts),
        anchors_(std::move(anchors)) {}

  double loss(const Instance& v) const { return loss(v, ctx_.model().probability(v, target_)); }

  // Runs from `start`; returns the final point. Valid iterates are collected
  // in harvested() when Options::harvest is set.
  Instance run(Instance v) {
    const auto& data = ctx_.data();
    const auto& metric = ctx_.metric();
    std::vector<double> proba;
    std::vector<double> g(data.schema.size(), 0.0);
    for (std::size_t step = 0; step < opts_.max_steps; ++step) {
      bool flipped = false;
      if (step % opts_.flip_every == 0) flipped = greedy_flips(v);

      const auto dp = ctx_.model().probability_gradient(v, target_, &proba);
      const double p = proba[static_cast<std::size_t>(target_)];
      const double h = metric(x_, v);
      std::vector<double> anchor_dist(anchors_.size());
      for (std::size_t j = 0; j < anchors_.size(); ++j) anchor_dist[j] = metric(v, anchors_[j]);

      double norm = 0.0;
      for (std::size_t f : editable_.continuous) {
        const double width = data.ranges[f].width();
        double gu = 2.0 * opts_.lambda * (p - 1.0) * dp[f] * width;
        const double d = (v[f] - x_[f]) / width;
        if (h > 0.0 && std::abs(d) < 1.0) gu += d / h;
        for (std::size_t j = 0; j < anchors_.size(); ++j) {
          const double dj = anchor_dist[j];
          const double dd = (v[f] - anchors_[j][f]) / width;
          if (dj > 0.0 && dj < opts_.diversity_margin && std::abs(dd) < 1.0) {
            gu += -2.0 * opts_.diversity_weight * (opts_.diversity_margin - dj) * dd / dj;
          }
        }
        g[f] = gu;
        norm += gu * gu;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-9 && !flipped && step > 0) break;
      // Step length never exceeds step_size in scaled units.
      const double scale = norm > 1.0 ? opts_.step_size / norm : opts_.step_size;
      for (std::size_t f : editable_.continuous) {
        const double width = data.ranges[f].width();
        v.values[f] = clamp_to_range(data, x_, f, v[f] - scale * g[f] * width);
      }
      if (opts_.harvest && ctx_.model().predict(v) == target_ &&
          (harvested_.empty() || !(harvested_.back() == v))) {
        harvested_.push_back(v);
      }
    }
    return v;
  }

  const std::vector<Instance>& harvested() const { return harvested_; }

 private:
  double loss(const Instance& v, double p) const {
    const auto& metric = ctx_.metric();
    double value = opts_.lambda * (p - 1.0) * (p - 1.0) + metric(x_, v);
    for (const auto& a : anchors_) {
      const double gap = opts_.diversity_margin - metric(v, a);
      if (gap > 0.0) value += opts_.diversity_weight * gap * gap;
    }
    return value;
  }

  // One coordinate-wise pass: each categorical feature takes the category
  // that lowers the loss most, if any does.
  bool greedy_flips(Instance& v) const {
    bool changed = false;
    double current = loss(v);
    for (std::size_t f : editable_.categorical) {
      const double original = v.values[f];
      double best_code = original;
      double best_loss = current;
      const auto n = ctx_.data().schema[f].categories.size();
      for (std::size_t c = 0; c < n; ++c) {
        const auto code = static_cast<double>(c);
        if (code == original) continue;
        v.values[f] = code;
        const double l = loss(v);
        if (l < best_loss - 1e-12) {
          best_loss = l;
          best_code = code;
        }
      }
      v.values[f] = best_code;
      if (best_code != original) {
        changed = true;
        current = best_loss;
      }
    }
    return changed;
  }

  const Instance& x_;
  const ExplainContext& ctx_;
  const EditableFeatures& editable_;
  int target_;
  Options opts_;
  std::vector<Instance> anchors_;
  std::vector<Instance> harvested_;
};

std::vector<Candidate> wachter_lite(const Instance& x, const ExplainContext& ctx,
                                    const WachterConfig& cfg, std::uint64_t seed) {
  std::vector<Candidate> out;
  const EditableFeatures editable(ctx.data());
  if (editable.size() == 0) return out;
  GradientSearch::Options opts;
  opts.lambda = cfg.lambda;
  opts.max_steps = cfg.max_steps;
  opts.step_size = cfg.step_size;
  opts.flip_every = cfg.flip_every;
  opts.harvest = true;
  GradientSearch search(x, ctx, editable, ctx.desired_class(x), opts);
  Instance final_point = search.run(x);

  // Extra candidates: valid points met along the way, sampled without
  // replacement and listed in the order they were found.
  std::vector<std::size_t> pool;
  const auto& harvested = search.harvested();
  for (std::size_t i = 0; i < harvested.size(); ++i) {
    if (!(harvested[i] == final_point)) pool.push_back(i);
  }
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ExplainerId::kWachter)));
  rng.shuffle(pool);
  pool.resize(std::min(pool.size(), cfg.k - 1));
  std::sort(pool.begin(), pool.end());

  out.push_back(make_candidate(std::move(final_point), ExplainerId::kWachter, 0, ctx.model()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    out.push_back(make_candidate(harvested[pool[i]], ExplainerId::kWachter,
                                 static_cast<int>(i + 1), ctx.model()));
  }
  return out;
}

std::vector<Candidate> diverse_restarts(const Instance& x, const ExplainContext& ctx,
                                        const DiverseConfig& cfg, std::uint64_t seed) {
  std::vector<Candidate> out;
  const EditableFeatures editable(ctx.data());
  if (editable.size() == 0) return out;
  const auto& data = ctx.data();
  const int target = ctx.desired_class(x);
  GradientSearch::Options opts;
  opts.lambda = cfg.lambda;
  opts.max_steps = cfg.max_steps;
  opts.step_size = cfg.step_size;
  opts.flip_every = cfg.flip_every;
  opts.diversity_weight = cfg.diversity_weight;
  opts.diversity_margin = cfg.diversity_margin;

  std::vector<Instance> found;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(ExplainerId::kDiverse), r));
    Instance start = x;
    for (std::size_t f : editable.continuous) {
      const double noise = cfg.init_noise * rng.normal() * data.ranges[f].width();
      start.values[f] = clamp_to_range(data, x, f, x[f] + noise);
    }
    for (std::size_t f : editable.categorical) {
      if (rng.uniform() < cfg.flip_probability) {
        start.values[f] = static_cast<double>(rng.index(data.schema[f].categories.size()));
      }
    }
    GradientSearch search(x, ctx, editable, target, opts, found);
    Instance result = search.run(std::move(start));
    Candidate c = make_candidate(std::move(result), ExplainerId::kDiverse, static_cast<int>(r),
                                 ctx.model());
    if (c.predicted == target) found.push_back(c.x_prime);
    out.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------------- cadex

std::vector<Candidate> cadex_lite(const Instance& x, const ExplainContext& ctx,
                                  const CadexConfig& cfg) {
  std::vector<Candidate> out;
  const EditableFeatures editable(ctx.data());
  if (editable.size() == 0) return out;
  const auto& data = ctx.data();
  const auto& model = ctx.model();
  const int target = ctx.desired_class(x);
  const double p0 = model.probability(x, target);

  struct Salient {
    std::size_t feature;
    double saliency;
    double best_code;  // categorical only
  };
  std::vector<Salient> ranked;
  constexpr double kFiniteStep = 1e-3;  // scaled units
  for (std::size_t f : editable.continuous) {
    const double h = kFiniteStep * data.ranges[f].width();
    Instance up = x;
    Instance down = x;
    up.values[f] += h;
    down.values[f] -= h;
    const double slope = (model.probability(up, target) - model.probability(down, target)) /
                         (2.0 * kFiniteStep);
    ranked.push_back({f, std::abs(slope), 0.0});
  }
  for (std::size_t f : editable.categorical) {
    Instance v = x;
    double best_gain = 0.0;
    double best_code = x[f];
    for (std::size_t c = 0; c < data.schema[f].categories.size(); ++c) {
      if (static_cast<double>(c) == x[f]) continue;
      v.values[f] = static_cast<double>(c);
      const double gain = model.probability(v, target) - p0;
      if (gain > best_gain) {
        best_gain = gain;
        best_code = static_cast<double>(c);
      }
    }
    ranked.push_back({f, best_gain, best_code});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Salient& a, const Salient& b) {
    return a.saliency > b.saliency || (a.saliency == b.saliency && a.feature < b.feature);
  });

  const std::size_t caps = std::min(cfg.max_cap, ranked.size());
  for (std::size_t cap = 1; cap <= caps; ++cap) {
    Instance v = x;
    std::vector<std::size_t> moving;
    for (std::size_t i = 0; i < cap; ++i) {
      const Salient& s = ranked[i];
      if (data.schema[s.feature].categorical()) {
        v.values[s.feature] = s.best_code;
      } else {
        moving.push_back(s.feature);
      }
    }
    for (std::size_t step = 0; step < cfg.max_steps && !moving.empty(); ++step) {
      std::vector<double> proba;
      const auto grad = model.probability_gradient(v, target, &proba);
      if (argmax(proba) == target) break;
      bool moved = false;
      for (std::size_t f : moving) {
        if (grad[f] == 0.0) continue;
        const double width = data.ranges[f].width();
        const double next =
            clamp_to_range(data, x, f, v[f] + (grad[f] > 0 ? 1.0 : -1.0) * cfg.step_size * width);
        moved = moved || next != v[f];
        v.values[f] = next;
      }
      if (!moved) break;
    }
    out.push_back(make_candidate(std::move(v), ExplainerId::kCadex, static_cast<int>(cap - 1),
                                 model));
  }
  return out;
}

}  // namespace

std::vector<Candidate> generate(ExplainerId id, const Instance& x, const ExplainContext& ctx,
                                const ExplainerConfig& cfg) {
  check_conforms(x, ctx.data().schema);
  switch (id) {
    case ExplainerId::kNun: return nearest_unlike(x, ctx, cfg.nun);
    case ExplainerId::kGrowingSpheres: return growing_spheres(x, ctx, cfg.growing_spheres, cfg.seed);
    case ExplainerId::kWachter: return wachter_lite(x, ctx, cfg.wachter, cfg.seed);
    case ExplainerId::kCadex: return cadex_lite(x, ctx, cfg.cadex);
    case ExplainerId::kDiverse: return diverse_restarts(x, ctx, cfg.diverse, cfg.seed);
  }
  return {};
}

void annotate(std::vector<Candidate>& candidates, const Instance& x, const FeatureSchema& schema,
              const Model& model, int desired_class) {
  for (auto& c : candidates) {
    c.predicted = model.predict(c.x_prime);
    c.valid = c.predicted == desired_class;
    c.actionable = is_actionable(x, c.x_prime, schema);
  }
}

std::array<std::vector<Candidate>, kAllExplainers.size()> generate_all(
    const Instance& x, const ExplainContext& ctx, const ExplainerConfig& cfg, EnsembleLog* log) {
  std::array<std::vector<Candidate>, kAllExplainers.size()> outputs;
  for (ExplainerId id : kAllExplainers) {
    if (!cfg.enabled(id)) continue;
    auto& produced = outputs[static_cast<std::size_t>(id)];
    try {
      produced = generate(id, x, ctx, cfg);
    } catch (const std::exception& e) {
      spdlog::warn("explainer {} failed: {}", explainer_name(id), e.what());
      if (log) log->failures.emplace_back(std::string(explainer_name(id)), e.what());
      continue;
    }
    if (produced.empty()) {
      spdlog::debug("explainer {} returned no candidates", explainer_name(id));
      if (log) log->empty.emplace_back(explainer_name(id));
    }
  }
  return outputs;
}

std::vector<Candidate> combine_candidates(
    const std::array<std::vector<Candidate>, kAllExplainers.size()>& outputs, const Instance& x,
    const ExplainContext& ctx, EnsembleLog* log) {
  std::vector<Candidate> unique;
  for (const auto& produced : outputs) {
    std::vector<const Candidate*> ordered;
    for (const auto& c : produced) ordered.push_back(&c);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Candidate* a, const Candidate* b) {
      return provenance_less(a->source, b->source);
    });
    for (const Candidate* c : ordered) {
      const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Candidate& u) {
        return u.x_prime == c->x_prime;
      });
      if (seen) {
        if (log) ++log->duplicates_removed;
        continue;
      }
      unique.push_back(*c);
    }
  }
  annotate(unique, x, ctx.data().schema, ctx.model(), ctx.desired_class(x));
  return unique;
}

std::vector<Candidate> run_ensemble(const Instance& x, const ExplainContext& ctx,
                                    const ExplainerConfig& cfg, EnsembleLog* log) {
  return combine_candidates(generate_all(x, ctx, cfg, log), x, ctx, log);
}

}  // namespace cfx
