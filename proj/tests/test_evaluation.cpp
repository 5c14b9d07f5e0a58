#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "cfx/error.hpp"
#include "cfx/evaluation.hpp"
#include "support.hpp"

using namespace cfx;

namespace {

CriteriaVector crit(double p, double f, double d, int s = 1, std::optional<double> inst = {}) {
  CriteriaVector c;
  c.proximity = p;
  c.feasibility = f;
  c.dpow = d;
  c.sparsity = s;
  c.instability = inst;
  return c;
}

SelectedRecord rec(std::size_t instance, std::string method, std::optional<CriteriaVector> c) {
  return {instance, std::move(method), c, c.has_value()};
}

// Mean over records of the per-record utility, with bounds over every covered record.
std::string enumerate_winner(const std::vector<SelectedRecord>& records, const WeightTriple& w) {
  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (const auto& r : records) {
    if (!r.criteria) continue;
    const double v[3] = {r.criteria->proximity, r.criteria->dpow, r.criteria->feasibility};
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], v[c]);
      hi[c] = std::max(hi[c], v[c]);
    }
  }
  auto norm = [&](int c, double v) { return hi[c] > lo[c] ? (v - lo[c]) / (hi[c] - lo[c]) : 0.0; };
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& r : records) {
    if (!r.criteria) continue;
    const double u = w.w_p * (1 - norm(0, r.criteria->proximity)) +
                     w.w_d * norm(1, r.criteria->dpow) +
                     w.w_f * (1 - norm(2, r.criteria->feasibility));
    sums[r.method].first += u;
    sums[r.method].second += 1;
  }
  std::string best;
  double best_u = -1e300;
  for (const auto& [name, s] : sums) {
    const double u = s.first / s.second;
    if (u > best_u + 1e-12) {
      best = name;
      best_u = u;
    }
  }
  return best;
}

struct Fixture {
  Dataset data;
  Model model;
};

const Fixture& mixed() {
  static const Fixture f = [] {
    Dataset d = testing::mixed_dataset(300, 23, 30);
    TrainConfig cfg;
    cfg.hidden = {16, 16};
    cfg.epochs = 15;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 16;
    cfg.seed = 2;
    Model m = train(d, cfg);
    return Fixture{std::move(d), std::move(m)};
  }();
  return f;
}

EvaluationConfig small_eval(std::size_t threads) {
  EvaluationConfig cfg;
  cfg.instances = 8;
  cfg.threads = threads;
  cfg.seed = 4;
  cfg.explainers.seed = 4;
  cfg.explainers.growing_spheres.restarts = 5;
  cfg.explainers.wachter.max_steps = 150;
  cfg.explainers.diverse.restarts = 5;
  cfg.explainers.diverse.max_steps = 80;
  return cfg;
}

const EvaluationReport& report() {
  static const EvaluationReport r = evaluate(mixed().data, mixed().model, small_eval(2));
  return r;
}

}  // namespace

// ---------------------------------------------------------------- ranking

TEST_CASE("rank table basics") {
  const std::vector<Direction> two_min = {Direction::kMin, Direction::kMin};
  CHECK(rank_table({{"a", "b"}, {{1, 1}, {2, 2}}, two_min}) == std::vector<double>{1.0, 2.0});
  CHECK(rank_table({{"a", "b", "c"}, {{5}, {5}, {5}}, {Direction::kMax}}) ==
        std::vector<double>{2.0, 2.0, 2.0});
  // Ties take the mean of their positions.
  CHECK(rank_table({{"a", "b", "c", "d"}, {{1}, {3}, {3}, {7}}, {Direction::kMin}}) ==
        std::vector<double>{1.0, 2.5, 2.5, 4.0});
  CHECK(rank_table({{"a", "b"}, {{0.2}, {0.9}}, {Direction::kMax}}) ==
        std::vector<double>{2.0, 1.0});
  CHECK_THROWS_AS(rank_table({{"a", "b"}, {{1, 2}, {1}}, two_min}), ParameterError);
  CHECK_THROWS_AS(rank_table({{"a"}, {{1, 2}, {1, 2}}, two_min}), ParameterError);
}

TEST_CASE("missing measures rank as the column worst") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto r = rank_table({{"a", "b", "c"}, {{1}, {nan}, {3}}, {Direction::kMin}});
  CHECK(r == std::vector<double>{1.0, 2.5, 2.5});
  const auto m = rank_table({{"a", "b", "c"}, {{0.5}, {nan}, {0.9}}, {Direction::kMax}});
  CHECK(m == std::vector<double>{2.5, 2.5, 1.0});
}

TEST_CASE("ranks are invariant under strictly monotone column transforms") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 10;
    MeasureMatrix m{std::vector<std::string>(n, "m"), {}, measure_directions()};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row;
      for (int c = 0; c < 7; ++c) row.push_back(std::floor(u(gen) * 5) / 4);
      m.values.push_back(row);
    }
    MeasureMatrix t = m;
    for (auto& row : t.values) {
      row[0] = std::exp(3 * row[0]);
      row[1] = row[1] * row[1] * row[1] + 2;
      row[2] = std::log1p(row[2]);
      row[4] = 10 * row[4] - 4;
    }
    CHECK(rank_table(m) == rank_table(t));
  }
}

TEST_CASE("published German measures put the Manhattan variant first") {
  const MeasureMatrix m{
      {"Dice", "FACE", "Cadex", "Fimap", "Wachter", "CEM", "CFProto", "GrowingSpheres",
       "ActionableRecourse", "random selection", "our approach (Manhattan)",
       "our approach (Euclidean)", "our approach (Chebyshev)"},
      {{1.69, 3.92, 0.44, 1.93, 4.15, 1.00, 1.00},
       {5.05, 1.91, 0.60, 8.12, 3.82, 1.00, 0.98},
       {1.38, 3.74, 0.41, 2.64, 3.87, 0.97, 0.97},
       {6.85, 3.01, 0.60, 9.91, 3.71, 0.97, 0.97},
       {11.67, 7.29, 0.64, 14.65, 5.91, 0.37, 0.37},
       {0.62, 4.18, 0.31, 2.15, 3.99, 0.13, 0.13},
       {3.56, 4.40, 0.48, 4.79, 4.53, 0.99, 0.91},
       {7.65, 5.79, 0.60, 10.73, 5.42, 1.00, 1.00},
       {1.01, 3.55, 0.44, 1.39, 3.60, 0.23, 0.23},
       {4.39, 3.95, 0.50, 6.28, 4.61, 1.00, 0.98},
       {3.83, 2.15, 0.85, 6.06, 3.50, 1.00, 1.00},
       {3.21, 2.46, 0.80, 4.99, 3.68, 1.00, 1.00},
       {2.90, 2.70, 0.74, 4.38, 3.71, 1.00, 1.00}},
      measure_directions()};
  const auto ranks = rank_table(m);
  const auto best = std::min_element(ranks.begin(), ranks.end()) - ranks.begin();
  CHECK(m.methods[static_cast<std::size_t>(best)] == "our approach (Manhattan)");
  CHECK(std::count(ranks.begin(), ranks.end(), ranks[static_cast<std::size_t>(best)]) == 1);
}

// --------------------------------------------------------------- survival

TEST_CASE("survival table") {
  SelectionResult a, b;
  a.counts = {10, 8, 6, 2, 1};
  a.per_explainer["x"] = {6, 5, 4, 2, 1};
  a.per_explainer["y"] = {4, 3, 2, 0, 0};
  b.counts = {4, 4, 2, 1, 1};
  b.per_explainer["x"] = {4, 4, 2, 1, 1};
  const auto rows = survival_table({a, b}, {"x", "y", "z"});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].explainer == "x");
  CHECK(rows[0].all == 5.0);
  CHECK(rows[0].ideal == 1.0);
  CHECK(rows[1].all == 2.0);
  CHECK(rows[1].ideal == 0.0);
  CHECK(rows[2].all == 0.0);
  CHECK(rows[3].explainer == "total");
  CHECK(rows[3].all == 7.0);
  CHECK(rows[3].front == 1.5);
  CHECK(rows[3].ideal == 1.0);

  const auto reduction = dominance_reduction({a, b});
  REQUIRE(reduction.has_value());
  CHECK(*reduction == doctest::Approx((1 - 2.0 / 6 + 1 - 1.0 / 2) / 2));
  SelectionResult empty;
  CHECK_FALSE(dominance_reduction({empty}).has_value());
}

// ------------------------------------------------------------------ sweep

TEST_CASE("barycentric grid") {
  CHECK(barycentric_grid(1).size() == 3);
  CHECK(barycentric_grid(2).size() == 6);
  CHECK(barycentric_grid(16).size() == 153);
  CHECK_THROWS_AS(barycentric_grid(0), ParameterError);
  for (int n : {1, 2, 5, 16}) {
    std::set<std::tuple<long, long, long>> seen;
    for (const auto& w : barycentric_grid(n)) {
      CHECK(w.w_p >= 0.0);
      CHECK(w.w_d >= 0.0);
      CHECK(w.w_f >= 0.0);
      CHECK(std::abs(w.w_p + w.w_d + w.w_f - 1.0) <= 1e-9);
      seen.emplace(std::lround(w.w_p * n), std::lround(w.w_d * n), std::lround(w.w_f * n));
    }
    CHECK(seen.size() == static_cast<std::size_t>((n + 1) * (n + 2) / 2));
  }
  const auto g = barycentric_grid(1);
  CHECK(g[0].w_p == 1.0);
  CHECK(g[1].w_d == 1.0);
  CHECK(g[2].w_f == 1.0);
}

TEST_CASE("utility corners") {
  const std::vector<CriteriaVector> sel = {crit(0.2, 0.5, 0.3), crit(0.6, 0.1, 0.9)};
  const UtilityBounds b = fit_bounds(sel);
  CHECK(b.proximity.min == 0.2);
  CHECK(b.proximity.max == 0.6);
  CHECK(utility(sel[0], {1, 0, 0}, b) == 1.0);
  CHECK(utility(sel[1], {1, 0, 0}, b) == 0.0);
  CHECK(utility(sel[1], {0, 1, 0}, b) == 1.0);
  CHECK(utility(sel[1], {0, 0, 1}, b) == 1.0);
  CHECK(utility(sel[0], {0, 0, 1}, b) == 0.0);
  // Zero spread normalizes to 0.
  const UtilityBounds flat = fit_bounds({crit(1, 1, 1)});
  CHECK(utility(crit(1, 1, 1), {0.5, 0.5, 0}, flat) == 0.5);
}

TEST_CASE("a method dominating on all three criteria wins every triple") {
  std::vector<SelectedRecord> records;
  for (std::size_t q = 0; q < 5; ++q) {
    records.push_back(rec(q, "best", crit(0.1, 0.1, 0.9)));
    records.push_back(rec(q, "other", crit(0.3 + 0.01 * q, 0.4, 0.5)));
    records.push_back(rec(q, "none", std::nullopt));
  }
  for (const auto& p : sweep(records, 16)) CHECK(p.winner == "best");
  CHECK_THROWS_AS(sweep({rec(0, "none", std::nullopt)}, 4), ParameterError);
}

TEST_CASE("crossing trade-off flips the winner on the analytic boundary") {
  // A: prox 0.2, dpow 0.5; B: prox 0.8, dpow 0.9; C: prox 1.0, dpow 0.3.
  // Bounds prox [0.2, 1], dpow [0.3, 0.9], feasibility flat.
  // U_A = w_p + w_d / 3 + w_f, U_B = w_p / 4 + w_d + w_f, U_C = w_f.
  // B wins where w_d > 9 w_p / 8.
  const std::vector<SelectedRecord> records = {rec(0, "A", crit(0.2, 0.5, 0.5)),
                                               rec(0, "B", crit(0.8, 0.5, 0.9)),
                                               rec(0, "C", crit(1.0, 0.5, 0.3))};
  std::size_t checked = 0;
  for (const auto& p : sweep(records, 16)) {
    const double margin = p.weights.w_d - 9.0 * p.weights.w_p / 8.0;
    if (std::abs(margin) < 1e-9) continue;
    CHECK(p.winner == (margin > 0 ? "B" : "A"));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("sweep winners match direct enumeration") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<SelectedRecord> records;
    for (std::size_t q = 0; q < 6; ++q) {
      for (std::string m : {"m1", "m2", "m3"}) {
        if (u(gen) < 0.15) {
          records.push_back(rec(q, m, std::nullopt));
        } else {
          records.push_back(rec(q, m, crit(u(gen), u(gen), u(gen))));
        }
      }
    }
    const auto points = sweep(records, 6);
    REQUIRE(points.size() == 28);
    for (const auto& p : points) CHECK(p.winner == enumerate_winner(records, p.weights));
    const auto mid = sweep(records, 3);
    CHECK(mid[4].weights.w_p == doctest::Approx(1.0 / 3));
    CHECK(mid[4].weights.w_d == doctest::Approx(1.0 / 3));
    CHECK(mid[4].winner == enumerate_winner(records, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
  }
}

TEST_CASE("sweep ties go to the smaller method name") {
  const std::vector<SelectedRecord> records = {rec(0, "zeta", crit(0.5, 0.5, 0.5)),
                                               rec(0, "alpha", crit(0.5, 0.5, 0.5))};
  for (const auto& p : sweep(records, 4)) CHECK(p.winner == "alpha");
}

// ---------------------------------------------------------------- reports

TEST_CASE("report files round-trip") {
  testing::TempDir dir("reports");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MetricsTable table;
  table.methods = {"nun", "ideal_L1"};
  SummaryRow a;
  a.proximity = 0.1 + 0.2;
  a.feasibility = 1.0 / 3;
  a.dpow = 0.6;
  a.sparsity = 2.5;
  a.instability = 0.05;
  a.coverage = 1.0;
  a.actionability = 0.9;
  a.queries = 10;
  a.covered = 10;
  a.instability_missing = 1;
  SummaryRow b;
  b.proximity = b.feasibility = b.dpow = b.sparsity = b.instability = nan;
  b.queries = 10;
  table.rows = {a, b};
  table.ranks = {1.25, 1.75};
  write_metrics_csv(dir / "m.csv", table);
  const MetricsTable back = read_metrics_csv(dir / "m.csv");
  CHECK(back.methods == table.methods);
  CHECK(back.ranks == table.ranks);
  CHECK(back.rows[0].proximity == a.proximity);
  CHECK(back.rows[0].feasibility == a.feasibility);
  CHECK(back.rows[0].instability_missing == 1);
  CHECK(std::isnan(back.rows[1].proximity));
  CHECK(back.rows[1].covered == 0);

  const std::vector<SurvivalRow> surv = {{"nun", 10, 9, 8, 2.5, 0.25}, {"total", 70, 60, 50, 8, 1}};
  write_survival_csv(dir / "s.csv", surv);
  const auto sback = read_survival_csv(dir / "s.csv");
  REQUIRE(sback.size() == 2);
  CHECK(sback[0].explainer == "nun");
  CHECK(sback[0].front == 2.5);
  CHECK(sback[1].ideal == 1.0);

  const std::vector<SelectedRecord> sel = {rec(3, "nun", crit(0.1, 0.2, 0.3, 2, 0.7)),
                                           rec(3, "random", std::nullopt),
                                           rec(4, "nun", crit(1.0 / 7, 2, 1, 0))};
  write_selected_csv(dir / "sel.csv", sel);
  const auto selback = read_selected_csv(dir / "sel.csv");
  REQUIRE(selback.size() == 3);
  CHECK(selback[0].criteria->instability == 0.7);
  CHECK_FALSE(selback[1].criteria.has_value());
  CHECK(selback[2].criteria->proximity == 1.0 / 7);
  CHECK_FALSE(selback[2].criteria->instability.has_value());
  CHECK(selback[2].instance == 4);

  const auto points = sweep(sel, 16);
  write_sweep_csv(dir / "w.csv", points);
  const auto wback = read_sweep_csv(dir / "w.csv");
  REQUIRE(wback.size() == barycentric_grid(16).size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(wback[i].winner == points[i].winner);
    CHECK(wback[i].utility == points[i].utility);
    CHECK(wback[i].weights.w_p == points[i].weights.w_p);
  }
  CHECK(testing::read_text(dir / "w.csv").rfind("w_p,w_d,w_f,winner", 0) == 0);

  CHECK_THROWS_AS(read_metrics_csv(dir / "missing.csv"), LoadError);
  testing::write_text(dir / "bad.csv", "method,prox\nx,1\n");
  CHECK_THROWS_AS(read_metrics_csv(dir / "bad.csv"), LoadError);
}

TEST_CASE("config hash changes iff the config changes") {
  const nlohmann::json a = {{"seed", 1}, {"metric", "L1"}, {"k", 5}};
  const nlohmann::json same = {{"k", 5}, {"metric", "L1"}, {"seed", 1}};
  nlohmann::json other = a;
  other["seed"] = 2;
  CHECK(config_hash(a) == config_hash(same));
  CHECK(config_hash(a) != config_hash(other));
}

TEST_CASE("criterion leaders") {
  MetricsTable t;
  t.methods = {"b", "a", "c", "d"};
  SummaryRow r1, r2, r3, r4;
  r1.proximity = 0.2, r1.dpow = 0.9, r1.feasibility = 0.5, r1.covered = 3;
  r2.proximity = 0.2, r2.dpow = 0.5, r2.feasibility = 0.1, r2.covered = 3;
  r3.proximity = 0.5, r3.dpow = 0.9, r3.feasibility = 0.4, r3.covered = 3;
  r4.proximity = 0.0, r4.dpow = 1.0, r4.feasibility = 0.0, r4.covered = 0;
  t.rows = {r1, r2, r3, r4};
  const auto leaders = criterion_leaders(t);
  CHECK(leaders[0] == "a");
  CHECK(leaders[1] == "b");
  CHECK(leaders[2] == "a");
}

// --------------------------------------------------------------- harness

TEST_CASE("evaluation harness produces the nine method rows") {
  const EvaluationReport& r = report();
  CHECK(r.methods == std::vector<std::string>{"nun", "growing_spheres", "wachter_lite",
                                              "cadex_lite", "diverse_restarts", "random",
                                              "ideal_L1", "ideal_L2", "ideal_Linf"});
  CHECK(r.summary.size() == 9);
  CHECK(r.ranks.size() == 9);
  CHECK(r.instances.size() == 8);
  CHECK(r.selections.size() == 8);
  CHECK(r.selected.size() == 9 * 8);
  for (const auto& s : r.summary) {
    CHECK(s.queries == 8);
    CHECK(s.coverage >= 0.0);
    CHECK(s.coverage <= 1.0);
    CHECK(s.actionability <= s.coverage);
  }
  const auto ranks = rank_table(measure_matrix(r.methods, r.summary));
  CHECK(ranks == r.ranks);
}

TEST_CASE("ideal selections are valid, actionable and non-dominated") {
  const auto& [data, model] = mixed();
  const EvaluationReport& r = report();
  for (const auto& sel : r.selections) {
    CHECK(sel.counts.all >= sel.counts.valid);
    CHECK(sel.counts.valid >= sel.counts.actionable);
    CHECK(sel.counts.actionable >= sel.counts.front);
    CHECK(sel.counts.front >= sel.counts.chosen);
    if (!sel.chosen) continue;
    const Candidate& c = *sel.chosen_candidate();
    CHECK(c.valid);
    CHECK(c.actionable);
    const auto mine = sel.chosen_criteria()->selection();
    for (const auto& v : sel.criteria) {
      CHECK_FALSE(dominates(v.selection(), mine, selection_directions()));
    }
  }
  // Every ideal_* and random record with criteria is actionable.
  for (const auto& s : r.selected) {
    if (s.method.rfind("ideal_", 0) == 0 || s.method == "random") {
      if (s.criteria) CHECK(s.actionable);
    }
  }
  (void)data;
  (void)model;
}

TEST_CASE("survival rows are monotone and the ideal column sums to coverage") {
  const EvaluationReport& r = report();
  REQUIRE(r.survival.size() == 6);
  double ideal_sum = 0.0;
  for (const auto& row : r.survival) {
    CHECK(row.all >= row.valid);
    CHECK(row.valid >= row.actionable);
    CHECK(row.actionable >= row.front);
    if (row.explainer != "total") ideal_sum += row.ideal;
  }
  const auto l1 = std::find(r.methods.begin(), r.methods.end(), "ideal_L1") - r.methods.begin();
  const double coverage = r.summary[static_cast<std::size_t>(l1)].coverage;
  CHECK(ideal_sum == doctest::Approx(coverage));
  CHECK(r.survival.back().ideal == doctest::Approx(coverage));
}

TEST_CASE("evaluation is identical across thread counts and reports are byte-stable") {
  const EvaluationReport one = evaluate(mixed().data, mixed().model, small_eval(1));
  testing::TempDir a("eval_a"), b("eval_b");
  emit_reports(a.path(), one);
  emit_reports(b.path(), report());
  for (const char* name : {"metrics_mixed.csv", "survival_mixed.csv", "selected_mixed.csv"}) {
    CHECK(testing::read_text(a / name) == testing::read_text(b / name));
  }
  const MetricsTable back = read_metrics_csv(a / "metrics_mixed.csv");
  CHECK(back.methods == one.methods);
  CHECK(back.ranks == one.ranks);

  const nlohmann::json manifest = make_manifest(one, small_eval(1), {{"seed", 4}});
  CHECK(manifest.at("neighbor_k") == 5);
  CHECK(manifest.at("dataset") == "mixed");
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("sweep corners agree with the metrics table leaders") {
  const EvaluationReport& r = report();
  const auto points = sweep(r.selected, 16);
  const auto leaders = criterion_leaders({r.methods, r.summary, r.ranks});
  for (const auto& p : points) {
    if (p.weights.w_p == 1.0) CHECK(p.winner == leaders[0]);
    if (p.weights.w_d == 1.0) CHECK(p.winner == leaders[1]);
    if (p.weights.w_f == 1.0) CHECK(p.winner == leaders[2]);
  }
}
