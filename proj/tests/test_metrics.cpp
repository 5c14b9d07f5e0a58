#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "cfx/candidate_io.hpp"
#include "cfx/error.hpp"
#include "cfx/explainers.hpp"
#include "cfx/metrics.hpp"
#include "support.hpp"

using namespace cfx;
using testing::categorical;
using testing::continuous;
using testing::inst;

namespace {

struct Fixture {
  Dataset data;
  Model model;
};

const Fixture& mixed() {
  static const Fixture f = [] {
    Dataset d = testing::mixed_dataset(300, 17, 30);
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

// Dataset over one continuous feature with declared range [0, 10].
Dataset line(std::vector<double> values, std::vector<int> labels) {
  FeatureSchema s({continuous("v")});
  s.set_range(0, {0, 10});
  std::vector<Instance> rows;
  for (double v : values) rows.push_back(inst({v}));
  return make_dataset("line", s, rows, labels, {"a", "b"}, 0, 1);
}

// Model over one continuous feature in [0, 10] predicting class 1 iff v > threshold.
Model threshold_model(const Dataset& d, double threshold) {
  Encoder enc(d.schema, d.ranges);
  DenseLayer first{1, 16, std::vector<double>(16), std::vector<double>(16)};
  first.weights[0] = 1.0;  // scaled v in [0, 1]
  DenseLayer second{16, 16, std::vector<double>(256), std::vector<double>(16)};
  second.weights[0] = 1.0;
  DenseLayer out{16, 2, std::vector<double>(32), std::vector<double>(2)};
  out.weights[16] = 1000.0;
  out.bias[1] = -1000.0 * threshold / 10.0;
  return Model(enc, {first, second, out}, d.class_names, d.schema.fingerprint());
}

double mean_smallest(std::vector<double> d, std::size_t k) {
  std::sort(d.begin(), d.end());
  double s = 0;
  for (std::size_t i = 0; i < k; ++i) s += d[i];
  return s / static_cast<double>(k);
}

}  // namespace

TEST_CASE("proximity") {
  FeatureSchema s({continuous("a"), categorical("c", {"p", "q"})});
  s.set_range(0, {0, 4});
  const Heom metric(s, RangeTable::from_schema(s));
  CHECK(proximity(inst({1, 0}), inst({1, 0}), metric) == 0.0);
  CHECK(proximity(inst({1, 0}), inst({1, 1}), metric) == 1.0);
  CHECK(proximity(inst({1, 0}), inst({3, 0}), metric) == 0.5);
}

TEST_CASE("toy selected counterfactual: proximity 0.173 and sparsity 1") {
  const CandidateSet set =
      read_candidates_jsonl(testing::fixture_dir() / "toy_adult" / "candidates.jsonl");
  const FeatureSchema& s = set.schema.schema;
  const Heom metric(s, RangeTable::from_schema(s));
  const std::size_t gain = s.require_index("capital.gain");
  const Candidate* chosen = nullptr;
  for (const auto& c : set.candidates) {
    if (c.x_prime[gain] == 17327.0 && sparsity(set.x, c.x_prime, s) == 1) chosen = &c;
  }
  REQUIRE(chosen != nullptr);
  CHECK(set.x[gain] == 0.0);
  CHECK(std::round(proximity(set.x, chosen->x_prime, metric) * 1000) / 1000 == 0.173);
  CHECK(sparsity(set.x, chosen->x_prime, s) == 1);
}

TEST_CASE("sparsity") {
  FeatureSchema s({continuous("a"), continuous("b"), categorical("c", {"p", "q"})});
  CHECK(sparsity(inst({1, 2, 0}), inst({1, 2, 0}), s) == 0);
  CHECK(sparsity(inst({1, 2, 0}), inst({5, 7, 1}), s) == 3);
  CHECK(sparsity(inst({1, 2, 0}), inst({1 + 1e-12, 2, 0}), s) == 0);
  CHECK(sparsity(inst({1, 2, 0}), inst({1 + 1e-6, 2, 0}), s) == 1);
  CHECK(sparsity(inst({1, 2, 0}), inst({1, 2, kUnknownCategory}), s) == 1);
}

TEST_CASE("feasibility") {
  const Dataset d = line({1, 2, 7}, {0, 0, 1});
  CHECK(feasibility(inst({7}), d, 1) == 0.0);
  // k = 2 on a 3-row set: mean of the two smallest brute-force distances.
  const Instance q = inst({3.3});
  std::vector<double> all;
  for (const auto& r : d.rows) all.push_back(testing::heom_oracle(q, r, d.schema, d.ranges));
  CHECK(feasibility(q, d, 2) == doctest::Approx(mean_smallest(all, 2)).epsilon(1e-14));
  CHECK_THROWS_AS(feasibility(q, d, 4), ParameterError);
  CHECK_THROWS_AS(feasibility(q, d, 0), ParameterError);
}

TEST_CASE("feasibility is non-decreasing in k and zero only on duplicates") {
  const auto& [data, model] = mixed();
  std::mt19937_64 gen(8);
  for (int i = 0; i < 50; ++i) {
    const Instance& q = data.rows[data.test[gen() % data.test.size()]];
    double prev = 0.0;
    for (std::size_t k = 1; k <= 12; ++k) {
      const double f = feasibility(q, data, k);
      CHECK(f >= prev);
      prev = f;
    }
    CHECK(feasibility(q, data, 1) > 0.0);
    const Instance& member = data.rows[data.train[gen() % data.train.size()]];
    CHECK(feasibility(member, data, 1) == 0.0);
  }
}

TEST_CASE("discriminative power") {
  // Rows above 5.5 are predicted 1, the rest 0.
  const Dataset d = line({2, 3, 4, 6, 7, 8, 0.5}, {0, 0, 0, 1, 1, 1, 0});
  const Model m = threshold_model(d, 5.5);
  // x' = 5.9 predicts class 1; neighbours 6, 7, 8, 4, 3 -> 3 agree.
  CHECK(m.predict(inst({5.9})) == 1);
  CHECK(discriminative_power(inst({5.9}), d, m, 5) == doctest::Approx(0.6));
  CHECK(discriminative_power(inst({7.0}), d, m, 3) == 1.0);
  const Model none = threshold_model(d, 9.5);
  // Everything predicted 0; x' = 9.9 predicts 1 and no neighbour agrees.
  CHECK(none.predict(inst({9.9})) == 1);
  CHECK(discriminative_power(inst({9.9}), d, none, 4) == 0.0);
  CHECK_THROWS_AS(discriminative_power(inst({1}), d, m, 8), ParameterError);
}

TEST_CASE("score_candidate agrees with the individual measures and stays in range") {
  const auto& [data, model] = mixed();
  const Heom metric(data.schema, data.ranges);
  const ExplainContext ctx(data, model);
  ExplainerConfig cfg;
  cfg.growing_spheres.restarts = 4;
  cfg.diverse.restarts = 3;
  for (std::size_t q = 0; q < 4; ++q) {
    const Instance& x = data.rows[data.test[q]];
    for (const auto& c : run_ensemble(x, ctx, cfg)) {
      const CriteriaVector v = score_candidate(x, c.x_prime, data, model, metric, 5);
      CHECK(v.proximity == proximity(x, c.x_prime, metric));
      CHECK(v.feasibility == doctest::Approx(feasibility(c.x_prime, data, 5)).epsilon(1e-14));
      CHECK(v.dpow == discriminative_power(c.x_prime, data, model, 5));
      CHECK(v.sparsity == sparsity(x, c.x_prime, data.schema));
      CHECK(v.dpow >= 0.0);
      CHECK(v.dpow <= 1.0);
      CHECK(*v.sparsity >= 0);
      CHECK(*v.sparsity <= static_cast<int>(data.schema.size()));
      CHECK_FALSE(v.instability.has_value());
    }
  }
}

TEST_CASE("instability") {
  const auto& [data, model] = mixed();
  const Instance& x = data.rows[data.test[0]];

  // The nearest neighbour matches a brute-force scan over the training split.
  std::size_t best = data.train.front();
  for (std::size_t r : data.train) {
    if (testing::heom_oracle(x, data.rows[r], data.schema, data.ranges) <
        testing::heom_oracle(x, data.rows[best], data.schema, data.ranges)) {
      best = r;
    }
  }
  CHECK(nearest_training_row(x, data) == best);
  CHECK(nearest_training_row(x, data) == knn(x, data, 1, true).front().row);

  ProcedureCache cache;
  int calls = 0;
  const Procedure constant = [&](const Instance&) -> std::optional<Instance> {
    ++calls;
    return inst({1, 2, 3, 0, 0});
  };
  CHECK(instability(x, inst({1, 2, 3, 0, 0}), data, "const", constant, cache) == 0.0);
  CHECK(instability(x, inst({1, 2, 3, 0, 0}), data, "const", constant, cache) == 0.0);
  CHECK(calls == 1);
  CHECK(cache.size() == 1);

  const Procedure nothing = [](const Instance&) { return std::optional<Instance>(); };
  CHECK_FALSE(instability(x, x, data, "none", nothing, cache).has_value());

  const Procedure shift = [](const Instance& q) -> std::optional<Instance> {
    Instance v = q;
    v.values[2] += 0.25;
    return v;
  };
  const Instance mine = *shift(x);
  const auto value = instability(x, mine, data, "shift", shift, cache);
  REQUIRE(value.has_value());
  CHECK(*value == doctest::Approx(testing::heom_oracle(mine, *shift(data.rows[best]), data.schema,
                                                       data.ranges)));
}

TEST_CASE("instability of duplicate rows is zero under a deterministic procedure") {
  FeatureSchema s({continuous("v")});
  const Dataset d = make_dataset("dup", s, {inst({1}), inst({4}), inst({4}), inst({9})},
                                 {0, 1, 1, 0}, {"a", "b"}, 0, 1);
  const Procedure p = [](const Instance& q) -> std::optional<Instance> {
    return inst({q[0] * 2});
  };
  ProcedureCache cache;
  const Instance& x = d.rows[1];
  CHECK(nearest_training_row(x, d) == 2);
  CHECK(instability(x, *p(x), d, "double", p, cache) == 0.0);
}

TEST_CASE("procedure cache under concurrent use") {
  ProcedureCache cache;
  std::atomic<int> calls{0};
  const Procedure p = [&](const Instance& q) -> std::optional<Instance> {
    ++calls;
    return q;
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&] {
      for (std::size_t row = 0; row < 100; ++row) {
        const auto v = cache.get_or_compute("p", row, inst({static_cast<double>(row)}), p);
        CHECK((*v)[0] == static_cast<double>(row));
      }
    });
  }
  for (auto& t : pool) t.join();
  CHECK(cache.size() == 100);
  CHECK(calls >= 100);
}

TEST_CASE("aggregate stats") {
  auto outcome = [](double prox, bool actionable) {
    CriteriaVector c;
    c.proximity = prox;
    c.feasibility = 2 * prox;
    c.dpow = 0.5;
    c.sparsity = 2;
    c.instability = prox / 2;
    return MethodOutcome{c, actionable};
  };
  const SummaryRow row = aggregate_stats({outcome(1, true), outcome(3, true)});
  CHECK(row.proximity == 2.0);
  CHECK(row.feasibility == 4.0);
  CHECK(row.sparsity == 2.0);
  CHECK(row.instability == 1.0);
  CHECK(row.coverage == 1.0);
  CHECK(row.actionability == 1.0);

  const SummaryRow partial =
      aggregate_stats({outcome(1, true), MethodOutcome{}, outcome(2, false), MethodOutcome{}});
  CHECK(partial.coverage == 0.5);
  CHECK(partial.actionability == 0.25);
  CHECK(partial.proximity == 1.5);
  CHECK(partial.covered == 2);
  CHECK(partial.queries == 4);

  MethodOutcome no_instab = outcome(4, true);
  no_instab.criteria->instability.reset();
  const SummaryRow missing = aggregate_stats({outcome(2, true), no_instab});
  CHECK(missing.instability == 1.0);
  CHECK(missing.instability_missing == 1);

  const SummaryRow empty = aggregate_stats({MethodOutcome{}, MethodOutcome{}});
  CHECK(empty.coverage == 0.0);
  CHECK(std::isnan(empty.proximity));
  CHECK_THROWS_AS(aggregate_stats({}), ParameterError);
}

TEST_CASE("measures recomputed from serialized candidates equal the stored values") {
  const auto& [data, model] = mixed();
  const ExplainContext ctx(data, model);
  const Heom metric(data.schema, data.ranges);
  ExplainerConfig cfg;
  cfg.growing_spheres.restarts = 4;
  cfg.diverse.restarts = 3;
  const Instance& x = data.rows[data.test[3]];

  CandidateSet set;
  set.schema.name = data.name;
  set.schema.schema = data.schema;
  set.schema.label_column = "label";
  set.schema.classes = data.class_names;
  set.x = x;
  set.x.id.reset();
  set.predicted = model.predict(x);
  set.desired = ctx.desired_class(x);
  set.candidates = run_ensemble(x, ctx, cfg);
  REQUIRE_FALSE(set.candidates.empty());
  for (const auto& c : set.candidates) {
    set.criteria.push_back(score_candidate(x, c.x_prime, data, model, metric, 5));
  }

  std::stringstream buffer;
  write_candidates_jsonl(buffer, set, &data.ranges);
  const CandidateSet back = read_candidates_jsonl(buffer);
  REQUIRE(back.candidates.size() == set.candidates.size());
  CHECK(back.x == set.x);
  CHECK(back.desired == set.desired);
  const Heom file_metric(back.schema.schema, RangeTable::from_schema(back.schema.schema));
  for (std::size_t i = 0; i < back.candidates.size(); ++i) {
    const Candidate& c = back.candidates[i];
    const CriteriaVector& stored = *back.criteria[i];
    CHECK(c.x_prime == set.candidates[i].x_prime);
    CHECK(c.source == set.candidates[i].source);
    CHECK(c.valid == set.candidates[i].valid);
    CHECK(c.actionable == set.candidates[i].actionable);
    // From the file alone.
    CHECK(proximity(back.x, c.x_prime, file_metric) == stored.proximity);
    CHECK(sparsity(back.x, c.x_prime, back.schema.schema) == stored.sparsity);
    // With the data and model.
    const CriteriaVector again = score_candidate(back.x, c.x_prime, data, model, metric, 5);
    CHECK(again.feasibility == stored.feasibility);
    CHECK(again.dpow == stored.dpow);
  }
}

TEST_CASE("candidate file errors carry the line number") {
  const std::string head = testing::read_text(testing::fixture_dir() / "toy_adult" /
                                              "candidates.jsonl");
  const std::string query = head.substr(0, head.find('\n') + 1);
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_candidates_jsonl(in);
    } catch (const LoadError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("").find("query") != std::string::npos);
  CHECK(message(query + "{not json}\n").find("line 2") != std::string::npos);
  CHECK(message(query + R"({"kind": "candidate", "explainer": "nun", "restart": 0,
                           "predicted": ">50K", "values": {"age": 3}})" "\n")
            .find("line 2") != std::string::npos);
}
