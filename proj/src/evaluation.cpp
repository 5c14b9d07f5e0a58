#include "cfx/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include <spdlog/spdlog.h>

#include "cfx/error.hpp"
#include "cfx/hash.hpp"
#include "cfx/rng.hpp"

namespace cfx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shortest text that parses back to the same double.
std::string fmt_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  if (s == "nan") return kNaN;
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw LoadError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw LoadError(path.string() + ":" + std::to_string(line) + ": bad count '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

CsvTable read_table(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  CsvTable t = read_csv(in);
  if (t.header != header) throw LoadError(path.string() + ": unexpected header");
  return t;
}

}  // namespace

// ---------------------------------------------------------------- ranking

std::vector<double> rank_table(const MeasureMatrix& m) {
  const std::size_t cols = m.directions.size();
  if (m.values.size() != m.methods.size()) throw ParameterError("one row per method required");
  for (const auto& row : m.values) {
    if (row.size() != cols) throw ParameterError("measure matrix arity mismatch");
  }
  const std::size_t n = m.values.size();
  std::vector<double> total(n, 0.0);
  if (n == 0 || cols == 0) return total;

  for (std::size_t c = 0; c < cols; ++c) {
    const bool minimize = m.directions[c] == Direction::kMin;
    std::vector<double> col(n);
    std::optional<double> worst;
    for (std::size_t r = 0; r < n; ++r) {
      col[r] = m.values[r][c];
      if (std::isnan(col[r])) continue;
      if (!worst || (minimize ? col[r] > *worst : col[r] < *worst)) worst = col[r];
    }
    for (double& v : col) {
      if (std::isnan(v)) v = worst.value_or(0.0);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return minimize ? col[a] < col[b] : col[a] > col[b];
    });
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && col[order[j + 1]] == col[order[i]]) ++j;
      // Positions i..j (0-based) share rank ((i + 1) + (j + 1)) / 2.
      const double rank = (static_cast<double>(i + j) + 2.0) / 2.0;
      for (std::size_t t = i; t <= j; ++t) total[order[t]] += rank;
      i = j + 1;
    }
  }
  for (double& t : total) t /= static_cast<double>(cols);
  return total;
}

// --------------------------------------------------------------- survival

std::vector<SurvivalRow> survival_table(const std::vector<SelectionResult>& results,
                                        const std::vector<std::string>& explainers) {
  std::vector<SurvivalRow> rows;
  const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
  auto add = [&](SurvivalRow& row, const SurvivalCounts& s) {
    row.all += static_cast<double>(s.all);
    row.valid += static_cast<double>(s.valid);
    row.actionable += static_cast<double>(s.actionable);
    row.front += static_cast<double>(s.front);
    row.ideal += static_cast<double>(s.chosen);
  };
  auto scale = [&](SurvivalRow& row) {
    row.all /= n;
    row.valid /= n;
    row.actionable /= n;
    row.front /= n;
    row.ideal /= n;
  };
  for (const auto& name : explainers) {
    SurvivalRow row{name};
    for (const auto& r : results) {
      if (auto it = r.per_explainer.find(name); it != r.per_explainer.end()) add(row, it->second);
    }
    scale(row);
    rows.push_back(row);
  }
  SurvivalRow total{"total"};
  for (const auto& r : results) add(total, r.counts);
  scale(total);
  rows.push_back(total);
  return rows;
}

std::optional<double> dominance_reduction(const std::vector<SelectionResult>& results) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : results) {
    if (r.counts.actionable == 0) continue;
    sum += 1.0 - static_cast<double>(r.counts.front) / static_cast<double>(r.counts.actionable);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// ------------------------------------------------------------------ sweep

std::vector<WeightTriple> barycentric_grid(int n) {
  if (n < 1) throw ParameterError("grid step must be 1/n for an integer n >= 1");
  std::vector<WeightTriple> grid;
  const auto d = static_cast<double>(n);
  for (int i = n; i >= 0; --i) {
    for (int j = n - i; j >= 0; --j) {
      grid.push_back({i / d, j / d, (n - i - j) / d});
    }
  }
  return grid;
}

UtilityBounds fit_bounds(const std::vector<CriteriaVector>& selected) {
  UtilityBounds b;
  if (selected.empty()) return b;
  b.proximity = {selected[0].proximity, selected[0].proximity};
  b.dpow = {selected[0].dpow, selected[0].dpow};
  b.feasibility = {selected[0].feasibility, selected[0].feasibility};
  auto widen = [](ValueRange& r, double v) {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  };
  for (const auto& c : selected) {
    widen(b.proximity, c.proximity);
    widen(b.dpow, c.dpow);
    widen(b.feasibility, c.feasibility);
  }
  return b;
}

namespace {

double unit(const ValueRange& r, double v) {
  return r.width() > 0.0 ? (v - r.min) / r.width() : 0.0;
}

}  // namespace

double utility(const CriteriaVector& c, const WeightTriple& w, const UtilityBounds& bounds) {
  return w.w_p * (1.0 - unit(bounds.proximity, c.proximity)) +
         w.w_d * unit(bounds.dpow, c.dpow) +
         w.w_f * (1.0 - unit(bounds.feasibility, c.feasibility));
}

std::vector<SweepPoint> sweep(const std::vector<SelectedRecord>& records, int n) {
  const auto grid = barycentric_grid(n);
  std::vector<CriteriaVector> covered;
  for (const auto& r : records) {
    if (r.criteria) covered.push_back(*r.criteria);
  }
  if (covered.empty()) throw ParameterError("sweep needs at least one covered method");
  const UtilityBounds bounds = fit_bounds(covered);

  // Utility is linear in the criteria, so a method's mean utility equals the
  // utility of its mean criteria. Means are summed in record order, the same
  // order aggregate_stats uses, so corners agree exactly with the metrics table.
  std::map<std::string, std::pair<CriteriaVector, std::size_t>> means;
  for (const auto& r : records) {
    if (!r.criteria) continue;
    auto& [sum, count] = means[r.method];
    sum.proximity += r.criteria->proximity;
    sum.feasibility += r.criteria->feasibility;
    sum.dpow += r.criteria->dpow;
    ++count;
  }
  for (auto& [name, entry] : means) {
    const auto count = static_cast<double>(entry.second);
    entry.first.proximity /= count;
    entry.first.feasibility /= count;
    entry.first.dpow /= count;
  }

  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (const auto& w : grid) {
    SweepPoint best{w, "", 0.0};
    for (const auto& [name, entry] : means) {
      const double u = utility(entry.first, w, bounds);
      if (best.winner.empty() || u > best.utility) {
        best.winner = name;
        best.utility = u;
      }
    }
    points.push_back(best);
  }
  return points;
}

// --------------------------------------------------------------- harness

std::string ideal_method_name(DistanceMetric m) {
  return "ideal_" + std::string(metric_name(m));
}

MeasureMatrix measure_matrix(const std::vector<std::string>& methods,
                             const std::vector<SummaryRow>& summary) {
  MeasureMatrix m;
  m.methods = methods;
  m.directions = measure_directions();
  for (const auto& s : summary) {
    m.values.push_back({s.proximity, s.feasibility, s.dpow, s.sparsity, s.instability, s.coverage,
                        s.actionability});
  }
  return m;
}

namespace {

struct Choice {
  std::optional<Instance> x_prime;
  bool actionable = false;
  std::optional<CriteriaVector> criteria;
};

// Everything the harness needs from one query: each method's choice and the
// selection trace for the survival table.
struct QueryRun {
  std::vector<Choice> choices;  // aligned with the method list
  std::optional<SelectionResult> selection;
};

class Harness {
 public:
  Harness(const Dataset& data, const Model& model, const EvaluationConfig& cfg)
      : data_(data), model_(model), cfg_(cfg), ctx_(data, model) {
    for (ExplainerId id : kAllExplainers) {
      if (cfg.explainers.enabled(id)) {
        methods_.emplace_back(explainer_name(id));
        base_.push_back(id);
      }
    }
    methods_.emplace_back(kRandomMethod);
    for (DistanceMetric m : cfg.metrics) methods_.push_back(ideal_method_name(m));
    const auto it = std::find(cfg.metrics.begin(), cfg.metrics.end(), cfg.survival_metric);
    survival_index_ = it == cfg.metrics.end() ? std::nullopt
                                              : std::optional<std::size_t>(it - cfg.metrics.begin());
  }

  const std::vector<std::string>& methods() const { return methods_; }

  QueryRun run(const Instance& x, bool with_criteria) const {
    QueryRun out;
    const int desired = ctx_.desired_class(x);
    EnsembleLog log;
    const auto outputs = generate_all(x, ctx_, cfg_.explainers, &log);

    for (ExplainerId id : base_) {
      auto own = outputs[static_cast<std::size_t>(id)];
      annotate(own, x, data_.schema, model_, desired);
      out.choices.push_back(base_choice(id, x, own, with_criteria));
    }

    const auto ensemble = combine_candidates(outputs, x, ctx_);
    std::vector<std::optional<CriteriaVector>> scored(ensemble.size());
    const Scorer scorer = [&](std::size_t i) {
      if (!scored[i]) scored[i] = score(x, ensemble[i].x_prime);
      return *scored[i];
    };

    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      if (ensemble[i].valid && ensemble[i].actionable) usable.push_back(i);
    }
    Choice random;
    if (!usable.empty()) {
      Fnv1a h;
      for (double v : x.values) h.add(v);
      Rng rng(mix_seed(cfg_.seed, h.value(), 0x72616e64));
      const std::size_t pick = usable[rng.index(usable.size())];
      random.x_prime = ensemble[pick].x_prime;
      random.actionable = true;
      if (with_criteria) random.criteria = scorer(pick);
    }
    out.choices.push_back(std::move(random));

    for (std::size_t m = 0; m < cfg_.metrics.size(); ++m) {
      SelectionResult sel = select_counterfactual(ensemble, scorer, cfg_.metrics[m]);
      Choice c;
      if (const Candidate* chosen = sel.chosen_candidate()) {
        c.x_prime = chosen->x_prime;
        c.actionable = true;
        c.criteria = *sel.chosen_criteria();
      }
      out.choices.push_back(std::move(c));
      if (survival_index_ == m) out.selection = std::move(sel);
    }
    if (!survival_index_) out.selection = select_counterfactual(ensemble, scorer, cfg_.survival_metric);
    if (!with_criteria) {
      for (auto& c : out.choices) c.criteria.reset();
    }
    return out;
  }

  std::shared_ptr<const QueryRun> neighbour_run(std::size_t row) const {
    {
      std::lock_guard lock(mutex_);
      if (auto it = neighbours_.find(row); it != neighbours_.end()) return it->second;
    }
    auto result = std::make_shared<const QueryRun>(run(data_.rows[row], false));
    std::lock_guard lock(mutex_);
    return neighbours_.emplace(row, std::move(result)).first->second;
  }

  ProcedureCache& cache() const { return cache_; }

 private:
  CriteriaVector score(const Instance& x, const Instance& x_prime) const {
    return score_candidate(x, x_prime, data_, model_, ctx_.metric(), cfg_.neighbor_k);
  }

  // A base explainer's own answer: the nearest valid candidate for growing
  // spheres (its restarts are independent draws), otherwise the first valid
  // one in restart order.
  Choice base_choice(ExplainerId id, const Instance& x, const std::vector<Candidate>& own,
                     bool with_criteria) const {
    const Candidate* best = nullptr;
    double best_distance = 0.0;
    for (const auto& c : own) {
      if (!c.valid) continue;
      if (id != ExplainerId::kGrowingSpheres) {
        best = &c;
        break;
      }
      const double d = ctx_.metric()(x, c.x_prime);
      if (!best || d < best_distance) {
        best = &c;
        best_distance = d;
      }
    }
    Choice choice;
    if (best) {
      choice.x_prime = best->x_prime;
      choice.actionable = best->actionable;
      if (with_criteria) choice.criteria = score(x, best->x_prime);
    }
    return choice;
  }

  const Dataset& data_;
  const Model& model_;
  const EvaluationConfig& cfg_;
  ExplainContext ctx_;
  std::vector<std::string> methods_;
  std::vector<ExplainerId> base_;
  std::optional<std::size_t> survival_index_;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const QueryRun>> neighbours_;
  mutable ProcedureCache cache_;
};

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

EvaluationReport evaluate(const Dataset& data, const Model& model, const EvaluationConfig& cfg) {
  cfg.explainers.validate();
  if (cfg.neighbor_k < 1 || cfg.neighbor_k > data.train.size()) {
    throw ParameterError("neighbor_k must lie in [1, training rows]");
  }
  if (cfg.metrics.empty()) throw ParameterError("at least one selection metric is required");
  if (data.test.empty()) throw ParameterError("dataset has an empty test split");

  Harness harness(data, model, cfg);
  EvaluationReport report;
  report.dataset = data.name;
  report.methods = harness.methods();
  const std::size_t n =
      cfg.instances == 0 ? data.test.size() : std::min(cfg.instances, data.test.size());
  report.instances.assign(data.test.begin(), data.test.begin() + static_cast<std::ptrdiff_t>(n));
  if (cfg.instances > data.test.size()) {
    spdlog::warn("{}: asked for {} instances, test split has {}", data.name, cfg.instances,
                 data.test.size());
  }

  const std::size_t methods = report.methods.size();
  std::vector<QueryRun> runs(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const std::size_t row = report.instances[i];
    const Instance& x = data.rows[row];
    QueryRun run = harness.run(x, true);
    for (std::size_t m = 0; m < methods; ++m) {
      Choice& c = run.choices[m];
      if (!c.x_prime) continue;
      const Procedure procedure = [&harness, &data, m](const Instance& q) {
        return harness.neighbour_run(static_cast<std::size_t>(*q.id))->choices[m].x_prime;
      };
      c.criteria->instability =
          instability(x, *c.x_prime, data, report.methods[m], procedure, harness.cache());
    }
    runs[i] = std::move(run);
    spdlog::debug("{}: row {} done", data.name, row);
  });

  std::vector<std::vector<MethodOutcome>> outcomes(methods);
  for (std::size_t i = 0; i < n; ++i) {
    QueryRun& run = runs[i];
    for (std::size_t m = 0; m < methods; ++m) {
      const Choice& c = run.choices[m];
      outcomes[m].push_back({c.criteria, c.actionable});
      report.selected.push_back({report.instances[i], report.methods[m], c.criteria, c.actionable});
    }
    if (!run.selection->chosen) {
      report.misses.push_back(report.instances[i]);
      spdlog::warn("{}: no valid and actionable counterfactual for row {}", data.name,
                   report.instances[i]);
    }
    report.selections.push_back(std::move(*run.selection));
  }
  for (std::size_t m = 0; m < methods; ++m) report.summary.push_back(aggregate_stats(outcomes[m]));
  report.ranks = rank_table(measure_matrix(report.methods, report.summary));

  std::vector<std::string> explainers;
  for (ExplainerId id : kAllExplainers) {
    if (cfg.explainers.enabled(id)) explainers.emplace_back(explainer_name(id));
  }
  report.survival = survival_table(report.selections, explainers);
  report.reduction = dominance_reduction(report.selections);
  return report;
}

// ---------------------------------------------------------------- reports

namespace {

const std::vector<std::string> kMetricsHeader = {
    "method", "prox", "feas", "dpow", "spars", "instab", "cover", "act",
    "rank",   "queries", "covered", "instab_missing"};
const std::vector<std::string> kSurvivalHeader = {"explainer", "all",   "val",
                                                  "act",       "front", "ideal"};
const std::vector<std::string> kSelectedHeader = {"instance", "method", "covered", "actionable",
                                                  "prox",     "feas",   "dpow",    "spars",
                                                  "instab"};
const std::vector<std::string> kSweepHeader = {"w_p", "w_d", "w_f", "winner", "utility"};

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, const MetricsTable& table) {
  auto out = open_out(path);
  write_header(out, kMetricsHeader);
  for (std::size_t i = 0; i < table.methods.size(); ++i) {
    const auto& r = table.rows[i];
    out << table.methods[i] << ',' << fmt_number(r.proximity) << ',' << fmt_number(r.feasibility)
        << ',' << fmt_number(r.dpow) << ',' << fmt_number(r.sparsity) << ','
        << fmt_number(r.instability) << ',' << fmt_number(r.coverage) << ','
        << fmt_number(r.actionability) << ',' << fmt_number(table.ranks[i]) << ',' << r.queries
        << ',' << r.covered << ',' << r.instability_missing << '\n';
  }
  finish(out, path);
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, kMetricsHeader);
  MetricsTable table;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::size_t line = t.lines[i];
    SummaryRow r;
    r.proximity = parse_number(c[1], path, line);
    r.feasibility = parse_number(c[2], path, line);
    r.dpow = parse_number(c[3], path, line);
    r.sparsity = parse_number(c[4], path, line);
    r.instability = parse_number(c[5], path, line);
    r.coverage = parse_number(c[6], path, line);
    r.actionability = parse_number(c[7], path, line);
    r.queries = parse_count(c[9], path, line);
    r.covered = parse_count(c[10], path, line);
    r.instability_missing = parse_count(c[11], path, line);
    table.methods.push_back(c[0]);
    table.rows.push_back(r);
    table.ranks.push_back(parse_number(c[8], path, line));
  }
  return table;
}

void write_survival_csv(const std::filesystem::path& path, const std::vector<SurvivalRow>& rows) {
  auto out = open_out(path);
  write_header(out, kSurvivalHeader);
  for (const auto& r : rows) {
    out << r.explainer << ',' << fmt_number(r.all) << ',' << fmt_number(r.valid) << ','
        << fmt_number(r.actionable) << ',' << fmt_number(r.front) << ',' << fmt_number(r.ideal)
        << '\n';
  }
  finish(out, path);
}

std::vector<SurvivalRow> read_survival_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, kSurvivalHeader);
  std::vector<SurvivalRow> rows;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::size_t line = t.lines[i];
    rows.push_back({c[0], parse_number(c[1], path, line), parse_number(c[2], path, line),
                    parse_number(c[3], path, line), parse_number(c[4], path, line),
                    parse_number(c[5], path, line)});
  }
  return rows;
}

void write_selected_csv(const std::filesystem::path& path,
                        const std::vector<SelectedRecord>& records) {
  auto out = open_out(path);
  write_header(out, kSelectedHeader);
  for (const auto& r : records) {
    out << r.instance << ',' << r.method << ',' << (r.criteria ? 1 : 0) << ','
        << (r.actionable ? 1 : 0);
    if (r.criteria) {
      const auto& c = *r.criteria;
      out << ',' << fmt_number(c.proximity) << ',' << fmt_number(c.feasibility) << ','
          << fmt_number(c.dpow) << ',' << (c.sparsity ? std::to_string(*c.sparsity) : "") << ','
          << (c.instability ? fmt_number(*c.instability) : "");
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
  finish(out, path);
}

std::vector<SelectedRecord> read_selected_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, kSelectedHeader);
  std::vector<SelectedRecord> records;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::size_t line = t.lines[i];
    SelectedRecord r;
    r.instance = parse_count(c[0], path, line);
    r.method = c[1];
    r.actionable = c[3] == "1";
    if (c[2] == "1") {
      CriteriaVector v;
      v.proximity = parse_number(c[4], path, line);
      v.feasibility = parse_number(c[5], path, line);
      v.dpow = parse_number(c[6], path, line);
      if (!c[7].empty()) v.sparsity = static_cast<int>(parse_count(c[7], path, line));
      if (!c[8].empty()) v.instability = parse_number(c[8], path, line);
      r.criteria = v;
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& points) {
  auto out = open_out(path);
  write_header(out, kSweepHeader);
  for (const auto& p : points) {
    out << fmt_number(p.weights.w_p) << ',' << fmt_number(p.weights.w_d) << ','
        << fmt_number(p.weights.w_f) << ',' << p.winner << ',' << fmt_number(p.utility) << '\n';
  }
  finish(out, path);
}

std::vector<SweepPoint> read_sweep_csv(const std::filesystem::path& path) {
  const CsvTable t = read_table(path, kSweepHeader);
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::size_t line = t.lines[i];
    points.push_back({{parse_number(c[0], path, line), parse_number(c[1], path, line),
                       parse_number(c[2], path, line)},
                      c[3],
                      parse_number(c[4], path, line)});
  }
  return points;
}

std::uint64_t config_hash(const nlohmann::json& config) {
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  return Fnv1a().add(config.dump()).value();
}

nlohmann::json make_manifest(const EvaluationReport& report, const EvaluationConfig& cfg,
                             const nlohmann::json& run_config) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["seed"] = cfg.seed;
  j["explainer_seed"] = cfg.explainers.seed;
  j["neighbor_k"] = cfg.neighbor_k;
  j["instances"] = report.instances.size();
  std::vector<std::string> metrics;
  for (auto m : cfg.metrics) metrics.emplace_back(metric_name(m));
  j["selection_metrics"] = metrics;
  j["survival_metric"] = metric_name(cfg.survival_metric);
  j["normalization"] = "per-query min-max over the valid and actionable candidates";
  j["utility_orientation"] = "proximity and feasibility as 1 - normalized, dpow as normalized";
  j["methods"] = report.methods;
  j["config_hash"] = fmt::format("{:016x}", config_hash(run_config));
  j["dominance_reduction"] = report.reduction ? nlohmann::json(*report.reduction) : nullptr;
  j["misses"] = report.misses;
  return j;
}

void emit_reports(const std::filesystem::path& dir, const EvaluationReport& report) {
  std::filesystem::create_directories(dir);
  write_metrics_csv(dir / ("metrics_" + report.dataset + ".csv"),
                    {report.methods, report.summary, report.ranks});
  write_survival_csv(dir / ("survival_" + report.dataset + ".csv"), report.survival);
  write_selected_csv(dir / ("selected_" + report.dataset + ".csv"), report.selected);
}

std::array<std::string, 3> criterion_leaders(const MetricsTable& table) {
  std::array<std::string, 3> leaders;
  std::array<double, 3> best{};
  for (std::size_t i = 0; i < table.methods.size(); ++i) {
    const auto& r = table.rows[i];
    if (r.covered == 0) continue;
    // Oriented so that larger is better.
    const std::array<double, 3> v = {-r.proximity, r.dpow, -r.feasibility};
    for (std::size_t c = 0; c < 3; ++c) {
      const bool better = leaders[c].empty() || v[c] > best[c] ||
                          (v[c] == best[c] && table.methods[i] < leaders[c]);
      if (better) {
        leaders[c] = table.methods[i];
        best[c] = v[c];
      }
    }
  }
  return leaders;
}

}  // namespace cfx
