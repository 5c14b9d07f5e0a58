#include "cfx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cfx/candidate_io.hpp"
#include "cfx/dataset.hpp"
#include "cfx/error.hpp"
#include "cfx/evaluation.hpp"
#include "cfx/heom.hpp"

namespace cfx {

using nlohmann::json;
namespace fs = std::filesystem;

// ------------------------------------------------------------ run config

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_key(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

DistanceMetric metric_from(const std::string& name) {
  if (auto m = parse_metric(name)) return *m;
  throw ConfigError("unknown selection metric '" + name + "' (expected L1, L2, Linf or nadir)");
}

void read_explainers(const json& doc, ExplainerConfig& cfg) {
  check_keys(doc,
             {"nun", "growing_spheres", "wachter_lite", "cadex_lite", "diverse_restarts"},
             "explainers");
  const std::string w = "explainers";
  if (doc.contains("nun")) {
    const auto& j = doc.at("nun");
    check_keys(j, {"enabled", "k"}, w + ".nun");
    read_key(j, "enabled", cfg.nun.enabled, w + ".nun");
    read_key(j, "k", cfg.nun.k, w + ".nun");
  }
  if (doc.contains("growing_spheres")) {
    const auto& j = doc.at("growing_spheres");
    const std::string at = w + ".growing_spheres";
    check_keys(j, {"enabled", "restarts", "samples_per_layer", "max_samples", "initial_radius",
                   "max_shrink"},
               at);
    auto& c = cfg.growing_spheres;
    read_key(j, "enabled", c.enabled, at);
    read_key(j, "restarts", c.restarts, at);
    read_key(j, "samples_per_layer", c.samples_per_layer, at);
    read_key(j, "max_samples", c.max_samples, at);
    read_key(j, "initial_radius", c.initial_radius, at);
    read_key(j, "max_shrink", c.max_shrink, at);
  }
  if (doc.contains("wachter_lite")) {
    const auto& j = doc.at("wachter_lite");
    const std::string at = w + ".wachter_lite";
    check_keys(j, {"enabled", "k", "lambda", "max_steps", "step_size", "flip_every"}, at);
    auto& c = cfg.wachter;
    read_key(j, "enabled", c.enabled, at);
    read_key(j, "k", c.k, at);
    read_key(j, "lambda", c.lambda, at);
    read_key(j, "max_steps", c.max_steps, at);
    read_key(j, "step_size", c.step_size, at);
    read_key(j, "flip_every", c.flip_every, at);
  }
  if (doc.contains("cadex_lite")) {
    const auto& j = doc.at("cadex_lite");
    const std::string at = w + ".cadex_lite";
    check_keys(j, {"enabled", "max_cap", "max_steps", "step_size"}, at);
    auto& c = cfg.cadex;
    read_key(j, "enabled", c.enabled, at);
    read_key(j, "max_cap", c.max_cap, at);
    read_key(j, "max_steps", c.max_steps, at);
    read_key(j, "step_size", c.step_size, at);
  }
  if (doc.contains("diverse_restarts")) {
    const auto& j = doc.at("diverse_restarts");
    const std::string at = w + ".diverse_restarts";
    check_keys(j, {"enabled", "restarts", "lambda", "max_steps", "step_size", "flip_every",
                   "diversity_weight", "diversity_margin", "init_noise", "flip_probability"},
               at);
    auto& c = cfg.diverse;
    read_key(j, "enabled", c.enabled, at);
    read_key(j, "restarts", c.restarts, at);
    read_key(j, "lambda", c.lambda, at);
    read_key(j, "max_steps", c.max_steps, at);
    read_key(j, "step_size", c.step_size, at);
    read_key(j, "flip_every", c.flip_every, at);
    read_key(j, "diversity_weight", c.diversity_weight, at);
    read_key(j, "diversity_margin", c.diversity_margin, at);
    read_key(j, "init_noise", c.init_noise, at);
    read_key(j, "flip_probability", c.flip_probability, at);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  check_keys(doc,
             {"description", "data", "schema", "out", "model", "seed", "neighbor_k", "metric",
              "metrics", "instances", "threads", "grid", "train", "explainers"},
             "run config");
  RunConfig cfg;
  cfg.source = doc;
  for (const char* key : {"data", "schema", "out"}) {
    if (!doc.contains(key) || !doc.at(key).is_string()) {
      throw ConfigError(std::string("run config needs a string '") + key + "'");
    }
  }
  cfg.data = resolve(base_dir, doc.at("data").get<std::string>());
  cfg.schema = resolve(base_dir, doc.at("schema").get<std::string>());
  cfg.out = resolve(base_dir, doc.at("out").get<std::string>());
  if (doc.contains("model")) {
    if (!doc.at("model").is_string()) throw ConfigError("run config 'model' must be a string");
    cfg.model_path = resolve(base_dir, doc.at("model").get<std::string>());
  }
  const std::string w = "run config";
  read_key(doc, "seed", cfg.seed, w);
  read_key(doc, "neighbor_k", cfg.neighbor_k, w);
  read_key(doc, "instances", cfg.instances, w);
  read_key(doc, "threads", cfg.threads, w);
  read_key(doc, "grid", cfg.grid, w);
  if (doc.contains("metric")) {
    std::string name;
    read_key(doc, "metric", name, w);
    cfg.metric = metric_from(name);
  }
  if (doc.contains("metrics")) {
    std::vector<std::string> names;
    read_key(doc, "metrics", names, w);
    cfg.metrics.clear();
    for (const auto& n : names) cfg.metrics.push_back(metric_from(n));
  }
  if (doc.contains("train")) {
    const auto& j = doc.at("train");
    const std::string at = "train";
    check_keys(j, {"hidden", "learning_rate", "epochs", "batch_size", "dropout",
                   "validation_fraction"},
               at);
    if (j.contains("hidden")) {
      std::vector<std::size_t> hidden;
      read_key(j, "hidden", hidden, at);
      if (hidden.size() != 2) throw ConfigError("train.hidden must list two layer widths");
      cfg.train.hidden = {hidden[0], hidden[1]};
    }
    read_key(j, "learning_rate", cfg.train.learning_rate, at);
    read_key(j, "epochs", cfg.train.epochs, at);
    read_key(j, "batch_size", cfg.train.batch_size, at);
    read_key(j, "dropout", cfg.train.dropout, at);
    read_key(j, "validation_fraction", cfg.train.validation_fraction, at);
  }
  if (doc.contains("explainers")) read_explainers(doc.at("explainers"), cfg.explainers);
  cfg.train.seed = cfg.seed;
  cfg.explainers.seed = cfg.seed;

  if (cfg.neighbor_k < 1) throw ConfigError("neighbor_k must be >= 1");
  if (cfg.grid < 1) throw ConfigError("grid must be >= 1");
  if (cfg.metrics.empty()) throw ConfigError("metrics must not be empty");
  try {
    cfg.train.validate();
    cfg.explainers.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": not valid JSON: " + e.what());
  }
  try {
    return parse_run_config(doc, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- commands

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct ExplainArgs {
  std::optional<std::size_t> instance_id;
  std::string values;
  std::string fixture;
  std::string desired;
  std::string metric;
  std::string dump_candidates;
};

RunConfig prepare(const CommonArgs& args) {
  if (args.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_run_config(args.config);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.train.seed = cfg.seed;
    cfg.explainers.seed = cfg.seed;
    cfg.source["seed"] = cfg.seed;
  }
  if (!args.out.empty()) cfg.out = args.out;
  return cfg;
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path.string());
}

std::string rounded(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  double r = std::round(v * scale) / scale;
  if (r == 0.0) r = 0.0;  // no "-0"
  return fmt::format("{}", r);
}

std::string dataset_name(const RunConfig& cfg) {
  const auto schema = load_schema_config(cfg.schema);
  return schema.name.empty() ? cfg.data.stem().string() : schema.name;
}

int cmd_train(const CommonArgs& args, std::ostream& out) {
  RunConfig cfg = prepare(args);
  require_file(cfg.data, "data file");
  require_file(cfg.schema, "schema config");
  const Dataset data = load_dataset(cfg.data, cfg.schema);
  TrainReport report;
  const Model model = train(data, cfg.train, &report);
  fs::create_directories(cfg.model().parent_path());
  save_model(model, cfg.model());
  out << "dataset " << data.name << ": " << data.train.size() << " train / " << data.test.size()
      << " test rows\n";
  out << "train accuracy " << rounded(report.train_accuracy, 4);
  if (report.validation_accuracy) {
    out << ", validation accuracy " << rounded(*report.validation_accuracy, 4);
  }
  out << ", test accuracy " << rounded(accuracy(model, data, data.test), 4) << '\n';
  out << "model written to " << cfg.model().string() << '\n';
  return kExitOk;
}

Instance parse_inline_values(const std::string& spec, const FeatureSchema& schema,
                             std::optional<Instance> base) {
  Instance x = base ? *base : Instance{std::vector<double>(schema.size(), 0.0), std::nullopt};
  std::vector<bool> seen(schema.size(), false);
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--values item '" + item + "' lacks '='");
    const std::string name = item.substr(0, eq);
    const auto f = schema.index_of(name);
    if (!f) throw ConfigError("--values names unknown feature '" + name + "'");
    try {
      x.values[*f] = schema.parse_value(*f, item.substr(eq + 1), false);
    } catch (const LoadError& e) {
      throw ConfigError(std::string("--values: ") + e.what());
    }
    seen[*f] = true;
  }
  if (!base) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (!seen[f]) throw ConfigError("--values lacks feature '" + schema[f].name + "'");
    }
  }
  if (base) x.id.reset();
  return x;
}

void print_selection(std::ostream& out, const FeatureSchema& schema, const Instance& x,
                     const SelectionResult& sel) {
  const auto& c = sel.counts;
  out << "candidates " << c.all << '\n';
  out << "valid " << c.valid << '\n';
  out << "actionable " << c.actionable << '\n';
  out << "front " << c.front << '\n';
  out << "chosen " << c.chosen << '\n';
  if (!sel.chosen) {
    out << "no counterfactual found\n";
    return;
  }
  out << "front members (proximity, feasibility, dpow):\n";
  for (std::size_t m : sel.front) {
    const auto& cr = sel.criteria[m];
    out << fmt::format("  {:<18} {:>3}  {:.3f}  {:.3f}  {:.3f}{}\n", sel.pool[m].source.explainer,
                       sel.pool[m].source.restart, cr.proximity, cr.feasibility, cr.dpow,
                       m == *sel.chosen ? "  <- chosen" : "");
  }
  const auto& ideal = sel.ideal->raw;
  out << "ideal point (" << rounded(ideal[0], 2) << ", " << rounded(ideal[1], 2) << ", "
      << rounded(ideal[2], 2) << ")\n";
  const Candidate& chosen = *sel.chosen_candidate();
  const CriteriaVector& cr = *sel.chosen_criteria();
  out << "selected by " << metric_name(sel.metric) << " from " << chosen.source.explainer
      << " restart " << chosen.source.restart << ": proximity " << rounded(cr.proximity, 3)
      << ", feasibility " << rounded(cr.feasibility, 3) << ", dpow " << rounded(cr.dpow, 3)
      << '\n';
  out << "changes:\n";
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (x[f] == chosen.x_prime[f]) continue;
    out << "  " << schema[f].name << ": " << schema.format_value(f, x[f]) << " -> "
        << schema.format_value(f, chosen.x_prime[f]) << '\n';
  }
}

int class_by_name(const std::vector<std::string>& classes, const std::string& name) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == name) return static_cast<int>(i);
  }
  throw ConfigError("--desired names unknown class '" + name + "'");
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << j.dump(2) << '\n';
  if (!f) throw Error("cannot write " + path.string());
}

int explain_fixture(const CommonArgs& args, const ExplainArgs& ea, std::ostream& out,
                    std::ostream& err) {
  CandidateSet set = read_candidates_jsonl(ea.fixture);
  const auto& classes = set.schema.classes;
  if (!ea.desired.empty()) set.desired = class_by_name(classes, ea.desired);
  if (set.desired == set.predicted) {
    err << "instance is already predicted as '" << classes[static_cast<std::size_t>(set.predicted)]
        << "'; nothing to explain\n";
    return kExitConfig;
  }
  for (auto& c : set.candidates) c.valid = c.predicted == set.desired;
  DistanceMetric metric = DistanceMetric::kL2;
  if (!ea.metric.empty()) metric = metric_from(ea.metric);
  const Scorer scorer = [&](std::size_t i) {
    if (!set.criteria[i]) {
      throw LoadError(ea.fixture + ": candidate " + std::to_string(i + 1) +
                      " is usable but has no stored criteria");
    }
    return *set.criteria[i];
  };
  const SelectionResult sel = select_counterfactual(set.candidates, scorer, metric);
  out << "query predicted '" << classes[static_cast<std::size_t>(set.predicted)] << "', desired '"
      << classes[static_cast<std::size_t>(set.desired)] << "'\n";
  print_selection(out, set.schema.schema, set.x, sel);
  if (!args.out.empty()) {
    json j = to_json(sel, set.schema.schema);
    j["query"] = instance_to_json(set.x, set.schema.schema);
    write_json(fs::path(args.out) / "explain.json", j);
  }
  return kExitOk;
}

int cmd_explain(const CommonArgs& args, const ExplainArgs& ea, std::ostream& out,
                std::ostream& err) {
  if (!ea.fixture.empty()) return explain_fixture(args, ea, out, err);
  RunConfig cfg = prepare(args);
  if (!ea.metric.empty()) cfg.metric = metric_from(ea.metric);
  if (!ea.instance_id && ea.values.empty()) {
    throw ConfigError("explain needs --instance-id, --values or --fixture");
  }
  require_file(cfg.data, "data file");
  require_file(cfg.schema, "schema config");
  require_file(cfg.model(), "model file");
  const Dataset data = load_dataset(cfg.data, cfg.schema);
  const Model model = load_model(cfg.model(), data.schema);

  std::optional<Instance> base;
  if (ea.instance_id) {
    if (*ea.instance_id >= data.rows.size()) {
      throw ConfigError("--instance-id " + std::to_string(*ea.instance_id) + " is out of range");
    }
    base = data.rows[*ea.instance_id];
  }
  const Instance x = ea.values.empty() ? *base : parse_inline_values(ea.values, data.schema, base);

  const ExplainContext ctx(data, model);
  const int predicted = model.predict(x);
  const int desired = ea.desired.empty() ? ctx.desired_class(x)
                                         : class_by_name(data.class_names, ea.desired);
  if (desired == predicted) {
    err << "instance is already predicted as '"
        << data.class_names[static_cast<std::size_t>(predicted)] << "'; nothing to explain\n";
    return kExitConfig;
  }

  EnsembleLog log;
  const auto cands = run_ensemble(x, ctx, cfg.explainers, &log);
  for (const auto& [name, what] : log.failures) err << "explainer " << name << " failed: " << what << '\n';
  std::vector<std::optional<CriteriaVector>> scored(cands.size());
  const Scorer scorer = [&](std::size_t i) {
    if (!scored[i]) {
      scored[i] = score_candidate(x, cands[i].x_prime, data, model, ctx.metric(), cfg.neighbor_k);
    }
    return *scored[i];
  };
  const SelectionResult sel = select_counterfactual(cands, scorer, cfg.metric);

  out << "query " << (ea.instance_id ? "row " + std::to_string(*ea.instance_id) : "inline")
      << ": predicted '" << data.class_names[static_cast<std::size_t>(predicted)]
      << "', desired '" << data.class_names[static_cast<std::size_t>(desired)] << "'\n";
  print_selection(out, data.schema, x, sel);

  json j = to_json(sel, data.schema);
  j["query"] = instance_to_json(x, data.schema);
  write_json(cfg.out / "explain.json", j);
  if (!ea.dump_candidates.empty()) {
    CandidateSet set;
    set.schema = load_schema_config(cfg.schema);
    set.schema.schema = data.schema;
    set.schema.classes = data.class_names;
    set.x = x;
    set.predicted = predicted;
    set.desired = desired;
    set.candidates = cands;
    set.criteria = scored;
    std::ofstream f(ea.dump_candidates, std::ios::binary);
    if (!f) throw Error("cannot write " + ea.dump_candidates);
    write_candidates_jsonl(f, set, &data.ranges);
  }
  return kExitOk;
}

void print_metrics(std::ostream& out, const MetricsTable& t) {
  out << fmt::format("{:<18} {:>7} {:>7} {:>6} {:>6} {:>7} {:>6} {:>6} {:>6}\n", "method", "prox",
                     "feas", "dpow", "spars", "instab", "cover", "act", "rank");
  for (std::size_t i = 0; i < t.methods.size(); ++i) {
    const auto& r = t.rows[i];
    out << fmt::format("{:<18} {:>7.3f} {:>7.3f} {:>6.2f} {:>6.2f} {:>7.3f} {:>6.2f} {:>6.2f} {:>6.2f}\n",
                       t.methods[i], r.proximity, r.feasibility, r.dpow, r.sparsity, r.instability,
                       r.coverage, r.actionability, t.ranks[i]);
  }
}

int cmd_evaluate(const CommonArgs& args, std::optional<std::size_t> instances, std::ostream& out) {
  RunConfig cfg = prepare(args);
  if (instances) {
    cfg.instances = *instances;
    cfg.source["instances"] = *instances;
  }
  require_file(cfg.data, "data file");
  require_file(cfg.schema, "schema config");
  require_file(cfg.model(), "model file");
  const Dataset data = load_dataset(cfg.data, cfg.schema);
  const Model model = load_model(cfg.model(), data.schema);

  EvaluationConfig ecfg;
  ecfg.explainers = cfg.explainers;
  ecfg.neighbor_k = cfg.neighbor_k;
  ecfg.instances = cfg.instances;
  ecfg.metrics = cfg.metrics;
  ecfg.survival_metric = cfg.metrics.front();
  ecfg.seed = cfg.seed;
  ecfg.threads = cfg.threads;
  const EvaluationReport report = evaluate(data, model, ecfg);
  emit_reports(cfg.out, report);
  write_json(cfg.out / "manifest.json", make_manifest(report, ecfg, cfg.source));

  out << "dataset " << data.name << ", " << report.instances.size() << " instances, k = "
      << cfg.neighbor_k << '\n';
  print_metrics(out, {report.methods, report.summary, report.ranks});
  if (report.reduction) {
    out << "dominance step removed " << rounded(100.0 * *report.reduction, 1)
        << "% of valid and actionable candidates on average\n";
  }
  if (!report.misses.empty()) {
    out << report.misses.size() << " instance(s) without a counterfactual\n";
  }
  out << "reports written to " << cfg.out.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, std::optional<int> grid, std::ostream& out,
              std::ostream& err) {
  RunConfig cfg = prepare(args);
  if (grid) cfg.grid = *grid;
  if (cfg.grid < 1) throw ConfigError("--grid must be >= 1");
  require_file(cfg.schema, "schema config");
  const std::string name = dataset_name(cfg);
  const fs::path selected = cfg.out / ("selected_" + name + ".csv");
  const fs::path metrics = cfg.out / ("metrics_" + name + ".csv");
  require_file(selected, "evaluation output (run evaluate first)");
  require_file(metrics, "evaluation output (run evaluate first)");

  const auto points = sweep(read_selected_csv(selected), cfg.grid);
  const fs::path target = cfg.out / ("sweep_" + name + ".csv");
  write_sweep_csv(target, points);

  std::map<std::string, std::size_t> wins;
  for (const auto& p : points) ++wins[p.winner];
  out << "sweep over " << points.size() << " weight triples (step 1/" << cfg.grid << ")\n";
  for (const auto& [method, count] : wins) out << "  " << method << " wins " << count << '\n';

  const auto leaders = criterion_leaders(read_metrics_csv(metrics));
  const char* labels[] = {"proximity (1,0,0)", "dpow (0,1,0)", "feasibility (0,0,1)"};
  for (std::size_t c = 0; c < 3; ++c) {
    const auto corner = std::find_if(points.begin(), points.end(), [c](const SweepPoint& p) {
      const double w[] = {p.weights.w_p, p.weights.w_d, p.weights.w_f};
      return w[c] == 1.0;
    });
    const auto& winner = corner->winner;
    out << "  corner " << labels[c] << ": " << winner << '\n';
    if (winner != leaders[c]) {
      err << "corner " << labels[c] << " winner " << winner << " differs from metrics leader "
          << leaders[c] << '\n';
    }
  }
  out << "sweep written to " << target.string() << '\n';
  return kExitOk;
}

void init_logging(bool verbose) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("cfx");
    spdlog::set_default_logger(logger);
  });
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble counterfactual explanations with ideal point selection", "cfx"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  CommonArgs common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Run config (JSON)");
    sub->add_option("--seed", common.seed, "Override the config seed");
    sub->add_option("--out", common.out, "Override the output directory");
  };

  auto* train_cmd = app.add_subcommand("train", "Train the black-box model and save it");
  add_common(train_cmd);

  ExplainArgs ea;
  auto* explain_cmd = app.add_subcommand("explain", "Explain one instance");
  add_common(explain_cmd);
  auto* id_opt = explain_cmd->add_option("--instance-id", ea.instance_id, "Dataset row index");
  explain_cmd->add_option("--values", ea.values,
                          "Feature values, name=value pairs separated by commas");
  auto* fixture_opt =
      explain_cmd->add_option("--fixture", ea.fixture, "Replay a candidate JSON-lines file");
  fixture_opt->excludes(id_opt);
  explain_cmd->add_option("--desired", ea.desired, "Desired class name");
  explain_cmd->add_option("--metric", ea.metric, "L1, L2, Linf or nadir");
  explain_cmd->add_option("--dump-candidates", ea.dump_candidates,
                          "Write the scored candidates as JSON lines");

  std::optional<std::size_t> instances;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compare all methods on the test split");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--instances", instances, "Number of test instances (0 = all)");

  std::optional<int> grid;
  auto* sweep_cmd = app.add_subcommand("sweep", "Utility sweep over evaluation outputs");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--grid", grid, "Weight grid step 1/N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  init_logging(verbose);

  try {
    if (train_cmd->parsed()) return cmd_train(common, out);
    if (explain_cmd->parsed()) return cmd_explain(common, ea, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(common, instances, out);
    if (sweep_cmd->parsed()) return cmd_sweep(common, grid, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LoadError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace cfx
