#include "cfx/candidate_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "cfx/error.hpp"
#include "cfx/explainers.hpp"

namespace cfx {

using nlohmann::json;

nlohmann::json schema_config_to_json(const SchemaConfig& cfg, const RangeTable* ranges) {
  json features = json::array();
  for (std::size_t f = 0; f < cfg.schema.size(); ++f) {
    const auto& spec = cfg.schema[f];
    json j = {{"name", spec.name}, {"kind", spec.categorical() ? "categorical" : "continuous"}};
    if (spec.categorical()) {
      if (!spec.categories.empty()) j["categories"] = spec.categories;
    } else if (ranges) {
      j["range"] = {(*ranges)[f].min, (*ranges)[f].max};
    } else if (spec.range) {
      j["range"] = {spec.range->min, spec.range->max};
    }
    if (spec.immutable) j["immutable"] = true;
    features.push_back(j);
  }
  json doc = {{"name", cfg.name}, {"label", cfg.label_column}, {"features", features},
              {"seed", cfg.seed}};
  if (!cfg.classes.empty()) doc["classes"] = cfg.classes;
  if (cfg.test_size) doc["test_size"] = *cfg.test_size;
  return doc;
}

nlohmann::json instance_to_json(const Instance& x, const FeatureSchema& schema) {
  json j = json::object();
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].categorical()) {
      j[schema[f].name] = schema.format_value(f, x[f]);
    } else {
      j[schema[f].name] = x[f];
    }
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  if (!j.is_object()) throw LoadError("instance must be a JSON object");
  Instance x;
  x.values.resize(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const auto& name = schema[f].name;
    if (!j.contains(name)) throw LoadError("instance lacks feature '" + name + "'");
    const json& v = j.at(name);
    if (schema[f].categorical()) {
      if (!v.is_string()) throw LoadError("feature '" + name + "' must be a string");
      x.values[f] = schema.parse_value(f, v.get<std::string>(), true);
    } else {
      if (!v.is_number()) throw LoadError("feature '" + name + "' must be a number");
      x.values[f] = v.get<double>();
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (!schema.index_of(key)) throw LoadError("instance has unknown feature '" + key + "'");
  }
  return x;
}

namespace {

int class_index(const std::vector<std::string>& classes, const json& j, const char* field) {
  const auto name = j.at(field).get<std::string>();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == name) return static_cast<int>(i);
  }
  throw LoadError(std::string(field) + " names unknown class '" + name + "'");
}

CriteriaVector criteria_from_json(const json& j) {
  CriteriaVector c;
  c.proximity = j.at("proximity").get<double>();
  c.feasibility = j.at("feasibility").get<double>();
  c.dpow = j.at("dpow").get<double>();
  if (j.contains("sparsity")) c.sparsity = j.at("sparsity").get<int>();
  if (j.contains("instability")) c.instability = j.at("instability").get<double>();
  return c;
}

}  // namespace

CandidateSet read_candidates_jsonl(std::istream& in) {
  CandidateSet set;
  bool have_query = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(text);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "query") {
        if (have_query) throw LoadError("second query record");
        set.schema = parse_schema_config(j.at("schema").dump());
        if (set.schema.classes.size() != 2) {
          throw LoadError("query schema must declare exactly two classes");
        }
        set.x = instance_from_json(j.at("x"), set.schema.schema);
        set.predicted = class_index(set.schema.classes, j, "predicted");
        set.desired = j.contains("desired") ? class_index(set.schema.classes, j, "desired")
                                            : 1 - set.predicted;
        have_query = true;
      } else if (kind == "candidate") {
        if (!have_query) throw LoadError("candidate before the query record");
        Candidate c;
        c.x_prime = instance_from_json(j.at("values"), set.schema.schema);
        c.source.explainer = j.at("explainer").get<std::string>();
        c.source.restart = j.value("restart", 0);
        if (j.contains("rank")) {
          c.source.rank = j.at("rank").get<int>();
        } else if (auto id = parse_explainer(c.source.explainer)) {
          c.source.rank = static_cast<int>(*id);
        } else {
          throw LoadError("candidate from unknown explainer '" + c.source.explainer +
                          "' needs a rank");
        }
        c.predicted = class_index(set.schema.classes, j, "predicted");
        c.valid = c.predicted == set.desired;
        c.actionable = is_actionable(set.x, c.x_prime, set.schema.schema);
        set.candidates.push_back(std::move(c));
        set.criteria.push_back(j.contains("criteria")
                                   ? std::optional(criteria_from_json(j.at("criteria")))
                                   : std::nullopt);
      } else {
        throw LoadError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw LoadError("line " + std::to_string(line) + ": " + e.what());
    } catch (const LoadError& e) {
      throw LoadError("line " + std::to_string(line) + ": " + e.what());
    }
  }
  if (!have_query) throw LoadError("no query record");
  return set;
}

CandidateSet read_candidates_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return read_candidates_jsonl(in);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_candidates_jsonl(std::ostream& out, const CandidateSet& set, const RangeTable* ranges) {
  const auto& schema = set.schema.schema;
  const auto& classes = set.schema.classes;
  json query = {{"kind", "query"},
                {"schema", schema_config_to_json(set.schema, ranges)},
                {"x", instance_to_json(set.x, schema)},
                {"predicted", classes.at(static_cast<std::size_t>(set.predicted))},
                {"desired", classes.at(static_cast<std::size_t>(set.desired))}};
  out << query.dump() << '\n';
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    const auto& c = set.candidates[i];
    json j = {{"kind", "candidate"},
              {"explainer", c.source.explainer},
              {"rank", c.source.rank},
              {"restart", c.source.restart},
              {"predicted", classes.at(static_cast<std::size_t>(c.predicted))},
              {"values", instance_to_json(c.x_prime, schema)}};
    if (i < set.criteria.size() && set.criteria[i]) {
      const auto& cr = *set.criteria[i];
      j["criteria"] = {{"proximity", cr.proximity}, {"feasibility", cr.feasibility},
                       {"dpow", cr.dpow}};
      if (cr.sparsity) j["criteria"]["sparsity"] = *cr.sparsity;
      if (cr.instability) j["criteria"]["instability"] = *cr.instability;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace cfx
