#include "cfx/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cfx/error.hpp"
#include "cfx/rng.hpp"

namespace cfx {

namespace {

using nlohmann::json;

FeatureKind parse_kind(const std::string& kind, const std::string& feature) {
  if (kind == "continuous") return FeatureKind::kContinuous;
  if (kind == "categorical") return FeatureKind::kCategorical;
  throw LoadError("feature '" + feature + "': unknown kind '" + kind + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Splits one logical record starting at `pos`; quoted fields may span lines.
bool next_record(const std::string& text, std::size_t& pos, std::size_t& line,
                 std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      ++line;
      break;
    } else if (c != '\r') {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) {
    throw LoadError("unterminated quoted field starting on line " + std::to_string(start_line));
  }
  fields.push_back(std::move(field));
  return true;
}

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace

SchemaConfig parse_schema_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw LoadError(std::string("schema config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("schema config must be a JSON object");

  SchemaConfig cfg;
  try {
    cfg.name = doc.value("name", std::string());
    if (!doc.contains("label")) throw LoadError("schema config lacks 'label'");
    cfg.label_column = doc.at("label").get<std::string>();
    if (doc.contains("classes")) cfg.classes = doc.at("classes").get<std::vector<std::string>>();
    if (doc.contains("test_size")) cfg.test_size = doc.at("test_size").get<std::size_t>();
    cfg.seed = doc.value("seed", std::uint64_t{0});

    if (!doc.contains("features") || !doc.at("features").is_array()) {
      throw LoadError("schema config lacks a 'features' array");
    }
    std::vector<FeatureSpec> specs;
    for (const auto& f : doc.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      spec.kind = parse_kind(f.at("kind").get<std::string>(), spec.name);
      spec.immutable = f.value("immutable", false);
      if (f.contains("categories")) {
        if (!spec.categorical()) {
          throw LoadError("feature '" + spec.name + "': categories on a continuous feature");
        }
        spec.categories = f.at("categories").get<std::vector<std::string>>();
        std::set<std::string> unique(spec.categories.begin(), spec.categories.end());
        if (unique.size() != spec.categories.size() || spec.categories.empty()) {
          throw LoadError("feature '" + spec.name + "': categories must be unique and non-empty");
        }
      }
      if (f.contains("range")) {
        if (spec.categorical()) {
          throw LoadError("feature '" + spec.name + "': range on a categorical feature");
        }
        const auto r = f.at("range").get<std::vector<double>>();
        if (r.size() != 2 || r[1] < r[0]) {
          throw LoadError("feature '" + spec.name + "': range must be [min, max] with max >= min");
        }
        spec.range = ValueRange{r[0], r[1]};
      }
      specs.push_back(std::move(spec));
    }
    try {
      cfg.schema = FeatureSchema(std::move(specs));
    } catch (const ParameterError& e) {
      throw LoadError(e.what());
    }
    if (doc.contains("immutable")) {
      for (const auto& name : doc.at("immutable").get<std::vector<std::string>>()) {
        if (!cfg.schema.index_of(name)) {
          throw LoadError("immutable feature '" + name + "' is not in the schema");
        }
        cfg.schema.set_immutable(name, true);
      }
    }
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed schema config: ") + e.what());
  }
  if (cfg.schema.index_of(cfg.label_column)) {
    throw LoadError("label column '" + cfg.label_column + "' is also listed as a feature");
  }
  return cfg;
}

SchemaConfig load_schema_config(const std::filesystem::path& path) {
  try {
    return parse_schema_config(read_file(path));
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> default_test_size(std::string_view dataset_name) {
  static const std::map<std::string, std::size_t, std::less<>> kSizes = {
      {"adult", 250}, {"german", 100}, {"compas", 250}, {"fico", 250}};
  auto it = kSizes.find(dataset_name);
  if (it == kSizes.end()) return std::nullopt;
  return it->second;
}

Dataset make_dataset(std::string name, FeatureSchema schema, std::vector<Instance> rows,
                     std::vector<int> labels, std::vector<std::string> class_names,
                     std::size_t test_size, std::uint64_t seed) {
  if (rows.size() != labels.size()) {
    throw ParameterError("rows and labels differ in length");
  }
  if (class_names.size() > 2) {
    throw ParameterError("only binary classification is supported, got " +
                         std::to_string(class_names.size()) + " classes");
  }
  if (test_size > rows.size()) {
    throw ParameterError("test size " + std::to_string(test_size) + " exceeds " +
                         std::to_string(rows.size()) + " rows");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_conforms(rows[i], schema);
    if (labels[i] < 0 || labels[i] >= static_cast<int>(class_names.size())) {
      throw ParameterError("label out of range on row " + std::to_string(i));
    }
    rows[i].id = static_cast<std::int64_t>(i);
  }

  Dataset ds;
  ds.name = std::move(name);
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x5bd1e995));
  rng.shuffle(order);
  ds.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
  ds.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_size), order.end());
  std::sort(ds.test.begin(), ds.test.end());
  std::sort(ds.train.begin(), ds.train.end());

  const RangeTable fitted = RangeTable::fit(schema, rows, ds.train);
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!schema[f].categorical() && !schema[f].range) schema.set_range(f, fitted[f]);
  }
  ds.ranges = RangeTable::from_schema(schema);
  ds.schema = std::move(schema);
  ds.rows = std::move(rows);
  ds.labels = std::move(labels);
  ds.class_names = std::move(class_names);
  return ds;
}

CsvTable read_csv(std::istream& in) {
  std::ostringstream os;
  os << in.rdbuf();
  const std::string text = os.str();

  CsvTable table;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::vector<std::string> fields;
  // Skip a UTF-8 byte order mark.
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) pos = 3;
  while (true) {
    const std::size_t record_line = line;
    if (!next_record(text, pos, line, fields)) break;
    if (blank(fields)) continue;
    if (table.header.empty()) {
      table.header = fields;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw LoadError("line " + std::to_string(record_line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
    table.lines.push_back(record_line);
  }
  if (table.header.empty()) throw LoadError("CSV has no header row");
  return table;
}

Dataset load_dataset(const std::filesystem::path& csv_path, const SchemaConfig& config) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + csv_path.string());
  const std::string where = csv_path.string() + ": ";

  CsvTable table;
  try {
    table = read_csv(in);
  } catch (const LoadError& e) {
    throw LoadError(where + e.what());
  }

  FeatureSchema schema = config.schema;
  auto column_of = [&](const std::string& name) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw LoadError(where + "missing column '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  std::vector<std::size_t> columns(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) columns[f] = column_of(schema[f].name);
  const std::size_t label_col = column_of(config.label_column);

  // Categories not declared in the config are the sorted set of observed tokens.
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (!schema[f].categorical() || !schema[f].categories.empty()) continue;
    std::set<std::string> seen;
    for (const auto& r : table.rows) {
      if (!r[columns[f]].empty()) seen.insert(r[columns[f]]);
    }
    if (seen.empty()) throw LoadError(where + "no values for feature '" + schema[f].name + "'");
    schema.set_categories(f, {seen.begin(), seen.end()});
  }

  std::vector<std::string> classes = config.classes;
  if (classes.empty()) {
    std::set<std::string> seen;
    for (const auto& r : table.rows) seen.insert(r[label_col]);
    classes.assign(seen.begin(), seen.end());
  }
  if (classes.size() > 2) {
    throw LoadError(where + "label column '" + config.label_column + "' has " +
                    std::to_string(classes.size()) +
                    " classes; only binary classification is supported");
  }

  std::vector<Instance> rows;
  std::vector<int> labels;
  rows.reserve(table.rows.size());
  labels.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::string at_line = where + "line " + std::to_string(table.lines[r]) + ": ";
    Instance x;
    x.values.resize(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      try {
        x.values[f] = schema.parse_value(f, cells[columns[f]], /*allow_unknown=*/false);
      } catch (const LoadError& e) {
        throw LoadError(at_line + e.what());
      }
    }
    const std::string& label = cells[label_col];
    auto it = std::find(classes.begin(), classes.end(), label);
    if (label.empty() || it == classes.end()) {
      throw LoadError(at_line + "unknown class label '" + label + "'");
    }
    rows.push_back(std::move(x));
    labels.push_back(static_cast<int>(it - classes.begin()));
  }

  std::size_t test_size = 0;
  if (config.test_size) {
    test_size = *config.test_size;
  } else if (auto d = default_test_size(config.name)) {
    test_size = *d;
  } else {
    test_size = rows.size() / 10;
  }
  try {
    return make_dataset(config.name, std::move(schema), std::move(rows), std::move(labels),
                        std::move(classes), test_size, config.seed);
  } catch (const ParameterError& e) {
    throw LoadError(where + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_config_path) {
  return load_dataset(csv_path, load_schema_config(schema_config_path));
}

}  // namespace cfx
