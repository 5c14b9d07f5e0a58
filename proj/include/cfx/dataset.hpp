#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/schema.hpp"

namespace cfx {

// Parsed schema config file (JSON). See README for the format.
struct SchemaConfig {
  std::string name;
  FeatureSchema schema;
  std::string label_column;
  // Optional declared class order; fitted (sorted) from the data otherwise.
  std::vector<std::string> classes;
  std::optional<std::size_t> test_size;
  std::uint64_t seed = 0;
};

SchemaConfig parse_schema_config(std::string_view json_text);
SchemaConfig load_schema_config(const std::filesystem::path& path);

// Test-split sizes used for the benchmark datasets when the config does not
// set one: adult 250, german 100, compas 250, fico 250.
std::optional<std::size_t> default_test_size(std::string_view dataset_name);

struct Dataset {
  std::string name;
  FeatureSchema schema;
  RangeTable ranges;
  std::vector<Instance> rows;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  // Sorted, disjoint row indices.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t num_classes() const { return class_names.size(); }
  const Instance& row(std::size_t i) const { return rows[i]; }
};

// Builds a dataset from already encoded rows: assigns row ids, draws a seeded
// train/test split and fits continuous ranges on the training split (unless the
// schema declares them). Throws ParameterError on inconsistent inputs or more
// than two classes.
Dataset make_dataset(std::string name, FeatureSchema schema, std::vector<Instance> rows,
                     std::vector<int> labels, std::vector<std::string> class_names,
                     std::size_t test_size, std::uint64_t seed);

// Reads a header-row CSV matching the config's features plus the label column.
// Throws LoadError naming the file and line on any problem.
Dataset load_dataset(const std::filesystem::path& csv_path, const SchemaConfig& config);
Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_config_path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based physical line of each row, for error messages.
  std::vector<std::size_t> lines;
};

// Comma separated, optional double-quote quoting with "" escapes. Blank lines
// are skipped. Throws LoadError on ragged rows or unterminated quotes.
CsvTable read_csv(std::istream& in);

}  // namespace cfx
