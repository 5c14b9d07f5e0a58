#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cfx {

enum class FeatureKind { kContinuous, kCategorical };

struct ValueRange {
  double min = 0.0;
  double max = 0.0;

  double width() const { return max - min; }
};

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  // Categorical only. A categorical value is stored as its index in this list.
  std::vector<std::string> categories;
  // Continuous only. Declared in the schema config or fitted on the training
  // split by load_dataset.
  std::optional<ValueRange> range;
  bool immutable = false;

  bool categorical() const { return kind == FeatureKind::kCategorical; }
};

// Code stored for a categorical token outside the feature's category set.
// Only generated candidates may carry it; data files may not.
inline constexpr double kUnknownCategory = -1.0;

// Ordered feature list shared by every Instance of a dataset.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws ParameterError on duplicate names.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const { return features_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  // Throws ParameterError for unknown names.
  std::size_t require_index(std::string_view name) const;

  void set_immutable(std::string_view name, bool immutable);
  void set_range(std::size_t feature, ValueRange range);
  void set_categories(std::size_t feature, std::vector<std::string> categories);

  std::vector<std::size_t> immutable_indices() const;
  std::size_t count(FeatureKind kind) const;

  // Category index of `token`, or nullopt when it is not in the set.
  std::optional<std::size_t> category_code(std::size_t feature, std::string_view token) const;

  // Parses a cell. Continuous cells must be finite numbers; unknown
  // categorical tokens map to kUnknownCategory when allow_unknown is set and
  // throw LoadError otherwise.
  double parse_value(std::size_t feature, std::string_view token, bool allow_unknown) const;
  std::string format_value(std::size_t feature, double value) const;

  // Stable fingerprint of names, kinds and category sets. Immutability flags
  // and ranges are excluded: they do not change the model's input layout.
  std::uint64_t fingerprint() const;

 private:
  void rebuild_index();

  std::vector<FeatureSpec> features_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// One tabular example. Continuous values are raw reals, categorical values
// are category indices.
struct Instance {
  std::vector<double> values;
  std::optional<std::int64_t> id;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> view() const { return values; }

  // Value equality; ids are ignored.
  friend bool operator==(const Instance& a, const Instance& b) { return a.values == b.values; }
};

// Throws ParameterError when `x` has the wrong arity or a value that does not
// fit its feature's kind.
void check_conforms(const Instance& x, const FeatureSchema& schema);

// Per-feature (min, max) used as HEOM denominators. Categorical entries are
// unused and left at zero width.
class RangeTable {
 public:
  RangeTable() = default;
  explicit RangeTable(std::vector<ValueRange> ranges);

  // Reads the ranges stored on the schema; continuous features without a
  // range get zero width.
  static RangeTable from_schema(const FeatureSchema& schema);
  // Min/max over rows[i] for i in `indices`.
  static RangeTable fit(const FeatureSchema& schema, std::span<const Instance> rows,
                        std::span<const std::size_t> indices);

  std::size_t size() const { return ranges_.size(); }
  const ValueRange& operator[](std::size_t i) const { return ranges_[i]; }
  bool zero_width(std::size_t i) const { return !(ranges_[i].width() > 0.0); }

 private:
  std::vector<ValueRange> ranges_;
};

}  // namespace cfx
