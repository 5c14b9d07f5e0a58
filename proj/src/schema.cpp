#include "cfx/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "cfx/error.hpp"
#include "cfx/hash.hpp"

namespace cfx {

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  rebuild_index();
}

void FeatureSchema::rebuild_index() {
  by_name_.clear();
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!by_name_.emplace(features_[i].name, i).second) {
      throw ParameterError("duplicate feature name '" + features_[i].name + "'");
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::require_index(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw ParameterError("unknown feature '" + std::string(name) + "'");
  return *idx;
}

void FeatureSchema::set_immutable(std::string_view name, bool immutable) {
  features_[require_index(name)].immutable = immutable;
}

void FeatureSchema::set_range(std::size_t feature, ValueRange range) {
  features_.at(feature).range = range;
}

void FeatureSchema::set_categories(std::size_t feature, std::vector<std::string> categories) {
  features_.at(feature).categories = std::move(categories);
}

std::vector<std::size_t> FeatureSchema::immutable_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].immutable) out.push_back(i);
  }
  return out;
}

std::size_t FeatureSchema::count(FeatureKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      features_.begin(), features_.end(), [kind](const FeatureSpec& f) { return f.kind == kind; }));
}

std::optional<std::size_t> FeatureSchema::category_code(std::size_t feature,
                                                        std::string_view token) const {
  const auto& cats = features_[feature].categories;
  auto it = std::find(cats.begin(), cats.end(), token);
  if (it == cats.end()) return std::nullopt;
  return static_cast<std::size_t>(it - cats.begin());
}

double FeatureSchema::parse_value(std::size_t feature, std::string_view token,
                                  bool allow_unknown) const {
  const FeatureSpec& spec = features_[feature];
  if (token.empty()) {
    throw LoadError("empty value for feature '" + spec.name + "'");
  }
  if (spec.categorical()) {
    if (auto code = category_code(feature, token)) return static_cast<double>(*code);
    if (allow_unknown) return kUnknownCategory;
    throw LoadError("unknown category '" + std::string(token) + "' for feature '" + spec.name +
                    "'");
  }
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw LoadError("unparseable numeric value '" + std::string(token) + "' for feature '" +
                    spec.name + "'");
  }
  return value;
}

std::string FeatureSchema::format_value(std::size_t feature, double value) const {
  const FeatureSpec& spec = features_[feature];
  if (spec.categorical()) {
    const auto code = static_cast<long long>(value);
    if (value < 0 || code >= static_cast<long long>(spec.categories.size())) return "<unknown>";
    return spec.categories[static_cast<std::size_t>(code)];
  }
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << value;
  return os.str();
}

std::uint64_t FeatureSchema::fingerprint() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(features_.size()));
  for (const auto& f : features_) {
    h.add(f.name).add(std::string_view("\x1f"));
    h.add(static_cast<std::uint64_t>(f.kind));
    for (const auto& c : f.categories) h.add(c).add(std::string_view("\x1e"));
  }
  return h.value();
}

void check_conforms(const Instance& x, const FeatureSchema& schema) {
  if (x.size() != schema.size()) {
    throw ParameterError("instance has " + std::to_string(x.size()) + " values, schema has " +
                         std::to_string(schema.size()) + " features");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const double v = x[i];
    if (!std::isfinite(v)) {
      throw ParameterError("non-finite value for feature '" + schema[i].name + "'");
    }
    if (schema[i].categorical() && v != kUnknownCategory &&
        (v < 0 || v != std::floor(v) || v >= static_cast<double>(schema[i].categories.size()))) {
      throw ParameterError("invalid category code for feature '" + schema[i].name + "'");
    }
  }
}

RangeTable::RangeTable(std::vector<ValueRange> ranges) : ranges_(std::move(ranges)) {
  for (const auto& r : ranges_) {
    if (r.max < r.min) throw ParameterError("range max below min");
  }
}

RangeTable RangeTable::from_schema(const FeatureSchema& schema) {
  std::vector<ValueRange> ranges(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!schema[i].categorical() && schema[i].range) ranges[i] = *schema[i].range;
  }
  return RangeTable(std::move(ranges));
}

RangeTable RangeTable::fit(const FeatureSchema& schema, std::span<const Instance> rows,
                           std::span<const std::size_t> indices) {
  std::vector<ValueRange> ranges(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].categorical() || indices.empty()) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t idx : indices) {
      lo = std::min(lo, rows[idx][f]);
      hi = std::max(hi, rows[idx][f]);
    }
    ranges[f] = {lo, hi};
  }
  return RangeTable(std::move(ranges));
}

}  // namespace cfx
