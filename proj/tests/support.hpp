#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cfx/dataset.hpp"
#include "cfx/schema.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return CFX_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return CFX_FIXTURE_DIR; }

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cfx_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline cfx::FeatureSpec continuous(std::string name) {
  cfx::FeatureSpec f;
  f.name = std::move(name);
  f.kind = cfx::FeatureKind::kContinuous;
  return f;
}

inline cfx::FeatureSpec categorical(std::string name, std::vector<std::string> cats,
                                    bool immutable = false) {
  cfx::FeatureSpec f;
  f.name = std::move(name);
  f.kind = cfx::FeatureKind::kCategorical;
  f.categories = std::move(cats);
  f.immutable = immutable;
  return f;
}

inline cfx::Instance inst(std::vector<double> values) { return {std::move(values), std::nullopt}; }

// Two continuous features in [0, 1], label 1 iff x0 + x1 > 1, with a margin
// of 0.1 around the boundary so any linear separator reaches full accuracy.
inline cfx::Dataset linear_dataset(std::size_t n, std::uint64_t seed, std::size_t test_size = 40) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cfx::Instance> rows;
  std::vector<int> labels;
  while (rows.size() < n) {
    const double a = u(gen);
    const double b = u(gen);
    if (std::abs(a + b - 1.0) < 0.1) continue;
    rows.push_back(inst({a, b}));
    labels.push_back(a + b > 1.0 ? 1 : 0);
  }
  return cfx::make_dataset("linear", cfx::FeatureSchema({continuous("a"), continuous("b")}),
                           std::move(rows), std::move(labels), {"low", "high"}, test_size, seed);
}

// Mixed-type synthetic data: three continuous features, two categoricals
// (one immutable). The label depends on x0, x1 and the mutable categorical.
inline cfx::Dataset mixed_dataset(std::size_t n, std::uint64_t seed, std::size_t test_size = 40) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cfx::Instance> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 10.0 * u(gen);
    const double b = 100.0 * u(gen);
    const double c = u(gen);
    const double color = std::floor(3.0 * u(gen));
    const double group = std::floor(2.0 * u(gen));
    const double score = a / 10.0 + b / 100.0 + (color == 2.0 ? 0.4 : 0.0) - 1.2;
    rows.push_back(inst({a, b, c, color, group}));
    labels.push_back(score > 0.0 ? 1 : 0);
  }
  cfx::FeatureSchema schema({continuous("a"), continuous("b"), continuous("c"),
                             categorical("color", {"red", "green", "blue"}),
                             categorical("group", {"g0", "g1"}, true)});
  return cfx::make_dataset("mixed", std::move(schema), std::move(rows), std::move(labels),
                           {"no", "yes"}, test_size, seed);
}

// Independent HEOM: per-feature terms written from the definition.
inline double heom_oracle(const cfx::Instance& a, const cfx::Instance& b,
                          const cfx::FeatureSchema& schema, const cfx::RangeTable& ranges) {
  long double sum = 0.0L;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    long double d;
    if (schema[f].categorical()) {
      d = (a[f] == b[f] && a[f] >= 0.0) ? 0.0L : 1.0L;
    } else {
      const long double width = ranges[f].max - ranges[f].min;
      if (width <= 0.0L) {
        d = a[f] == b[f] ? 0.0L : 1.0L;
      } else {
        d = std::fabs(static_cast<long double>(a[f]) - b[f]) / width;
        if (d > 1.0L) d = 1.0L;
      }
    }
    sum += d * d;
  }
  return static_cast<double>(std::sqrt(sum));
}

}  // namespace testing
