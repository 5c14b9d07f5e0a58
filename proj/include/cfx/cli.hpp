#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfx/explainers.hpp"
#include "cfx/mcda.hpp"
#include "cfx/model.hpp"

namespace cfx {

// Everything a command needs, read from one JSON file. Relative paths are
// resolved against the file's directory.
struct RunConfig {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::filesystem::path out;
  std::optional<std::filesystem::path> model_path;  // default: out/model.bin
  std::uint64_t seed = 1;
  std::size_t neighbor_k = 5;
  DistanceMetric metric = DistanceMetric::kL1;  // explain
  std::vector<DistanceMetric> metrics = {DistanceMetric::kL1, DistanceMetric::kL2,
                                         DistanceMetric::kLinf};  // evaluate
  std::size_t instances = 30;
  std::size_t threads = 0;
  int grid = 16;  // sweep step 1/grid
  TrainConfig train;
  ExplainerConfig explainers;
  nlohmann::json source;  // the parsed file, hashed into run manifests

  std::filesystem::path model() const { return model_path ? *model_path : out / "model.bin"; }
};

// Throws ConfigError naming the offending key or path. Unknown keys are
// rejected so typos fail fast.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Entry point of the `cfx` tool: train, explain, evaluate, sweep.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cfx
