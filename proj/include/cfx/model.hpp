#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/dataset.hpp"
#include "cfx/schema.hpp"

namespace cfx {

inline constexpr std::size_t kMinHiddenWidth = 16;
inline constexpr std::size_t kMaxHiddenWidth = 128;

struct TrainConfig {
  std::array<std::size_t, 2> hidden{64, 32};
  double learning_rate = 0.05;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double dropout = 0.1;
  std::uint64_t seed = 1;
  // Share of the training split held out to report validation accuracy.
  double validation_fraction = 0.2;

  // Throws ParameterError on out-of-domain values.
  void validate() const;
};

struct TrainReport {
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
  double final_loss = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
};

// Maps raw feature values to network inputs: one-hot for categorical
// features, min-max scaling for continuous ones. An unknown category encodes
// as all zeros.
class Encoder {
 public:
  struct Slot {
    std::size_t offset = 0;
    std::size_t width = 1;  // number of network inputs
    bool categorical = false;
    double min = 0.0;
    double scale = 0.0;  // 1 / (max - min); 0 for zero-width ranges
  };

  // Non-zero network input.
  struct Active {
    std::size_t index;
    double value;
  };

  Encoder() = default;
  Encoder(const FeatureSchema& schema, const RangeTable& ranges);
  explicit Encoder(std::vector<Slot> slots);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_features() const { return slots_.size(); }
  const std::vector<Slot>& slots() const { return slots_; }

  // Sparse encoding: one entry per continuous feature, one per known category.
  void encode(std::span<const double> values, std::vector<Active>& out) const;
  std::vector<double> encode_dense(std::span<const double> values) const;

  friend bool operator==(const Encoder& a, const Encoder& b);

 private:
  std::vector<Slot> slots_;
  std::size_t input_dim_ = 0;
};

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feed-forward classifier: input -> ReLU hidden -> ReLU hidden -> softmax.
// Immutable once built; every const member is safe to call concurrently.
class Model {
 public:
  Model() = default;
  // Throws ParameterError unless there are exactly three chained layers, the
  // hidden widths lie in [16, 128] and the output width equals the class count.
  Model(Encoder encoder, std::vector<DenseLayer> layers, std::vector<std::string> class_names,
        std::uint64_t schema_fingerprint);

  std::vector<double> predict_proba(const Instance& x) const;
  int predict(const Instance& x) const;
  double probability(const Instance& x, int cls) const;

  // d probability(x, cls) / d x[f] in raw feature units for continuous
  // features; categorical entries are zero. When `proba` is given it receives
  // predict_proba(x) from the same forward pass.
  std::vector<double> probability_gradient(const Instance& x, int cls,
                                           std::vector<double>* proba = nullptr) const;

  const Encoder& encoder() const { return encoder_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  std::size_t num_classes() const { return class_names_.size(); }
  std::uint64_t schema_fingerprint() const { return schema_fingerprint_; }

  friend bool operator==(const Model& a, const Model& b);

 private:
  struct Activations;
  void forward(std::span<const double> values, Activations& act) const;

  Encoder encoder_;
  std::vector<DenseLayer> layers_;
  std::vector<std::string> class_names_;
  std::uint64_t schema_fingerprint_ = 0;
};

// Index of the largest entry; the first one wins ties.
int argmax(std::span<const double> values);

// Mini-batch gradient descent on cross-entropy with dropout after each hidden
// layer. Deterministic for a given seed. Throws TrainingError when the loss
// becomes non-finite.
Model train(const Dataset& data, const TrainConfig& cfg, TrainReport* report = nullptr);

// Fraction of `rows` whose prediction equals the dataset label.
double accuracy(const Model& model, const Dataset& data, std::span<const std::size_t> rows);

// Binary model file; layout documented in README. Every double is stored
// bit-exactly, so load(save(m)) == m.
std::string serialize_model(const Model& model);
// Throws ModelFormatError (kCorrupt / kVersionMismatch).
Model deserialize_model(std::string_view bytes);
void save_model(const Model& model, const std::filesystem::path& path);
// Throws LoadError when the file cannot be read, ModelFormatError otherwise.
Model load_model(const std::filesystem::path& path);
// As load_model, additionally rejecting files built for a different schema.
Model load_model(const std::filesystem::path& path, const FeatureSchema& schema);

}  // namespace cfx
