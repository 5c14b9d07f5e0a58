#include "cfx/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cfx/error.hpp"
#include "cfx/hash.hpp"
#include "cfx/rng.hpp"

namespace cfx {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host byte order; big-endian hosts need swapping");

void TrainConfig::validate() const {
  for (std::size_t w : hidden) {
    if (w < kMinHiddenWidth || w > kMaxHiddenWidth) {
      throw ParameterError("hidden width " + std::to_string(w) + " outside [16, 128]");
    }
  }
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (batch_size < 1) throw ParameterError("batch size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning rate must be finite and >= 0");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must be in [0, 1)");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ParameterError("validation fraction must be in [0, 1)");
  }
}

// ---------------------------------------------------------------- Encoder

Encoder::Encoder(const FeatureSchema& schema, const RangeTable& ranges) {
  std::vector<Slot> slots(schema.size());
  std::size_t offset = 0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    Slot& s = slots[f];
    s.offset = offset;
    s.categorical = schema[f].categorical();
    if (s.categorical) {
      s.width = schema[f].categories.size();
    } else {
      s.width = 1;
      s.min = ranges[f].min;
      s.scale = ranges.zero_width(f) ? 0.0 : 1.0 / ranges[f].width();
    }
    offset += s.width;
  }
  *this = Encoder(std::move(slots));
}

Encoder::Encoder(std::vector<Slot> slots) : slots_(std::move(slots)) {
  input_dim_ = 0;
  for (const Slot& s : slots_) {
    if (s.offset != input_dim_ || s.width == 0 || (!s.categorical && s.width != 1)) {
      throw ParameterError("inconsistent encoder slot layout");
    }
    input_dim_ += s.width;
  }
}

void Encoder::encode(std::span<const double> values, std::vector<Active>& out) const {
  out.clear();
  for (std::size_t f = 0; f < slots_.size(); ++f) {
    const Slot& s = slots_[f];
    if (s.categorical) {
      const double code = values[f];
      if (code >= 0 && code < static_cast<double>(s.width)) {
        out.push_back({s.offset + static_cast<std::size_t>(code), 1.0});
      }
    } else {
      out.push_back({s.offset, (values[f] - s.min) * s.scale});
    }
  }
}

std::vector<double> Encoder::encode_dense(std::span<const double> values) const {
  std::vector<Active> active;
  encode(values, active);
  std::vector<double> dense(input_dim_, 0.0);
  for (const auto& a : active) dense[a.index] = a.value;
  return dense;
}

bool operator==(const Encoder& a, const Encoder& b) {
  if (a.slots_.size() != b.slots_.size()) return false;
  for (std::size_t i = 0; i < a.slots_.size(); ++i) {
    const auto& x = a.slots_[i];
    const auto& y = b.slots_[i];
    if (x.offset != y.offset || x.width != y.width || x.categorical != y.categorical ||
        std::bit_cast<std::uint64_t>(x.min) != std::bit_cast<std::uint64_t>(y.min) ||
        std::bit_cast<std::uint64_t>(x.scale) != std::bit_cast<std::uint64_t>(y.scale)) {
      return false;
    }
  }
  return true;
}

// ------------------------------------------------------------------ Model

struct Model::Activations {
  std::vector<Encoder::Active> input;
  std::vector<double> pre1, h1, pre2, h2, logits, proba;
};

namespace {

void softmax(std::span<const double> logits, std::vector<double>& out) {
  out.resize(logits.size());
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

void dense_forward(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.resize(layer.outputs);
  for (std::size_t j = 0; j < layer.outputs; ++j) {
    const double* w = layer.weights.data() + j * layer.inputs;
    double sum = layer.bias[j];
    for (std::size_t i = 0; i < layer.inputs; ++i) sum += w[i] * in[i];
    out[j] = sum;
  }
}

void sparse_forward(const DenseLayer& layer, std::span<const Encoder::Active> in,
                    std::vector<double>& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  for (const auto& a : in) {
    for (std::size_t j = 0; j < layer.outputs; ++j) {
      out[j] += layer.weights[j * layer.inputs + a.index] * a.value;
    }
  }
}

void relu(std::span<const double> pre, std::vector<double>& out) {
  out.resize(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

// out = W^T g, masked by pre > 0.
void backprop_hidden(const DenseLayer& layer, std::span<const double> grad_out,
                     std::span<const double> pre_in, std::vector<double>& grad_in) {
  grad_in.assign(layer.inputs, 0.0);
  for (std::size_t j = 0; j < layer.outputs; ++j) {
    const double g = grad_out[j];
    if (g == 0.0) continue;
    const double* w = layer.weights.data() + j * layer.inputs;
    for (std::size_t i = 0; i < layer.inputs; ++i) grad_in[i] += w[i] * g;
  }
  for (std::size_t i = 0; i < layer.inputs; ++i) {
    if (!(pre_in[i] > 0.0)) grad_in[i] = 0.0;
  }
}

}  // namespace

int argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

Model::Model(Encoder encoder, std::vector<DenseLayer> layers, std::vector<std::string> class_names,
             std::uint64_t schema_fingerprint)
    : encoder_(std::move(encoder)),
      layers_(std::move(layers)),
      class_names_(std::move(class_names)),
      schema_fingerprint_(schema_fingerprint) {
  if (layers_.size() != 3) throw ParameterError("model needs exactly two hidden layers");
  std::size_t expected_in = encoder_.input_dim();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.inputs != expected_in || layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs) {
      throw ParameterError("layer " + std::to_string(l) + " has inconsistent dimensions");
    }
    if (l < 2 && (layer.outputs < kMinHiddenWidth || layer.outputs > kMaxHiddenWidth)) {
      throw ParameterError("hidden width " + std::to_string(layer.outputs) + " outside [16, 128]");
    }
    expected_in = layer.outputs;
  }
  if (layers_[2].outputs != class_names_.size() || class_names_.size() < 2) {
    throw ParameterError("output layer width must equal the number of classes (>= 2)");
  }
}

void Model::forward(std::span<const double> values, Activations& act) const {
  encoder_.encode(values, act.input);
  sparse_forward(layers_[0], act.input, act.pre1);
  relu(act.pre1, act.h1);
  dense_forward(layers_[1], act.h1, act.pre2);
  relu(act.pre2, act.h2);
  dense_forward(layers_[2], act.h2, act.logits);
  softmax(act.logits, act.proba);
}

std::vector<double> Model::predict_proba(const Instance& x) const {
  Activations act;
  forward(x.view(), act);
  return std::move(act.proba);
}

int Model::predict(const Instance& x) const { return argmax(predict_proba(x)); }

double Model::probability(const Instance& x, int cls) const {
  return predict_proba(x).at(static_cast<std::size_t>(cls));
}

std::vector<double> Model::probability_gradient(const Instance& x, int cls,
                                               std::vector<double>* proba) const {
  Activations act;
  forward(x.view(), act);
  if (proba) *proba = act.proba;
  const auto c = static_cast<std::size_t>(cls);
  // d p_c / d logit_k = p_c (delta_ck - p_k)
  std::vector<double> g_logits(act.proba.size());
  for (std::size_t k = 0; k < g_logits.size(); ++k) {
    g_logits[k] = act.proba[c] * ((k == c ? 1.0 : 0.0) - act.proba[k]);
  }
  std::vector<double> g2;
  std::vector<double> g1;
  backprop_hidden(layers_[2], g_logits, act.pre2, g2);
  backprop_hidden(layers_[1], g2, act.pre1, g1);

  const DenseLayer& first = layers_[0];
  std::vector<double> grad(encoder_.num_features(), 0.0);
  for (std::size_t f = 0; f < grad.size(); ++f) {
    const auto& slot = encoder_.slots()[f];
    if (slot.categorical) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < first.outputs; ++j) {
      sum += first.weights[j * first.inputs + slot.offset] * g1[j];
    }
    grad[f] = sum * slot.scale;
  }
  return grad;
}

bool operator==(const Model& a, const Model& b) {
  if (!(a.encoder_ == b.encoder_) || a.class_names_ != b.class_names_ ||
      a.schema_fingerprint_ != b.schema_fingerprint_ || a.layers_.size() != b.layers_.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    const auto& x = a.layers_[l];
    const auto& y = b.layers_[l];
    if (x.inputs != y.inputs || x.outputs != y.outputs) return false;
    // Bitwise comparison: NaN payloads and signed zeros must survive a round trip.
    if (std::memcmp(x.weights.data(), y.weights.data(), x.weights.size() * sizeof(double)) != 0 ||
        std::memcmp(x.bias.data(), y.bias.data(), x.bias.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

// --------------------------------------------------------------- Training

namespace {

DenseLayer init_layer(std::size_t inputs, std::size_t outputs, Rng& rng) {
  DenseLayer layer{inputs, outputs, std::vector<double>(inputs * outputs),
                   std::vector<double>(outputs, 0.0)};
  const double limit = std::sqrt(6.0 / static_cast<double>(inputs));
  for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  return layer;
}

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  explicit Gradients(const std::vector<DenseLayer>& layers) {
    for (const auto& l : layers) {
      weights.emplace_back(l.weights.size(), 0.0);
      bias.emplace_back(l.bias.size(), 0.0);
    }
  }

  void clear() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
  }
};

}  // namespace

double accuracy(const Model& model, const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : rows) {
    if (model.predict(data.rows[r]) == data.labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

Model train(const Dataset& data, const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  if (data.train.empty()) throw ParameterError("training split is empty");
  if (data.num_classes() != 2) {
    throw ParameterError("training needs a binary target, got " +
                         std::to_string(data.num_classes()) + " classes");
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> fit_rows = data.train;
  std::vector<std::size_t> val_rows;
  if (cfg.validation_fraction > 0.0) {
    rng.shuffle(fit_rows);
    const auto n_val = static_cast<std::size_t>(
        std::llround(cfg.validation_fraction * static_cast<double>(fit_rows.size())));
    if (n_val >= fit_rows.size()) throw ParameterError("validation split leaves no training rows");
    val_rows.assign(fit_rows.end() - static_cast<std::ptrdiff_t>(n_val), fit_rows.end());
    fit_rows.resize(fit_rows.size() - n_val);
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(fit_rows.begin(), fit_rows.end());
  }

  Encoder encoder(data.schema, data.ranges);
  std::vector<DenseLayer> layers;
  layers.push_back(init_layer(encoder.input_dim(), cfg.hidden[0], rng));
  layers.push_back(init_layer(cfg.hidden[0], cfg.hidden[1], rng));
  layers.push_back(init_layer(cfg.hidden[1], data.num_classes(), rng));

  std::vector<std::vector<Encoder::Active>> encoded(data.rows.size());
  for (std::size_t r : fit_rows) encoder.encode(data.rows[r].view(), encoded[r]);

  Gradients grads(layers);
  std::vector<double> pre1, h1, pre2, h2, logits, proba, mask1, mask2, g_logits, g2, g1;
  const double keep = 1.0 - cfg.dropout;
  double epoch_loss = 0.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(fit_rows);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < fit_rows.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(fit_rows.size(), start + cfg.batch_size);
      grads.clear();
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t r = fit_rows[b];
        const auto& input = encoded[r];
        sparse_forward(layers[0], input, pre1);
        relu(pre1, h1);
        mask1.assign(h1.size(), 1.0);
        if (cfg.dropout > 0.0) {
          for (std::size_t i = 0; i < h1.size(); ++i) {
            mask1[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
            h1[i] *= mask1[i];
          }
        }
        dense_forward(layers[1], h1, pre2);
        relu(pre2, h2);
        mask2.assign(h2.size(), 1.0);
        if (cfg.dropout > 0.0) {
          for (std::size_t i = 0; i < h2.size(); ++i) {
            mask2[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
            h2[i] *= mask2[i];
          }
        }
        dense_forward(layers[2], h2, logits);
        softmax(logits, proba);
        const auto y = static_cast<std::size_t>(data.labels[r]);
        epoch_loss += -std::log(std::max(proba[y], 1e-300));

        g_logits.resize(proba.size());
        for (std::size_t k = 0; k < proba.size(); ++k) g_logits[k] = proba[k] - (k == y ? 1.0 : 0.0);

        // Output layer.
        for (std::size_t j = 0; j < layers[2].outputs; ++j) {
          grads.bias[2][j] += g_logits[j];
          double* gw = grads.weights[2].data() + j * layers[2].inputs;
          for (std::size_t i = 0; i < layers[2].inputs; ++i) gw[i] += g_logits[j] * h2[i];
        }
        backprop_hidden(layers[2], g_logits, pre2, g2);
        for (std::size_t i = 0; i < g2.size(); ++i) g2[i] *= mask2[i];

        for (std::size_t j = 0; j < layers[1].outputs; ++j) {
          if (g2[j] == 0.0) continue;
          grads.bias[1][j] += g2[j];
          double* gw = grads.weights[1].data() + j * layers[1].inputs;
          for (std::size_t i = 0; i < layers[1].inputs; ++i) gw[i] += g2[j] * h1[i];
        }
        backprop_hidden(layers[1], g2, pre1, g1);
        for (std::size_t i = 0; i < g1.size(); ++i) g1[i] *= mask1[i];

        for (std::size_t j = 0; j < layers[0].outputs; ++j) {
          if (g1[j] == 0.0) continue;
          grads.bias[0][j] += g1[j];
          double* gw = grads.weights[0].data() + j * layers[0].inputs;
          for (const auto& a : input) gw[a.index] += g1[j] * a.value;
        }
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
          layers[l].weights[i] -= step * grads.weights[l][i];
        }
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
          layers[l].bias[i] -= step * grads.bias[l][i];
        }
      }
    }
    epoch_loss /= static_cast<double>(fit_rows.size());
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("non-finite training loss in epoch " + std::to_string(epoch + 1) +
                          " (learning rate " + std::to_string(cfg.learning_rate) + ")");
    }
  }

  Model model(std::move(encoder), std::move(layers), data.class_names, data.schema.fingerprint());
  if (report) {
    std::sort(fit_rows.begin(), fit_rows.end());
    report->train_accuracy = accuracy(model, data, fit_rows);
    report->validation_accuracy =
        val_rows.empty() ? std::nullopt : std::optional<double>(accuracy(model, data, val_rows));
    report->final_loss = epoch_loss;
    report->train_rows = fit_rows.size();
    report->validation_rows = val_rows.size();
  }
  return model;
}

// ---------------------------------------------------------- Serialization

namespace {

constexpr char kMagic[8] = {'C', 'F', 'X', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_bytes(std::string_view s) { out_.append(s); }
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string get_string() { return std::string(get_bytes(get<std::uint32_t>())); }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw ModelFormatError(ModelFormatError::Kind::kCorrupt, "model file is truncated");
    }
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const Model& model) {
  Writer w;
  w.put_bytes(std::string_view(kMagic, sizeof kMagic));
  w.put(kFormatVersion);
  w.put(model.schema_fingerprint());
  const auto& slots = model.encoder().slots();
  w.put(static_cast<std::uint32_t>(slots.size()));
  for (const auto& s : slots) {
    w.put(static_cast<std::uint8_t>(s.categorical ? 1 : 0));
    w.put(static_cast<std::uint32_t>(s.offset));
    w.put(static_cast<std::uint32_t>(s.width));
    w.put(s.min);
    w.put(s.scale);
  }
  w.put(static_cast<std::uint32_t>(model.class_names().size()));
  for (const auto& c : model.class_names()) w.put_string(c);
  w.put(static_cast<std::uint32_t>(model.layers().size()));
  for (const auto& layer : model.layers()) {
    w.put(static_cast<std::uint32_t>(layer.inputs));
    w.put(static_cast<std::uint32_t>(layer.outputs));
    for (double v : layer.weights) w.put(v);
    for (double v : layer.bias) w.put(v);
  }
  const std::uint64_t checksum = Fnv1a().add(std::string_view(w.str())).value();
  w.put(checksum);
  return std::move(w.str());
}

Model deserialize_model(std::string_view bytes) {
  using Kind = ModelFormatError::Kind;
  Reader r(bytes);
  if (r.get_bytes(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw ModelFormatError(Kind::kCorrupt, "not a model file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kFormatVersion) {
    throw ModelFormatError(Kind::kVersionMismatch, "model format version " +
                                                       std::to_string(version) + ", expected " +
                                                       std::to_string(kFormatVersion));
  }
  if (bytes.size() < sizeof(std::uint64_t) + sizeof kMagic) {
    throw ModelFormatError(Kind::kCorrupt, "model file is truncated");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
  if (Fnv1a().add(body).value() != stored) {
    throw ModelFormatError(Kind::kCorrupt, "model file checksum mismatch (truncated or corrupt)");
  }

  const auto fingerprint = r.get<std::uint64_t>();
  const auto n_slots = r.get<std::uint32_t>();
  if (n_slots > r.remaining()) throw ModelFormatError(Kind::kCorrupt, "implausible feature count");
  std::vector<Encoder::Slot> slots(n_slots);
  for (auto& s : slots) {
    s.categorical = r.get<std::uint8_t>() != 0;
    s.offset = r.get<std::uint32_t>();
    s.width = r.get<std::uint32_t>();
    s.min = r.get<double>();
    s.scale = r.get<double>();
  }
  const auto n_classes = r.get<std::uint32_t>();
  if (n_classes > r.remaining()) throw ModelFormatError(Kind::kCorrupt, "implausible class count");
  std::vector<std::string> classes(n_classes);
  for (auto& c : classes) c = r.get_string();
  const auto n_layers = r.get<std::uint32_t>();
  if (n_layers > r.remaining()) throw ModelFormatError(Kind::kCorrupt, "implausible layer count");
  std::vector<DenseLayer> layers(n_layers);
  for (auto& layer : layers) {
    layer.inputs = r.get<std::uint32_t>();
    layer.outputs = r.get<std::uint32_t>();
    const std::size_t n = layer.inputs * layer.outputs;
    if ((n + layer.outputs) * sizeof(double) > r.remaining()) {
      throw ModelFormatError(Kind::kCorrupt, "model file is truncated");
    }
    layer.weights.resize(n);
    for (double& v : layer.weights) v = r.get<double>();
    layer.bias.resize(layer.outputs);
    for (double& v : layer.bias) v = r.get<double>();
  }
  if (r.position() != body.size()) {
    throw ModelFormatError(Kind::kCorrupt, "trailing bytes in model file");
  }
  try {
    return Model(Encoder(std::move(slots)), std::move(layers), std::move(classes), fingerprint);
  } catch (const ParameterError& e) {
    throw ModelFormatError(Kind::kCorrupt, std::string("invalid model structure: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write model file " + path.string());
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing model file " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return deserialize_model(os.str());
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(e.kind(), path.string() + ": " + e.what());
  }
}

Model load_model(const std::filesystem::path& path, const FeatureSchema& schema) {
  Model m = load_model(path);
  if (m.schema_fingerprint() != schema.fingerprint()) {
    throw ModelFormatError(ModelFormatError::Kind::kSchemaMismatch,
                           path.string() + ": model was trained on a different schema");
  }
  return m;
}

}  // namespace cfx
