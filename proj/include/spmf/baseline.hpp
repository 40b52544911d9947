#pragma once

// Linear softmax classifier over flattened encoded images, trained with
// mini-batch Adam on the mean cross-entropy. Small enough to train in
// seconds; used to check that encodings separate action classes.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spmf/error.hpp"
#include "spmf/image.hpp"
#include "spmf/pipeline.hpp"
#include "spmf/png.hpp"
#include "spmf/rng.hpp"

namespace spmf {

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 256;
  int epochs = 250;
  int lr_halving_period = 20;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("TrainConfig: beta1 must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("TrainConfig: beta2 must be in [0,1)");
    if (!(epsilon > 0.0)) throw ConfigError("TrainConfig: epsilon must be > 0");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("TrainConfig: epochs must be >= 0");
    if (lr_halving_period < 1) throw ConfigError("TrainConfig: lr_halving_period must be >= 1");
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, learning_rate, beta1, beta2, epsilon, batch_size, epochs,
                                                lr_halving_period, seed)

// Weights are C x D row-major; row c scores class_labels[c].
struct LinearModel {
  std::size_t input_dim = 0;
  std::vector<int> class_labels;
  std::vector<double> weights;
  std::vector<double> biases;
  std::uint64_t seed = 0;

  std::size_t class_count() const noexcept { return class_labels.size(); }

  std::optional<std::size_t> class_index(int label) const {
    auto it = std::find(class_labels.begin(), class_labels.end(), label);
    if (it == class_labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - class_labels.begin());
  }

  bool operator==(const LinearModel&) const = default;
};

// He initialization for the linear layer: N(0, 2/D) weights, zero biases.
inline LinearModel init_model(std::size_t input_dim, std::vector<int> class_labels, std::uint64_t seed) {
  if (input_dim < 1) throw ArgumentError("init_model: input_dim must be >= 1");
  if (class_labels.empty()) throw ArgumentError("init_model: need at least one class");
  LinearModel m;
  m.input_dim = input_dim;
  m.class_labels = std::move(class_labels);
  m.seed = seed;
  m.weights.resize(m.class_count() * input_dim);
  m.biases.assign(m.class_count(), 0.0);
  Rng rng(splitmix64(seed));
  const double sigma = std::sqrt(2.0 / static_cast<double>(input_dim));
  for (double& w : m.weights) w = rng.normal(0.0, sigma);
  return m;
}

inline std::vector<double> logits(const LinearModel& m, std::span<const double> x) {
  if (x.size() != m.input_dim) {
    throw ArgumentError("forward: input has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(m.input_dim));
  }
  std::vector<double> z(m.class_count());
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double* w = m.weights.data() + c * m.input_dim;
    z[c] = std::inner_product(x.begin(), x.end(), w, m.biases[c]);
  }
  return z;
}

// Max-subtracted softmax.
inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

inline std::vector<double> forward(const LinearModel& m, std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw ArgumentError("forward: non-finite input");
  }
  return softmax(logits(m, x));
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Mean over rows of -sum_j y_ij log(max(yhat_ij, 1e-12)).
inline double cross_entropy(const std::vector<std::vector<double>>& y, const std::vector<std::vector<double>>& yhat) {
  if (y.empty()) throw ArgumentError("cross_entropy: empty batch");
  if (y.size() != yhat.size()) throw ArgumentError("cross_entropy: batch sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i].size() != yhat[i].size()) throw ArgumentError("cross_entropy: class counts differ");
    for (std::size_t j = 0; j < y[i].size(); ++j) {
      if (y[i][j] != 0.0) total -= y[i][j] * std::log(std::max(yhat[i][j], 1e-12));
    }
  }
  return total / static_cast<double>(y.size());
}

struct Sample {
  std::vector<double> x;  // channel bytes / 255
  int label = 0;
};

struct Gradients {
  std::vector<double> weights;
  std::vector<double> biases;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradients grad;
};

// Mean cross-entropy of the batch and its gradient:
// dL/dz = (yhat - y) / M, dL/dW = dL/dz x^T, dL/db = dL/dz.
inline LossAndGradient loss_and_gradient(const LinearModel& m, std::span<const Sample* const> batch) {
  if (batch.empty()) throw ArgumentError("loss_and_gradient: empty batch");
  const std::size_t C = m.class_count(), D = m.input_dim;
  LossAndGradient out;
  out.grad.weights.assign(C * D, 0.0);
  out.grad.biases.assign(C, 0.0);
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  for (const Sample* s : batch) {
    const auto target = m.class_index(s->label);
    if (!target) throw DataError("sample label " + std::to_string(s->label) + " is not a model class");
    const auto p = softmax(logits(m, s->x));
    out.loss -= std::log(std::max(p[*target], 1e-12)) * inv_m;
    for (std::size_t c = 0; c < C; ++c) {
      const double dz = (p[c] - (c == *target ? 1.0 : 0.0)) * inv_m;
      out.grad.biases[c] += dz;
      double* g = out.grad.weights.data() + c * D;
      for (std::size_t d = 0; d < D; ++d) g[d] += dz * s->x[d];
    }
  }
  return out;
}

// ------------------------------------------------------------------- Adam

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long long step = 0;
};

// Step-decayed rate: halves every `lr_halving_period` epochs (epochs 1-based).
inline double learning_rate_at(int epoch, const TrainConfig& cfg) {
  const int halvings = std::max(epoch - 1, 0) / cfg.lr_halving_period;
  return cfg.learning_rate * std::pow(0.5, halvings);
}

inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, int epoch,
                      const TrainConfig& cfg) {
  if (params.size() != grads.size()) throw ArgumentError("adam_step: parameter/gradient size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ArgumentError("adam_step: moment state size mismatch");
  const long long t = state.step + 1;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError("non-finite gradient at step " + std::to_string(t) + " (component " + std::to_string(i) +
                          ")");
    }
  }
  state.step = t;
  const double lr = learning_rate_at(epoch, cfg);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

// -------------------------------------------------------------- training

struct TrainResult {
  LinearModel model;
  std::vector<double> loss_history;  // mean training loss per epoch
};

// Shuffle order for one epoch: a pure function of (seed, epoch).
inline std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch))));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

inline TrainResult train(const std::vector<Sample>& samples, std::vector<int> class_labels, const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw ConfigError("train: no training samples");
  if (class_labels.empty()) throw ConfigError("train: no classes");
  const std::size_t D = samples.front().x.size();
  if (D == 0) throw DataError("train: samples have no features");
  std::vector<std::size_t> per_class(class_labels.size(), 0);
  for (const auto& s : samples) {
    if (s.x.size() != D) throw DataError("train: samples differ in feature count");
    auto it = std::find(class_labels.begin(), class_labels.end(), s.label);
    if (it == class_labels.end()) throw DataError("train: sample label " + std::to_string(s.label) + " not in class list");
    ++per_class[static_cast<std::size_t>(it - class_labels.begin())];
  }
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c] == 0) throw ConfigError("train: class " + std::to_string(class_labels[c]) + " has no samples");
  }

  TrainResult result{init_model(D, std::move(class_labels), cfg.seed), {}};
  LinearModel& model = result.model;
  AdamState w_state, b_state;
  std::vector<const Sample*> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = epoch_permutation(samples.size(), cfg.seed, epoch);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&samples[order[i]]);
      const auto lg = loss_and_gradient(model, batch);
      epoch_loss += lg.loss * static_cast<double>(batch.size());
      adam_step(model.weights, lg.grad.weights, w_state, epoch, cfg);
      adam_step(model.biases, lg.grad.biases, b_state, epoch, cfg);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(samples.size()));
  }
  return result;
}

// ------------------------------------------------------------ evaluation

struct EvalReport {
  std::vector<int> class_labels;
  // nullopt for classes with no test samples; those are left out of the average.
  std::vector<std::optional<double>> per_class_accuracy;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double average_accuracy = 0.0;
  double overall_accuracy = 0.0;
  std::size_t sample_count = 0;
  std::vector<int> excluded_classes;
};

inline int predict(const LinearModel& m, std::span<const double> x) {
  return m.class_labels[argmax(logits(m, x))];
}

inline EvalReport evaluate(const LinearModel& m, const std::vector<Sample>& samples) {
  if (samples.empty()) throw ArgumentError("evaluate: empty split");
  const std::size_t C = m.class_count();
  EvalReport r;
  r.class_labels = m.class_labels;
  r.confusion.assign(C, std::vector<std::size_t>(C, 0));
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const auto truth = m.class_index(s.label);
    if (!truth) throw DataError("evaluate: sample label " + std::to_string(s.label) + " outside the model classes");
    const std::size_t pred = argmax(logits(m, s.x));
    ++r.confusion[*truth][pred];
    correct += pred == *truth ? 1 : 0;
  }
  r.sample_count = samples.size();
  r.overall_accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const std::size_t n = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), std::size_t{0});
    if (n == 0) {
      r.per_class_accuracy.push_back(std::nullopt);
      r.excluded_classes.push_back(m.class_labels[c]);
      continue;
    }
    const double acc = static_cast<double>(r.confusion[c][c]) / static_cast<double>(n);
    r.per_class_accuracy.push_back(acc);
    sum += acc;
    ++present;
  }
  r.average_accuracy = sum / static_cast<double>(present);
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& a : r.per_class_accuracy) per_class.push_back(a ? nlohmann::json(*a) : nlohmann::json(nullptr));
  return {{"class_labels", r.class_labels},
          {"per_class_accuracy", per_class},
          {"confusion", r.confusion},
          {"average_accuracy", r.average_accuracy},
          {"overall_accuracy", r.overall_accuracy},
          {"sample_count", r.sample_count},
          {"excluded_classes", r.excluded_classes}};
}

inline std::string confusion_table(const EvalReport& r) {
  std::ostringstream os;
  os << std::setw(8) << "true\\pred";
  for (int l : r.class_labels) os << std::setw(7) << l;
  os << std::setw(9) << "acc" << '\n';
  for (std::size_t c = 0; c < r.class_labels.size(); ++c) {
    os << std::setw(9) << r.class_labels[c];
    for (std::size_t p = 0; p < r.class_labels.size(); ++p) os << std::setw(7) << r.confusion[c][p];
    if (r.per_class_accuracy[c]) {
      os << std::setw(9) << std::fixed << std::setprecision(4) << *r.per_class_accuracy[c];
    } else {
      os << std::setw(9) << "n/a";
    }
    os << '\n';
  }
  os << "average accuracy " << std::fixed << std::setprecision(4) << r.average_accuracy << " over "
     << r.class_labels.size() - r.excluded_classes.size() << " classes, " << r.sample_count << " samples\n";
  return os.str();
}

// ------------------------------------------------------------ checkpoint

// Binary layout, all little-endian:
//   "SPMFLIN1" | u32 version=1 | u32 C | u64 D | u64 seed | i32 labels[C]
//   | f64 weights[C*D] | f64 biases[C]
namespace detail {

inline constexpr char kModelMagic[8] = {'S', 'P', 'M', 'F', 'L', 'I', 'N', '1'};

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(v));
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class LeReader {
 public:
  explicit LeReader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    if (data_.size() - pos_ < sizeof(T)) throw DataError("model checkpoint is truncated");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(static_cast<std::make_unsigned_t<T>>(bits));
    }
  }

  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) throw DataError("model checkpoint is truncated");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_model(const LinearModel& m) {
  std::string out(detail::kModelMagic, sizeof(detail::kModelMagic));
  detail::put_le<std::uint32_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.class_count()));
  detail::put_le<std::uint64_t>(out, m.input_dim);
  detail::put_le<std::uint64_t>(out, m.seed);
  for (int l : m.class_labels) detail::put_le<std::int32_t>(out, l);
  for (double w : m.weights) detail::put_le<double>(out, w);
  for (double b : m.biases) detail::put_le<double>(out, b);
  return out;
}

inline LinearModel deserialize_model(std::string_view bytes) {
  detail::LeReader in(bytes);
  if (in.take(8) != std::string_view(detail::kModelMagic, 8)) throw DataError("not a model checkpoint");
  if (const auto version = in.get<std::uint32_t>(); version != 1) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  LinearModel m;
  const auto C = in.get<std::uint32_t>();
  m.input_dim = in.get<std::uint64_t>();
  m.seed = in.get<std::uint64_t>();
  // Sizes must match the remaining payload exactly before allocating.
  const std::uint64_t expect = std::uint64_t{C} * 4 + (std::uint64_t{C} * m.input_dim + C) * 8;
  if (C == 0 || m.input_dim == 0 || m.input_dim > (std::uint64_t{1} << 32) || expect != in.remaining()) {
    throw DataError("model checkpoint dimensions do not match its size");
  }
  m.class_labels.resize(C);
  for (auto& l : m.class_labels) l = in.get<std::int32_t>();
  m.weights.resize(std::size_t{C} * m.input_dim);
  for (auto& w : m.weights) w = in.get<double>();
  m.biases.resize(C);
  for (auto& b : m.biases) b = in.get<double>();
  return m;
}

inline void save_model(const fs::path& path, const LinearModel& m, const TrainConfig& cfg, std::size_t image_w,
                       std::size_t image_h) {
  {
    const std::string bytes = serialize_model(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  nlohmann::json sidecar = {{"train_config", cfg},
                            {"input_dim", m.input_dim},
                            {"image_width", image_w},
                            {"image_height", image_h},
                            {"class_labels", m.class_labels}};
  std::ofstream side(fs::path(path.string() + ".json"), std::ios::trunc);
  side << sidecar.dump(2) << '\n';
}

inline LinearModel load_model(const fs::path& path) {
  return deserialize_model(read_text_file(path));
}

// ------------------------------------------------------------ corpus I/O

inline std::vector<double> image_features(const SpmfImage& img) {
  std::vector<double> x;
  x.reserve(img.pixels.size() * 3);
  for (const auto& p : img.pixels) {
    x.push_back(p.r / 255.0);
    x.push_back(p.g / 255.0);
    x.push_back(p.b / 255.0);
  }
  return x;
}

// Loads the ok rows of an index whose split matches ("all" = any split).
// Image paths resolve against the index file's directory.
inline std::vector<Sample> load_split_samples(const fs::path& index_path, const std::string& split) {
  std::vector<Sample> out;
  const fs::path root = index_path.parent_path();
  for (const auto& row : read_index(index_path)) {
    if (!row.ok() || (split != "all" && row.split != split)) continue;
    out.push_back({image_features(read_png(root / row.path)), row.label});
  }
  return out;
}

inline std::vector<int> distinct_labels(const std::vector<Sample>& samples) {
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

}  // namespace spmf
