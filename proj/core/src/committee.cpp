#include "agrifid/committee.hpp"

#include <cmath>
#include <numeric>

#include "agrifid/error.hpp"
#include "agrifid/matrix_io.hpp"
#include "agrifid/random.hpp"

namespace agrifid {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double label_value(ClassLabel c) { return c == ClassLabel::Unhealthy ? 1.0 : 0.0; }

std::vector<double> gaussian_vector(std::size_t n, double stddev, std::uint64_t key) {
  SplitMix64 rng(key);
  std::vector<double> v(n);
  for (auto& x : v) x = stddev * rng.normal();
  return v;
}

std::vector<double> json_reals(const nlohmann::json& j, const char* field, std::size_t expected) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw ConfigError(std::string("model file lacks array field '") + field + "'");
  }
  auto v = j.at(field).get<std::vector<double>>();
  if (v.size() != expected) {
    throw ConfigError(std::string("model field '") + field + "' has " + std::to_string(v.size()) +
                      " values, expected " + std::to_string(expected));
  }
  return v;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " contains non-finite values");
  }
}

// Flattened parameters plus the forward/backward rules needed by SGD.
struct LinearParams {
  std::vector<double> w;
  double b = 0.0;

  double logit(std::span<const double> x) const {
    return std::inner_product(w.begin(), w.end(), x.begin(), b);
  }
};

struct MlpParams {
  std::size_t n = 0;
  std::size_t h = 0;
  std::vector<double> w1, b1, w2;
  double b2 = 0.0;

  double forward(std::span<const double> x, std::span<double> hidden) const {
    double z = b2;
    for (std::size_t j = 0; j < h; ++j) {
      const double* row = w1.data() + j * n;
      const double a = std::inner_product(row, row + n, x.begin(), b1[j]);
      hidden[j] = std::tanh(a);
      z += w2[j] * hidden[j];
    }
    return z;
  }
};

}  // namespace

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string_view to_string(ClassLabel label) {
  return label == ClassLabel::Unhealthy ? "Unhealthy" : "Healthy";
}

ClassLabel parse_label(std::string_view text) {
  if (text == "Healthy" || text == "0") return ClassLabel::Healthy;
  if (text == "Unhealthy" || text == "1") return ClassLabel::Unhealthy;
  throw ArgumentError("unknown class label '" + std::string(text) + "'");
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Linear ? "linear" : "mlp"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "linear") return ModelKind::Linear;
  if (text == "mlp") return ModelKind::Mlp;
  throw ArgumentError("unknown model kind '" + std::string(text) + "' (expected linear or mlp)");
}

void Classifier::require_input(const Matrix& x) const {
  require_same_shape(x.shape(), input_shape(), "classifier input");
}

std::array<double, 2> Classifier::predict_proba(const Matrix& x) const {
  const double z = logit(x);
  return {logistic(-z), logistic(z)};
}

double Classifier::probability(const Matrix& x, ClassLabel c) const {
  return predict_proba(x)[static_cast<std::size_t>(c)];
}

double Classifier::score(const Matrix& x, ClassLabel c) const {
  const double z = logit(x);
  return c == ClassLabel::Unhealthy ? z : -z;
}

Matrix Classifier::score_gradient(const Matrix& x, ClassLabel c) const {
  Matrix g = logit_gradient(x);
  if (c == ClassLabel::Healthy) {
    for (auto& v : g.values()) v = -v;
  }
  return g;
}

Matrix Classifier::input_gradient(const Matrix& x, ClassLabel c) const {
  const double p = logistic(logit(x));
  const double scale = c == ClassLabel::Unhealthy ? p * (1.0 - p) : -p * (1.0 - p);
  Matrix g = logit_gradient(x);
  for (auto& v : g.values()) v *= scale;
  return g;
}

LinearModel::LinearModel(Matrix weights, double bias, std::string id, std::uint64_t training_seed)
    : Classifier(std::move(id), training_seed), weights_(std::move(weights)), bias_(bias) {
  if (weights_.empty()) throw DimensionError("linear model needs a non-empty weight matrix");
  require_finite(weights_.values(), "linear model weights");
  if (!std::isfinite(bias_)) throw ArgumentError("linear model bias is not finite");
}

double LinearModel::logit(const Matrix& x) const {
  require_input(x);
  const auto w = weights_.values();
  const auto v = x.values();
  return std::inner_product(w.begin(), w.end(), v.begin(), bias_);
}

Matrix LinearModel::logit_gradient(const Matrix& x) const {
  require_input(x);
  return weights_;
}

nlohmann::json LinearModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "agrifid-model";
  j["version"] = 1;
  j["kind"] = "linear";
  j["id"] = id();
  j["training_seed"] = training_seed();
  j["shape"] = {weights_.rows(), weights_.cols()};
  j["weights"] = std::vector<double>(weights_.values().begin(), weights_.values().end());
  j["bias"] = bias_;
  return j;
}

TinyMlp::TinyMlp(Shape input_shape, std::size_t hidden, std::vector<double> hidden_weights,
                 std::vector<double> hidden_bias, std::vector<double> output_weights,
                 double output_bias, std::string id, std::uint64_t training_seed)
    : Classifier(std::move(id), training_seed),
      shape_(input_shape),
      hidden_(hidden),
      w1_(std::move(hidden_weights)),
      b1_(std::move(hidden_bias)),
      w2_(std::move(output_weights)),
      b2_(output_bias) {
  if (hidden_ == 0) throw ArgumentError("TinyMlp needs at least one hidden unit");
  if (shape_.size() == 0) throw DimensionError("TinyMlp needs a non-empty input shape");
  if (w1_.size() != hidden_ * shape_.size() || b1_.size() != hidden_ || w2_.size() != hidden_) {
    throw DimensionError("TinyMlp parameter sizes do not match H=" + std::to_string(hidden_) +
                         " and input " + agrifid::to_string(shape_));
  }
  require_finite(w1_, "TinyMlp hidden weights");
  require_finite(b1_, "TinyMlp hidden bias");
  require_finite(w2_, "TinyMlp output weights");
  if (!std::isfinite(b2_)) throw ArgumentError("TinyMlp output bias is not finite");
}

void TinyMlp::hidden_activations(std::span<const double> x, std::span<double> h) const {
  const std::size_t n = shape_.size();
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double* row = w1_.data() + j * n;
    h[j] = std::tanh(std::inner_product(row, row + n, x.begin(), b1_[j]));
  }
}

double TinyMlp::logit(const Matrix& x) const {
  require_input(x);
  std::vector<double> h(hidden_);
  hidden_activations(x.values(), h);
  return std::inner_product(w2_.begin(), w2_.end(), h.begin(), b2_);
}

Matrix TinyMlp::logit_gradient(const Matrix& x) const {
  require_input(x);
  const std::size_t n = shape_.size();
  std::vector<double> h(hidden_);
  hidden_activations(x.values(), h);
  Matrix g(shape_.rows, shape_.cols, 0.0);
  auto out = g.values();
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double coef = w2_[j] * (1.0 - h[j] * h[j]);
    const double* row = w1_.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) out[i] += coef * row[i];
  }
  return g;
}

nlohmann::json TinyMlp::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "agrifid-model";
  j["version"] = 1;
  j["kind"] = "mlp";
  j["id"] = id();
  j["training_seed"] = training_seed();
  j["shape"] = {shape_.rows, shape_.cols};
  j["hidden"] = hidden_;
  j["hidden_weights"] = w1_;
  j["hidden_bias"] = b1_;
  j["output_weights"] = w2_;
  j["output_bias"] = b2_;
  return j;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train: epochs must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning_rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("train: l2 must be >= 0");
  if (hidden == 0) throw ConfigError("train: hidden must be positive");
}

TrainResult train(ModelKind kind, std::span<const LabeledSample> dataset, const TrainConfig& cfg,
                  std::string id) {
  cfg.validate();
  if (dataset.size() < 2) throw TrainingError("training needs at least 2 samples");
  const Shape shape = dataset.front().x.shape();
  if (shape.size() == 0) throw DimensionError("training inputs are empty");
  bool has_healthy = false;
  bool has_unhealthy = false;
  for (const auto& s : dataset) {
    require_same_shape(s.x.shape(), shape, "training sample");
    (s.label == ClassLabel::Unhealthy ? has_unhealthy : has_healthy) = true;
  }
  if (!has_healthy || !has_unhealthy) {
    throw TrainingError("training data must contain both Healthy and Unhealthy samples");
  }

  const std::size_t n = shape.size();
  const std::size_t count = dataset.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto shuffle = [&](std::size_t epoch) {
    SplitMix64 rng(derive_key({cfg.seed, kShuffleStream, epoch}));
    for (std::size_t i = count - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
  };

  TrainResult result;
  std::vector<double> logits(count);

  if (kind == ModelKind::Linear) {
    LinearParams p;
    p.w = gaussian_vector(n, 0.01, derive_key({cfg.seed, kInitStream, 0}));
    std::vector<double> gw(n);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      shuffle(epoch);
      for (std::size_t start = 0; start < count; start += cfg.batch_size) {
        const std::size_t stop = std::min(count, start + cfg.batch_size);
        const double inv = 1.0 / static_cast<double>(stop - start);
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = start; i < stop; ++i) {
          const auto& s = dataset[order[i]];
          const auto x = s.x.values();
          const double delta = (logistic(p.logit(x)) - label_value(s.label)) * inv;
          for (std::size_t d = 0; d < n; ++d) gw[d] += delta * x[d];
          gb += delta;
        }
        for (std::size_t d = 0; d < n; ++d) p.w[d] -= cfg.learning_rate * (gw[d] + cfg.l2 * p.w[d]);
        p.b -= cfg.learning_rate * gb;
      }
    }
    for (std::size_t i = 0; i < count; ++i) logits[i] = p.logit(dataset[i].x.values());
    result.model = std::make_shared<LinearModel>(Matrix(shape.rows, shape.cols, std::move(p.w)),
                                                 p.b, std::move(id), cfg.seed);
  } else {
    MlpParams p;
    p.n = n;
    p.h = cfg.hidden;
    p.w1 = gaussian_vector(p.h * n, 1.0 / std::sqrt(static_cast<double>(n)),
                           derive_key({cfg.seed, kInitStream, 1}));
    p.b1.assign(p.h, 0.0);
    p.w2 = gaussian_vector(p.h, 1.0 / std::sqrt(static_cast<double>(p.h)),
                           derive_key({cfg.seed, kInitStream, 2}));
    std::vector<double> gw1(p.h * n), gb1(p.h), gw2(p.h), hidden(p.h);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      shuffle(epoch);
      for (std::size_t start = 0; start < count; start += cfg.batch_size) {
        const std::size_t stop = std::min(count, start + cfg.batch_size);
        const double inv = 1.0 / static_cast<double>(stop - start);
        std::fill(gw1.begin(), gw1.end(), 0.0);
        std::fill(gb1.begin(), gb1.end(), 0.0);
        std::fill(gw2.begin(), gw2.end(), 0.0);
        double gb2 = 0.0;
        for (std::size_t i = start; i < stop; ++i) {
          const auto& s = dataset[order[i]];
          const auto x = s.x.values();
          const double z = p.forward(x, hidden);
          const double delta = (logistic(z) - label_value(s.label)) * inv;
          gb2 += delta;
          for (std::size_t j = 0; j < p.h; ++j) {
            gw2[j] += delta * hidden[j];
            const double da = delta * p.w2[j] * (1.0 - hidden[j] * hidden[j]);
            gb1[j] += da;
            double* row = gw1.data() + j * n;
            for (std::size_t d = 0; d < n; ++d) row[d] += da * x[d];
          }
        }
        const double lr = cfg.learning_rate;
        for (std::size_t d = 0; d < p.w1.size(); ++d) p.w1[d] -= lr * (gw1[d] + cfg.l2 * p.w1[d]);
        for (std::size_t j = 0; j < p.h; ++j) {
          p.b1[j] -= lr * gb1[j];
          p.w2[j] -= lr * (gw2[j] + cfg.l2 * p.w2[j]);
        }
        p.b2 -= lr * gb2;
      }
    }
    for (std::size_t i = 0; i < count; ++i) logits[i] = p.forward(dataset[i].x.values(), hidden);
    result.model = std::make_shared<TinyMlp>(shape, p.h, std::move(p.w1), std::move(p.b1),
                                             std::move(p.w2), p.b2, std::move(id), cfg.seed);
  }

  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double y = label_value(dataset[i].label);
    loss += softplus(logits[i]) - y * logits[i];
    const bool predicted_unhealthy = logits[i] >= 0.0;
    if (predicted_unhealthy == (dataset[i].label == ClassLabel::Unhealthy)) ++correct;
  }
  result.final_loss = loss / static_cast<double>(count);
  result.train_accuracy = static_cast<double>(correct) / static_cast<double>(count);
  return result;
}

ClassifierPtr model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "agrifid-model") {
      throw ConfigError("not an agrifid model file (missing format tag)");
    }
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto id = j.at("id").get<std::string>();
    const auto seed = j.value("training_seed", std::uint64_t{0});
    const auto dims = j.at("shape").get<std::vector<std::size_t>>();
    if (dims.size() != 2) throw ConfigError("model shape must be [T, F]");
    const Shape shape{dims[0], dims[1]};
    if (kind == ModelKind::Linear) {
      auto w = json_reals(j, "weights", shape.size());
      return std::make_shared<LinearModel>(Matrix(shape.rows, shape.cols, std::move(w)),
                                           j.at("bias").get<double>(), id, seed);
    }
    const auto h = j.at("hidden").get<std::size_t>();
    return std::make_shared<TinyMlp>(shape, h, json_reals(j, "hidden_weights", h * shape.size()),
                                     json_reals(j, "hidden_bias", h),
                                     json_reals(j, "output_weights", h),
                                     j.at("output_bias").get<double>(), id, seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

ClassifierPtr load_model(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  write_text_file(path, model.to_json().dump(1) + "\n");
}

}  // namespace agrifid
