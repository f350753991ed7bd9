#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrifid/matrix.hpp"

namespace agrifid {

enum class ClassLabel : int { Healthy = 0, Unhealthy = 1 };

std::string_view to_string(ClassLabel label);
ClassLabel parse_label(std::string_view text);

// Binary spectrogram classifier. Implementations provide the log-odds of the
// Unhealthy class and its input gradient; probabilities and probability
// gradients for either class follow from those.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string_view kind() const = 0;
  virtual Shape input_shape() const = 0;
  std::size_t class_count() const { return 2; }

  const std::string& id() const { return id_; }
  std::uint64_t training_seed() const { return training_seed_; }

  // z(x) = log p_Unhealthy(x) - log p_Healthy(x).
  virtual double logit(const Matrix& x) const = 0;
  // dz/dx, same shape as x.
  virtual Matrix logit_gradient(const Matrix& x) const = 0;

  virtual nlohmann::json to_json() const = 0;

  // {p_Healthy, p_Unhealthy}.
  std::array<double, 2> predict_proba(const Matrix& x) const;
  double probability(const Matrix& x, ClassLabel c) const;
  // dp_c/dx.
  Matrix input_gradient(const Matrix& x, ClassLabel c) const;
  // Gradient of the class score z_c, where z_Unhealthy = z and z_Healthy = -z.
  Matrix score_gradient(const Matrix& x, ClassLabel c) const;
  double score(const Matrix& x, ClassLabel c) const;

 protected:
  Classifier(std::string id, std::uint64_t training_seed)
      : id_(std::move(id)), training_seed_(training_seed) {}
  void require_input(const Matrix& x) const;

 private:
  std::string id_;
  std::uint64_t training_seed_ = 0;
};

using ClassifierPtr = std::shared_ptr<const Classifier>;

// p_Unhealthy = logistic(<W, x> + b).
class LinearModel final : public Classifier {
 public:
  LinearModel(Matrix weights, double bias, std::string id = "linear",
              std::uint64_t training_seed = 0);

  std::string_view kind() const override { return "linear"; }
  Shape input_shape() const override { return weights_.shape(); }
  double logit(const Matrix& x) const override;
  Matrix logit_gradient(const Matrix& x) const override;
  nlohmann::json to_json() const override;

  const Matrix& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  Matrix weights_;
  double bias_ = 0.0;
};

// One tanh hidden layer of H units feeding a logistic output unit.
// hidden_weights is H x (T*F) row-major over the flattened input.
class TinyMlp final : public Classifier {
 public:
  TinyMlp(Shape input_shape, std::size_t hidden, std::vector<double> hidden_weights,
          std::vector<double> hidden_bias, std::vector<double> output_weights, double output_bias,
          std::string id = "mlp", std::uint64_t training_seed = 0);

  std::string_view kind() const override { return "mlp"; }
  Shape input_shape() const override { return shape_; }
  double logit(const Matrix& x) const override;
  Matrix logit_gradient(const Matrix& x) const override;
  nlohmann::json to_json() const override;

  std::size_t hidden_units() const { return hidden_; }
  std::span<const double> hidden_weights() const { return w1_; }
  std::span<const double> hidden_bias() const { return b1_; }
  std::span<const double> output_weights() const { return w2_; }
  double output_bias() const { return b2_; }

 private:
  void hidden_activations(std::span<const double> x, std::span<double> h) const;

  Shape shape_;
  std::size_t hidden_ = 0;
  std::vector<double> w1_;
  std::vector<double> b1_;
  std::vector<double> w2_;
  double b2_ = 0.0;
};

enum class ModelKind { Linear, Mlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct TrainConfig {
  std::size_t epochs = 60;
  double learning_rate = 0.05;
  std::size_t batch_size = 10;
  std::uint64_t seed = 1;
  double l2 = 0.05;
  std::size_t hidden = 16;  // TinyMlp only

  void validate() const;
};

struct LabeledSample {
  Matrix x;
  ClassLabel label = ClassLabel::Healthy;
};

struct TrainResult {
  ClassifierPtr model;
  double final_loss = 0.0;      // mean cross-entropy on the training set, no penalty
  double train_accuracy = 0.0;  // fraction in [0, 1]
};

// Mini-batch gradient descent on mean binary cross-entropy plus (l2/2)|w|^2.
// Initialization and shuffling derive from cfg.seed only, so equal inputs give
// bit-identical parameters. Throws TrainingError when fewer than two samples
// or only one class is present, DimensionError on ragged shapes.
TrainResult train(ModelKind kind, std::span<const LabeledSample> dataset, const TrainConfig& cfg,
                  std::string id);

ClassifierPtr model_from_json(const nlohmann::json& j);
ClassifierPtr load_model(const std::filesystem::path& path);
void save_model(const Classifier& model, const std::filesystem::path& path);

double logistic(double z);

}  // namespace agrifid
