#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "agrifid/attribution.hpp"
#include "agrifid/committee.hpp"
#include "agrifid/error.hpp"
#include "test_util.hpp"

namespace agrifid {
namespace {

using testing::random_matrix;
using testing::TempDir;

TinyMlp random_mlp(Shape shape, std::size_t hidden, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<double> w1(hidden * shape.size()), b1(hidden), w2(hidden);
  for (auto& v : w1) v = n(rng);
  for (auto& v : b1) v = n(rng);
  for (auto& v : w2) v = n(rng);
  return TinyMlp(shape, hidden, w1, b1, w2, n(rng));
}

// Central differences of p_c, one coordinate at a time.
Matrix numeric_gradient(const Classifier& model, const Matrix& x, ClassLabel c, double h) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = probe.values()[i];
    probe.values()[i] = keep + h;
    const double up = model.probability(probe, c);
    probe.values()[i] = keep - h;
    const double down = model.probability(probe, c);
    probe.values()[i] = keep;
    g.values()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

TEST(LinearModel, ZeroModelIsUninformed) {
  const LinearModel m(Matrix(2, 3), 0.0);
  const auto p = m.predict_proba(Matrix(2, 3, 1.0));
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.5);
  EXPECT_EQ(m.class_count(), 2u);
}

TEST(LinearModel, LogOddsClosedForm) {
  const auto w = Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  const LinearModel m(w, 0.0);
  const auto x = Matrix::from_rows({{std::log(3.0), 5.0}, {-2.0, 7.0}});
  EXPECT_NEAR(m.probability(x, ClassLabel::Unhealthy), 0.75, 1e-15);
  EXPECT_NEAR(m.probability(x, ClassLabel::Healthy), 0.25, 1e-15);
}

TEST(LinearModel, GradientClosedForm) {
  std::mt19937_64 rng(1);
  const auto w = random_matrix(3, 4, rng);
  const LinearModel m(w, 0.3);
  const auto x = random_matrix(3, 4, rng);
  const double p = m.probability(x, ClassLabel::Unhealthy);
  const auto g1 = m.input_gradient(x, ClassLabel::Unhealthy);
  const auto g0 = m.input_gradient(x, ClassLabel::Healthy);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(g1.values()[i], p * (1 - p) * w.values()[i], 1e-15);
    EXPECT_NEAR(g0.values()[i] + g1.values()[i], 0.0, 1e-15);
  }
}

TEST(LinearModel, RejectsShapeMismatch) {
  const LinearModel m(Matrix(2, 2), 0.0);
  EXPECT_THROW(m.logit(Matrix(2, 3)), DimensionError);
}

TEST(Classifier, ProbabilitiesOnSimplex) {
  std::mt19937_64 rng(2);
  const auto mlp = random_mlp({4, 5}, 6, rng);
  const LinearModel lin(random_matrix(4, 5, rng, 3.0), -1.0);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_matrix(4, 5, rng, 2.0);
    for (const Classifier* m : {static_cast<const Classifier*>(&mlp),
                                static_cast<const Classifier*>(&lin)}) {
      const auto p = m->predict_proba(x);
      EXPECT_GE(p[0], 0.0);
      EXPECT_GE(p[1], 0.0);
      EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    }
  }
}

TEST(TinyMlp, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mlp = random_mlp({6, 6}, 8, rng);
    const auto x = random_matrix(6, 6, rng);
    for (auto c : {ClassLabel::Healthy, ClassLabel::Unhealthy}) {
      const auto g = mlp.input_gradient(x, c);
      const auto fd = numeric_gradient(mlp, x, c, 1e-4);
      for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g.values()[i], fd.values()[i], 1e-5);
    }
    const auto g0 = mlp.input_gradient(x, ClassLabel::Healthy);
    const auto g1 = mlp.input_gradient(x, ClassLabel::Unhealthy);
    for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_NEAR(g0.values()[i] + g1.values()[i], 0, 1e-15);
  }
}

TEST(TinyMlp, RejectsBadParameters) {
  EXPECT_THROW(TinyMlp({2, 2}, 0, {}, {}, {}, 0.0), ArgumentError);
  EXPECT_THROW(TinyMlp({2, 2}, 2, std::vector<double>(7), {0, 0}, {0, 0}, 0.0), DimensionError);
}

std::vector<LabeledSample> separable_grid() {
  // Points on a grid in [-1, 1]^2, labelled by the sign of x0 + x1, with a
  // margin band removed around the separating line.
  std::vector<LabeledSample> data;
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) {
      const double a = i / 5.0, b = j / 5.0;
      if (std::abs(a + b) < 0.2) continue;
      data.push_back({Matrix::from_rows({{a, b}}),
                      a + b > 0 ? ClassLabel::Unhealthy : ClassLabel::Healthy});
    }
  }
  return data;
}

bool separable_by_threshold(const std::vector<LabeledSample>& data) {
  // Exhaustive search over thresholds of the projection x0 + x1.
  std::vector<double> proj;
  for (const auto& s : data) proj.push_back(s.x(0, 0) + s.x(0, 1));
  for (double thr : proj) {
    bool ok = true;
    for (std::size_t i = 0; i < data.size() && ok; ++i) {
      ok = (proj[i] > thr) == (data[i].label == ClassLabel::Unhealthy);
    }
    if (ok) return true;
  }
  return false;
}

TEST(Train, SeparableToyGridReachesFullAccuracy) {
  const auto data = separable_grid();
  ASSERT_TRUE(separable_by_threshold(data));
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 0.5;
  cfg.l2 = 0.0;
  for (auto kind : {ModelKind::Linear, ModelKind::Mlp}) {
    const auto r = train(kind, data, cfg, "toy");
    EXPECT_EQ(r.train_accuracy, 1.0) << to_string(kind);
  }
}

TEST(Train, IdenticalInputsConvergeToPrior) {
  std::vector<LabeledSample> data;
  for (int i = 0; i < 40; ++i) {
    data.push_back({Matrix::from_rows({{1.0, 0.5}}),
                    i < 10 ? ClassLabel::Unhealthy : ClassLabel::Healthy});
  }
  TrainConfig cfg;
  cfg.epochs = 400;
  cfg.learning_rate = 0.2;
  const auto r = train(ModelKind::Linear, data, cfg, "prior");
  EXPECT_NEAR(r.model->probability(data[0].x, ClassLabel::Unhealthy), 0.25, 0.01);
}

TEST(Train, DeterministicForSeed) {
  const auto data = separable_grid();
  TrainConfig cfg;
  cfg.seed = 17;
  for (auto kind : {ModelKind::Linear, ModelKind::Mlp}) {
    const auto a = train(kind, data, cfg, "a");
    const auto b = train(kind, data, cfg, "a");
    EXPECT_EQ(a.model->to_json().dump(), b.model->to_json().dump());
    EXPECT_EQ(a.final_loss, b.final_loss);
  }
}

TEST(Train, Errors) {
  std::vector<LabeledSample> one_class{{Matrix(1, 2), ClassLabel::Healthy},
                                       {Matrix(1, 2, 1.0), ClassLabel::Healthy}};
  EXPECT_THROW(train(ModelKind::Linear, one_class, {}, "x"), TrainingError);
  std::vector<LabeledSample> single{{Matrix(1, 2), ClassLabel::Healthy}};
  EXPECT_THROW(train(ModelKind::Linear, single, {}, "x"), TrainingError);
  std::vector<LabeledSample> ragged{{Matrix(1, 2), ClassLabel::Healthy},
                                    {Matrix(1, 3), ClassLabel::Unhealthy}};
  EXPECT_THROW(train(ModelKind::Linear, ragged, {}, "x"), DimensionError);
  TrainConfig bad;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ModelJson, RoundTripIsExact) {
  std::mt19937_64 rng(4);
  TempDir dir("model");
  const auto mlp = random_mlp({3, 4}, 5, rng);
  const LinearModel lin(random_matrix(3, 4, rng), 0.125, "lin", 9);
  for (const Classifier* m : {static_cast<const Classifier*>(&mlp),
                              static_cast<const Classifier*>(&lin)}) {
    const auto path = dir / "m.json";
    save_model(*m, path);
    const auto back = load_model(path);
    EXPECT_EQ(back->kind(), m->kind());
    EXPECT_EQ(back->id(), m->id());
    EXPECT_EQ(back->training_seed(), m->training_seed());
    EXPECT_EQ(back->to_json().dump(), m->to_json().dump());
    const auto x = random_matrix(3, 4, rng);
    EXPECT_EQ(back->logit(x), m->logit(x));
  }
}

TEST(ModelJson, RejectsMalformedFiles) {
  EXPECT_THROW(model_from_json(nlohmann::json::object()), ConfigError);
  auto j = LinearModel(Matrix(2, 2), 0.0).to_json();
  j["weights"] = {1.0, 2.0};
  EXPECT_THROW(model_from_json(j), ConfigError);
  EXPECT_THROW(load_model("/nonexistent_agrifid/model.json"), Error);
}

TEST(Committee, DiverseMembersGiveDistinctMasks) {
  std::mt19937_64 rng(5);
  std::vector<LabeledSample> data;
  for (int i = 0; i < 40; ++i) {
    auto x = random_matrix(8, 8, rng);
    const auto label = i % 2 ? ClassLabel::Unhealthy : ClassLabel::Healthy;
    if (label == ClassLabel::Unhealthy) {
      for (std::size_t t = 0; t < 8; ++t) x(t, 2) += 1.0;
    }
    data.push_back({x, label});
  }
  const std::pair<ModelKind, std::uint64_t> members[] = {
      {ModelKind::Linear, 1}, {ModelKind::Mlp, 2}, {ModelKind::Linear, 3}, {ModelKind::Mlp, 4}};
  std::vector<ClassifierPtr> models;
  for (const auto& [kind, seed] : members) {
    TrainConfig cfg;
    cfg.seed = seed;
    models.push_back(train(kind, data, cfg, "m" + std::to_string(seed)).model);
  }
  for (std::size_t a = 0; a < models.size(); ++a) {
    for (std::size_t b = a + 1; b < models.size(); ++b) {
      EXPECT_NE(models[a]->to_json()["training_seed"], models[b]->to_json()["training_seed"]);
    }
  }
  // Every pair of members disagrees on the mask of at least one random input.
  std::vector<std::vector<BinaryMask>> masks(models.size());
  for (int i = 0; i < 10; ++i) {
    const auto x = random_matrix(8, 8, rng);
    for (std::size_t k = 0; k < models.size(); ++k) {
      masks[k].push_back(
          binarize_top_fraction(integrated_gradients(*models[k], x, ClassLabel::Unhealthy), 0.1)
              .mask);
    }
  }
  std::size_t distinct_pairs = 0;
  for (std::size_t a = 0; a < masks.size(); ++a) {
    for (std::size_t b = a + 1; b < masks.size(); ++b) distinct_pairs += masks[a] != masks[b];
  }
  EXPECT_EQ(distinct_pairs, 6u);
}

TEST(Labels, ParseAndPrint) {
  EXPECT_EQ(parse_label("Healthy"), ClassLabel::Healthy);
  EXPECT_EQ(parse_label("1"), ClassLabel::Unhealthy);
  EXPECT_EQ(to_string(ClassLabel::Unhealthy), "Unhealthy");
  EXPECT_THROW(parse_label("sick"), ArgumentError);
  EXPECT_EQ(parse_model_kind("mlp"), ModelKind::Mlp);
  EXPECT_THROW(parse_model_kind("cnn"), ArgumentError);
}

}  // namespace
}  // namespace agrifid
