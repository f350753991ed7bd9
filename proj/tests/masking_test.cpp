#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "agrifid/committee.hpp"
#include "agrifid/consensus.hpp"
#include "agrifid/error.hpp"
#include "agrifid/masking.hpp"
#include "test_util.hpp"

namespace agrifid {
namespace {

using testing::random_mask;
using testing::random_matrix;

Spectrogram spec(Matrix m) { return Spectrogram(std::move(m)); }

double sigmoid_of_masked_dot(const Matrix& w, double b, const Matrix& x, const BinaryMask& m,
                             bool keep) {
  double z = b;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool on = m.bits()[i] != 0;
    if (on == keep) z += w.values()[i] * x.values()[i];
  }
  return 1.0 / (1.0 + std::exp(-z));
}

TEST(ApplyMaskKeep, Examples) {
  const auto x = spec(Matrix::from_rows({{1, 2}, {3, 4}}));
  EXPECT_EQ(apply_mask_keep(x, BinaryMask::full({2, 2})), x);
  EXPECT_EQ(apply_mask_keep(x, BinaryMask({2, 2})).data(), Matrix(2, 2));
  const auto m = BinaryMask::from_matrix(Matrix::from_rows({{1, 0}, {0, 1}}));
  EXPECT_EQ(apply_mask_keep(x, m).data(), Matrix::from_rows({{1, 0}, {0, 4}}));
  EXPECT_THROW(apply_mask_keep(x, BinaryMask({2, 3})), DimensionError);
}

TEST(ApplyMaskRemove, ZeroFill) {
  std::mt19937_64 rng(1);
  const auto x = spec(random_matrix(5, 6, rng));
  EXPECT_EQ(apply_mask_remove(x, BinaryMask({5, 6})), x);
  const auto m = random_mask({5, 6}, 0.4, rng);
  const auto removed = apply_mask_remove(x, m);
  const auto kept = apply_mask_keep(x, m);
  for (std::size_t i = 0; i < 30; ++i) {
    const double xi = x.data().values()[i];
    EXPECT_EQ(removed.data().values()[i], m.bits()[i] ? 0.0 : xi);
    EXPECT_EQ(removed.data().values()[i] + kept.data().values()[i], xi);
  }
}

TEST(ApplyMaskRemove, NeighborMean) {
  const ImputationPolicy policy{ImputationKind::NeighborFrequencyMean, 1};
  const auto x = spec(Matrix::from_rows({{1, 2, 3}}));
  const auto m = BinaryMask::from_matrix(Matrix::from_rows({{0, 1, 0}}));
  EXPECT_EQ(apply_mask_remove(x, m, policy).data(), Matrix::from_rows({{1, 2, 3}}));
  const auto x2 = spec(Matrix::from_rows({{1, 5, 3}}));
  EXPECT_EQ(apply_mask_remove(x2, m, policy).data(), Matrix::from_rows({{1, 2, 3}}));
}

TEST(ApplyMaskRemove, NeighborFallbacks) {
  const ImputationPolicy policy{ImputationKind::NeighborFrequencyMean, 1};
  // Bin 0's window {0, 1} is fully masked, so the frame mean of unmasked bins
  // (bin 3 only) is used. Row 1 is fully masked and falls back to 0.
  const auto x = spec(Matrix::from_rows({{9, 9, 0, 6}, {1, 2, 3, 4}}));
  const auto m = BinaryMask::from_matrix(Matrix::from_rows({{1, 1, 1, 0}, {1, 1, 1, 1}}));
  const auto out = apply_mask_remove(x, m, policy).data();
  EXPECT_EQ(out(0, 0), 6.0);
  EXPECT_EQ(out(0, 1), 6.0);
  EXPECT_EQ(out(0, 2), 6.0);
  EXPECT_EQ(out(0, 3), 6.0);
  for (std::size_t f = 0; f < 4; ++f) EXPECT_EQ(out(1, f), 0.0);
}

TEST(ApplyMaskRemove, NeighborUsesOriginalValuesOnly) {
  const ImputationPolicy policy{ImputationKind::NeighborFrequencyMean, 2};
  const auto x = spec(Matrix::from_rows({{4, 100, 100, 8, 2}}));
  const auto m = BinaryMask::from_matrix(Matrix::from_rows({{0, 1, 1, 0, 0}}));
  const auto out = apply_mask_remove(x, m, policy).data();
  EXPECT_DOUBLE_EQ(out(0, 1), (4.0 + 8.0) / 2.0);
  EXPECT_DOUBLE_EQ(out(0, 2), (4.0 + 8.0 + 2.0) / 3.0);
}

TEST(ImputationPolicy, RadiusMustBePositive) {
  const ImputationPolicy policy{ImputationKind::NeighborFrequencyMean, 0};
  EXPECT_THROW(policy.validate(), ConfigError);
}

TEST(Faithfulness, Cases) {
  std::mt19937_64 rng(2);
  const auto w = random_matrix(4, 4, rng);
  const LinearModel model(w, 0.4);
  const auto x = spec(random_matrix(4, 4, rng));
  const auto c = ClassLabel::Unhealthy;
  EXPECT_EQ(faithfulness(model, x, BinaryMask::full({4, 4}), c), model.probability(x.data(), c));
  EXPECT_EQ(faithfulness(model, x, BinaryMask({4, 4}), c), model.probability(Matrix(4, 4), c));
  for (int i = 0; i < 20; ++i) {
    const auto m = random_mask({4, 4}, 0.5, rng);
    EXPECT_NEAR(faithfulness(model, x, m, c), sigmoid_of_masked_dot(w, 0.4, x.data(), m, true),
                1e-12);
  }
}

TEST(FidelityDrop, Cases) {
  std::mt19937_64 rng(3);
  const auto w = random_matrix(4, 4, rng);
  const LinearModel model(w, -0.1);
  const auto x = spec(random_matrix(4, 4, rng));
  const auto c = ClassLabel::Unhealthy;
  EXPECT_EQ(fidelity_drop(model, x, BinaryMask({4, 4}), c), 0.0);
  EXPECT_NEAR(fidelity_drop(model, x, BinaryMask::full({4, 4}), c),
              model.probability(x.data(), c) - model.probability(Matrix(4, 4), c), 1e-15);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_mask({4, 4}, 0.5, rng);
    const double expected = model.probability(x.data(), c) -
                            sigmoid_of_masked_dot(w, -0.1, x.data(), m, false);
    EXPECT_NEAR(fidelity_drop(model, x, m, c), expected, 1e-12);
  }
}

TEST(FidelityDrop, RemovingLargestPositiveContributionsLowersConfidence) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Matrix w(5, 5), xm(5, 5);
  for (auto& v : w.values()) v = u(rng);
  for (auto& v : xm.values()) v = u(rng);
  const LinearModel model(w, 0.0);
  std::vector<std::uint8_t> bits(25, 0);
  std::vector<std::size_t> idx(25);
  for (std::size_t i = 0; i < 25; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return w.values()[a] * xm.values()[a] > w.values()[b] * xm.values()[b];
  });
  for (std::size_t i = 0; i < 5; ++i) bits[idx[i]] = 1;
  EXPECT_GT(fidelity_drop(model, spec(xm), BinaryMask({5, 5}, bits), ClassLabel::Unhealthy), 0.0);
}

TEST(AverageIncrease, Counts) {
  const std::vector<ConfidenceRecord> up{{0.1, 0.2}, {0.5, 0.6}};
  EXPECT_EQ(average_increase(up), 100.0);
  const std::vector<ConfidenceRecord> none{{0.3, 0.2}, {0.5, 0.5}};
  EXPECT_EQ(average_increase(none), 0.0);
  const std::vector<ConfidenceRecord> three{{0.1, 0.2}, {0.2, 0.3}, {0.3, 0.4}, {0.9, 0.1}};
  EXPECT_EQ(average_increase(three), 75.0);
  EXPECT_THROW(average_increase(std::vector<ConfidenceRecord>{}), ArgumentError);
}

TEST(AverageDrop, Cases) {
  const std::vector<ConfidenceRecord> same{{0.3, 0.3}, {0.7, 0.7}};
  EXPECT_EQ(*average_drop(same).percent, 0.0);
  EXPECT_EQ(*average_drop(std::vector<ConfidenceRecord>{{0.8, 0.4}}).percent, 50.0);
  EXPECT_EQ(*average_drop(std::vector<ConfidenceRecord>{{0.5, 0.9}}).percent, 0.0);
  const auto r = average_drop(std::vector<ConfidenceRecord>{{0.0, 0.5}, {0.8, 0.4}});
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_EQ(r.used, 1u);
  EXPECT_EQ(*r.percent, 50.0);
  EXPECT_FALSE(average_drop(std::vector<ConfidenceRecord>{{0.0, 0.5}}).percent.has_value());
}

TEST(AverageGain, Cases) {
  EXPECT_EQ(*average_gain(std::vector<ConfidenceRecord>{{0.5, 1.0}}).percent, 100.0);
  const std::vector<ConfidenceRecord> down{{0.5, 0.4}, {0.7, 0.7}};
  EXPECT_EQ(*average_gain(down).percent, 0.0);
  EXPECT_NEAR(*average_gain(std::vector<ConfidenceRecord>{{0.6, 0.8}}).percent, 50.0, 1e-12);
  const auto r = average_gain(std::vector<ConfidenceRecord>{{1.0, 1.0}, {0.6, 0.8}});
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_NEAR(*r.percent, 50.0, 1e-12);
}

TEST(RatioMetrics, StayInPercentRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ConfidenceRecord> recs(20);
    for (auto& r : recs) r = {u(rng), u(rng)};
    for (const auto& m : {average_drop(recs), average_gain(recs)}) {
      EXPECT_GE(*m.percent, 0.0);
      EXPECT_LE(*m.percent, 100.0);
    }
    const double ai = average_increase(recs);
    std::size_t not_up = 0;
    for (const auto& r : recs) not_up += r.p_masked_keep <= r.p_orig;
    EXPECT_NEAR(ai + 100.0 * not_up / 20.0, 100.0, 1e-12);
  }
}

TEST(Sparseness, Cases) {
  Matrix one(1, 5);
  one(0, 3) = -2.0;
  EXPECT_NEAR(sparseness(AttributionMap(one)).value, 4.0 / 5.0, 1e-15);
  EXPECT_NEAR(sparseness(AttributionMap(Matrix(3, 3, 0.7))).value, 0.0, 1e-15);
  EXPECT_NEAR(sparseness(AttributionMap(Matrix::from_rows({{4, -1}, {3, 2}}))).value, 0.25,
              1e-15);
  const auto zero = sparseness(AttributionMap(Matrix(2, 2)));
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.value, 0.0);
}

TEST(Complexity, Cases) {
  Matrix one(2, 3);
  one(1, 1) = 5.0;
  EXPECT_EQ(complexity(AttributionMap(one)).value, 0.0);
  EXPECT_NEAR(complexity(AttributionMap(Matrix(2, 4, -1.5))).value, std::log(8.0), 1e-12);
  EXPECT_NEAR(complexity(AttributionMap(Matrix::from_rows({{1, -1, 2}}))).value, 1.0397207708,
              1e-9);
  EXPECT_TRUE(complexity(AttributionMap(Matrix(2, 2))).degenerate);
}

TEST(ScalarMetrics, ScaleInvariant) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_matrix(6, 7, rng);
    Matrix scaled = m;
    for (auto& v : scaled.values()) v *= 3.7;
    EXPECT_NEAR(sparseness(AttributionMap(m)).value, sparseness(AttributionMap(scaled)).value,
                1e-12);
    EXPECT_NEAR(complexity(AttributionMap(m)).value, complexity(AttributionMap(scaled)).value,
                1e-12);
  }
}

TEST(MeanFidelity, EmptyMasksGiveZero) {
  std::mt19937_64 rng(7);
  std::vector<ClassifierPtr> committee{
      std::make_shared<LinearModel>(random_matrix(3, 3, rng), 0.1),
      std::make_shared<LinearModel>(random_matrix(3, 3, rng), -0.1)};
  const std::vector<BinaryMask> masks(2, BinaryMask({3, 3}));
  const auto r = agri_mean_fidelity(committee, spec(random_matrix(3, 3, rng)), masks,
                                    ClassLabel::Unhealthy);
  EXPECT_EQ(r.per_model, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(r.mean, 0.0);
}

TEST(MeanFidelity, HandBuiltLinearCommittee) {
  const auto w1 = Matrix::from_rows({{1, 0}, {0, 2}});
  const auto w2 = Matrix::from_rows({{-1, 1}, {1, 0}});
  std::vector<ClassifierPtr> committee{std::make_shared<LinearModel>(w1, 0.0),
                                       std::make_shared<LinearModel>(w2, 0.5)};
  const auto x = spec(Matrix::from_rows({{1, 1}, {1, 1}}));
  const std::vector<BinaryMask> masks{
      BinaryMask::from_matrix(Matrix::from_rows({{0, 0}, {0, 1}})),
      BinaryMask::from_matrix(Matrix::from_rows({{0, 1}, {0, 0}}))};
  const auto s = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double d1 = s(3.0) - s(1.0);
  const double d2 = s(1.5) - s(0.5);
  const auto r = agri_mean_fidelity(committee, x, masks, ClassLabel::Unhealthy);
  ASSERT_EQ(r.per_model.size(), 2u);
  EXPECT_NEAR(r.per_model[0], d1, 1e-15);
  EXPECT_NEAR(r.per_model[1], d2, 1e-15);
  EXPECT_NEAR(r.mean, (d1 + d2) / 2.0, 1e-15);

  // Consensus-tier mode at lambda = 0.5 removes the union for both models.
  const auto u = agri_mean_fidelity(committee, x, masks, ClassLabel::Unhealthy, {},
                                    parse_fidelity_mode("consensus:0.5"));
  EXPECT_NEAR(u.per_model[0], s(3.0) - s(1.0), 1e-15);
  EXPECT_NEAR(u.per_model[1], s(1.5) - s(0.5), 1e-15);
  // At lambda = 1 the intersection is empty, so nothing is removed.
  const auto i = agri_mean_fidelity(committee, x, masks, ClassLabel::Unhealthy, {},
                                    parse_fidelity_mode("consensus:1"));
  EXPECT_EQ(i.mean, 0.0);
}

TEST(MeanFidelity, LengthMismatch) {
  std::vector<ClassifierPtr> committee{std::make_shared<LinearModel>(Matrix(2, 2), 0.0)};
  const std::vector<BinaryMask> masks(2, BinaryMask({2, 2}));
  EXPECT_THROW(agri_mean_fidelity(committee, spec(Matrix(2, 2)), masks, ClassLabel::Healthy),
               ArgumentError);
}

TEST(FidelityMode, ParseAndLabel) {
  EXPECT_EQ(parse_fidelity_mode("per-model").label(), "per-model");
  const auto m = parse_fidelity_mode("consensus:0.75");
  EXPECT_EQ(m.kind, FidelityMaskMode::ConsensusTier);
  EXPECT_EQ(m.lambda, 0.75);
  EXPECT_EQ(m.label(), "consensus:0.75");
  EXPECT_THROW(parse_fidelity_mode("consensus:0"), ConfigError);
  EXPECT_THROW(parse_fidelity_mode("union"), ConfigError);
}

}  // namespace
}  // namespace agrifid
