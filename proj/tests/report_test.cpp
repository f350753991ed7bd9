#include <gtest/gtest.h>

#include <cmath>

#include "agrifid/report.hpp"

namespace agrifid {
namespace {

SampleReport make_sample(std::string id, ClassLabel label, Trend trend, double reliability,
                         double fidelity) {
  SampleReport s;
  s.sample_id = std::move(id);
  s.label = label;
  s.fdr_profile.per_tier = {{0.5, 1, 10, 5.0, 6.0 / 11.0, 0.5}, {1.0, 2, 4, 1.0, 0.4, 0.25}};
  s.fdr_profile.permutations_used = 100;
  s.fdr_profile.trend = trend;
  s.fdr_profile.reliability = reliability;
  s.per_model_fidelity = {{"m0", fidelity}, {"m1", fidelity}};
  s.mean_fidelity = fidelity;
  s.baselines = {{"m0", 0.8, 0.4, false, 50.0, 0.0, std::nullopt, std::nullopt},
                 {"m1", 0.6, 0.8, true, 0.0, 50.0, ScalarMetric{0.5, false},
                  ScalarMetric{1.0, false}}};
  return s;
}

TEST(ConfusionSummary, PublishedCounts) {
  const auto c = confusion_summary(81, 19, 40, 120);
  EXPECT_EQ(std::round(*c.recall * 1000.0) / 10.0, 66.9);
  EXPECT_EQ(std::round(*c.specificity * 1000.0) / 10.0, 86.3);
  EXPECT_DOUBLE_EQ(*c.precision, 81.0 / 100.0);
  EXPECT_DOUBLE_EQ(*c.accuracy, 201.0 / 260.0);
  EXPECT_DOUBLE_EQ(*c.recall, 81.0 / 121.0);
  EXPECT_DOUBLE_EQ(*c.specificity, 120.0 / 139.0);
}

TEST(ConfusionSummary, EmptyDenominators) {
  const auto c = confusion_summary(0, 0, 0, 5);
  EXPECT_FALSE(c.precision.has_value());
  EXPECT_FALSE(c.recall.has_value());
  EXPECT_EQ(*c.specificity, 1.0);
}

TEST(MeanSd, SampleStandardDeviation) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto m = mean_sd(v);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_NEAR(m.sd, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(m.n, 8u);
  EXPECT_EQ(mean_sd(std::vector<double>{3.0}).sd, 0.0);
  const auto with_nan = mean_sd(std::vector<double>{1.0, std::nan(""), 3.0});
  EXPECT_EQ(with_nan.n, 2u);
  EXPECT_EQ(with_nan.mean, 2.0);
}

TEST(TrendCounts, PerClass) {
  const std::vector<SampleReport> samples{
      make_sample("a", ClassLabel::Healthy, Trend::Downward, 0.9, 0.1),
      make_sample("b", ClassLabel::Healthy, Trend::NearOne, 0.1, 0.2),
      make_sample("c", ClassLabel::Unhealthy, Trend::NearOne, 0.0, 0.8),
      make_sample("d", ClassLabel::Unhealthy, Trend::NearOne, 0.1, 0.9)};
  const auto h = trend_counts(samples, ClassLabel::Healthy);
  EXPECT_EQ(h.total, 2u);
  EXPECT_EQ(h.downward, 1u);
  EXPECT_EQ(h.near_one, 1u);
  const auto c = spurious_detection(samples);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 0u);
  EXPECT_EQ(c.tn, 1u);
  const auto rel = class_metric(samples, ClassLabel::Unhealthy, &sample_reliability);
  EXPECT_DOUBLE_EQ(rel.mean, 0.05);
}

TEST(ReportJson, SchemaAndCsv) {
  const std::vector<SampleReport> samples{
      make_sample("0000", ClassLabel::Healthy, Trend::Downward, 0.6, 0.25),
      make_sample("0001", ClassLabel::Unhealthy, Trend::NearOne, 0.0, 0.75)};
  const std::vector<SkippedSample> skipped{{"0002", "missing mask"}};
  const std::vector<std::string> ids{"m0", "m1"};
  const auto j = build_report_json(samples, skipped, {}, ids, std::string("m1"));
  EXPECT_EQ(j["format"], "agrifid-report");
  EXPECT_EQ(j["decisions"]["kappa"], 0.05);
  EXPECT_EQ(j["decisions"]["fidelity_mode"], "per-model");
  EXPECT_EQ(j["audit_model"], "m1");
  ASSERT_EQ(j["samples"].size(), 2u);
  const auto& s = j["samples"][1];
  EXPECT_EQ(s["fdr_profile"]["trend"], "NearOne");
  EXPECT_EQ(s["fdr_profile"]["tiers"].size(), 2u);
  EXPECT_EQ(s["fidelity"]["mean"], 0.75);
  EXPECT_TRUE(s["baselines"][0]["sparseness"].is_null());
  EXPECT_EQ(s["baselines"][1]["complexity"], 1.0);
  const auto& agg = j["aggregates"];
  EXPECT_EQ(agg["sample_count"], 2u);
  EXPECT_EQ(agg["confidence"]["records"], 4u);
  EXPECT_EQ(agg["confidence"]["average_increase"], 50.0);
  EXPECT_EQ(agg["confidence"]["average_drop"]["percent"], 25.0);
  EXPECT_EQ(agg["trend_counts"]["Unhealthy"]["near_one"], 1u);
  EXPECT_EQ(agg["spurious_detection"]["tp"], 1u);
  EXPECT_EQ(j["skipped"][0]["reason"], "missing mask");

  const auto csv = per_sample_csv(samples);
  EXPECT_EQ(csv,
            "sample_id,label,mean_fidelity,reliability,trend\n"
            "0000,Healthy,0.25,0.6,Downward\n"
            "0001,Unhealthy,0.75,0,NearOne\n");
}

}  // namespace
}  // namespace agrifid
