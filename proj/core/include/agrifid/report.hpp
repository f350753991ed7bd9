#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrifid/committee.hpp"
#include "agrifid/masking.hpp"
#include "agrifid/null_fdr.hpp"

namespace agrifid {

// Masking baselines of one committee member on one sample.
struct ModelBaselines {
  std::string model_id;
  double p_orig = 0.0;        // p_c(x)
  double faithfulness = 0.0;  // p_c(x * m)
  bool ai_flag = false;       // faithfulness > p_orig
  std::optional<double> drop;  // percent; empty when p_orig == 0
  std::optional<double> gain;  // percent; empty when p_orig == 1
  std::optional<ScalarMetric> sparseness;  // empty without an attribution map
  std::optional<ScalarMetric> complexity;
};

struct ModelFidelity {
  std::string model_id;
  double fidelity_drop = 0.0;
};

struct SampleReport {
  std::string sample_id;
  ClassLabel label = ClassLabel::Healthy;
  FdrProfile fdr_profile;
  std::vector<ModelFidelity> per_model_fidelity;
  double mean_fidelity = 0.0;
  std::vector<ModelBaselines> baselines;
};

struct SkippedSample {
  std::string sample_id;
  std::string reason;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1); 0 when n < 2
  std::size_t n = 0;
};

MeanSd mean_sd(std::span<const double> values);

// Rates are empty when their denominator is zero.
struct ConfusionSummary {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> accuracy;
};

ConfusionSummary confusion_summary(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

// NearOne predicts "artifact-driven"; the Unhealthy label is the ground truth.
ConfusionSummary spurious_detection(std::span<const SampleReport> samples);

struct TrendCounts {
  std::size_t total = 0;
  std::size_t downward = 0;
  std::size_t near_one = 0;
};

TrendCounts trend_counts(std::span<const SampleReport> samples, ClassLabel label);

// Mean and sample sd of one per-sample quantity, optionally restricted to a class.
MeanSd class_metric(std::span<const SampleReport> samples, std::optional<ClassLabel> label,
                    double (*metric)(const SampleReport&));

double sample_reliability(const SampleReport& s);
double sample_mean_fidelity(const SampleReport& s);

// Free parameters echoed in the report.
struct ReportDecisions {
  double kappa = 0.05;
  std::size_t permutations = 100;
  double theta = 0.8;
  std::uint64_t seed = 0;
  ImputationPolicy imputation;
  FidelityMode fidelity_mode;
};

nlohmann::ordered_json build_report_json(std::span<const SampleReport> samples,
                                         std::span<const SkippedSample> skipped,
                                         const ReportDecisions& decisions,
                                         std::span<const std::string> committee_ids,
                                         const std::optional<std::string>& audit_model_id);

// Columns: sample_id,label,mean_fidelity,reliability,trend.
std::string per_sample_csv(std::span<const SampleReport> samples);

}  // namespace agrifid
