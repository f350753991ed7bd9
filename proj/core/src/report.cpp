#include "agrifid/report.hpp"

#include <cmath>
#include <map>

#include "agrifid/matrix_io.hpp"

namespace agrifid {
namespace {

using ojson = nlohmann::ordered_json;

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(); }

ojson mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}, {"n", m.n}}; }

ojson ratio_json(const RatioMetric& r) {
  return {{"percent", optional_json(r.percent)}, {"used", r.used}, {"excluded", r.excluded}};
}

ojson fdr_json(const FdrProfile& p) {
  ojson tiers = ojson::array();
  for (const auto& t : p.per_tier) {
    tiers.push_back({{"lambda", t.lambda},
                     {"agreement", t.agreement},
                     {"observed_count", t.observed_count},
                     {"mean_null_count", t.mean_null_count},
                     {"fdr", t.fdr},
                     {"unsmoothed_ratio", optional_json(t.unsmoothed_ratio)}});
  }
  return {{"permutations", p.permutations_used},
          {"tiers", std::move(tiers)},
          {"reliability", p.reliability},
          {"trend", std::string(to_string(p.trend))}};
}

ojson scalar_json(const std::optional<ScalarMetric>& m) {
  return m ? ojson(m->value) : ojson();
}

ojson degenerate_json(const std::optional<ScalarMetric>& m) {
  return m ? ojson(m->degenerate) : ojson();
}

double sample_faithfulness(const SampleReport& s) {
  double sum = 0.0;
  for (const auto& b : s.baselines) sum += b.faithfulness;
  return s.baselines.empty() ? 0.0 : sum / static_cast<double>(s.baselines.size());
}

// Mean over models that have a non-degenerate value; NaN when none.
double mean_of(const SampleReport& s, std::optional<ScalarMetric> ModelBaselines::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& b : s.baselines) {
    const auto& m = b.*field;
    if (m && !m->degenerate) {
      sum += m->value;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::nan("");
}

double sample_sparseness(const SampleReport& s) {
  return mean_of(s, &ModelBaselines::sparseness);
}
double sample_complexity(const SampleReport& s) {
  return mean_of(s, &ModelBaselines::complexity);
}

ojson metrics_json(std::span<const SampleReport> samples, std::optional<ClassLabel> label) {
  return {{"mean_fidelity", mean_sd_json(class_metric(samples, label, &sample_mean_fidelity))},
          {"reliability", mean_sd_json(class_metric(samples, label, &sample_reliability))},
          {"faithfulness", mean_sd_json(class_metric(samples, label, &sample_faithfulness))},
          {"sparseness", mean_sd_json(class_metric(samples, label, &sample_sparseness))},
          {"complexity", mean_sd_json(class_metric(samples, label, &sample_complexity))}};
}

ojson confidence_json(std::span<const ConfidenceRecord> records) {
  if (records.empty()) return {{"average_increase", nullptr}, {"average_drop", nullptr},
                               {"average_gain", nullptr}, {"records", 0}};
  return {{"average_increase", average_increase(records)},
          {"average_drop", ratio_json(average_drop(records))},
          {"average_gain", ratio_json(average_gain(records))},
          {"records", records.size()}};
}

}  // namespace

MeanSd mean_sd(std::span<const double> values) {
  MeanSd out;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++out.n;
  }
  if (out.n == 0) return out;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double v : values) {
    if (!std::isnan(v)) ss += (v - out.mean) * (v - out.mean);
  }
  out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  return out;
}

ConfusionSummary confusion_summary(std::size_t tp, std::size_t fp, std::size_t fn,
                                   std::size_t tn) {
  ConfusionSummary c{tp, fp, fn, tn, {}, {}, {}, {}};
  const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  c.precision = ratio(tp, tp + fp);
  c.recall = ratio(tp, tp + fn);
  c.specificity = ratio(tn, tn + fp);
  c.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  return c;
}

ConfusionSummary spurious_detection(std::span<const SampleReport> samples) {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& s : samples) {
    const bool flagged = s.fdr_profile.trend == Trend::NearOne;
    const bool spurious = s.label == ClassLabel::Unhealthy;
    if (flagged && spurious) ++tp;
    else if (flagged) ++fp;
    else if (spurious) ++fn;
    else ++tn;
  }
  return confusion_summary(tp, fp, fn, tn);
}

TrendCounts trend_counts(std::span<const SampleReport> samples, ClassLabel label) {
  TrendCounts c;
  for (const auto& s : samples) {
    if (s.label != label) continue;
    ++c.total;
    (s.fdr_profile.trend == Trend::NearOne ? c.near_one : c.downward) += 1;
  }
  return c;
}

double sample_reliability(const SampleReport& s) { return s.fdr_profile.reliability; }
double sample_mean_fidelity(const SampleReport& s) { return s.mean_fidelity; }

MeanSd class_metric(std::span<const SampleReport> samples, std::optional<ClassLabel> label,
                    double (*metric)(const SampleReport&)) {
  std::vector<double> values;
  for (const auto& s : samples) {
    if (!label || s.label == *label) values.push_back(metric(s));
  }
  return mean_sd(values);
}

nlohmann::ordered_json build_report_json(std::span<const SampleReport> samples,
                                         std::span<const SkippedSample> skipped,
                                         const ReportDecisions& decisions,
                                         std::span<const std::string> committee_ids,
                                         const std::optional<std::string>& audit_model_id) {
  ojson report;
  report["format"] = "agrifid-report";
  report["version"] = 1;
  report["decisions"] = {
      {"kappa", decisions.kappa},
      {"permutations", decisions.permutations},
      {"theta", decisions.theta},
      {"seed", decisions.seed},
      {"imputation",
       {{"kind", std::string(to_string(decisions.imputation.kind))},
        {"neighbor_radius", decisions.imputation.neighbor_radius}}},
      {"fidelity_mode", decisions.fidelity_mode.label()},
      {"fidelity_aggregation", "mean-over-models"},
      {"headline_tier", 1.0},
      {"trend_rule", "NearOne iff FDR(lambda=1) >= theta"},
      {"target_class", "sample label"}};
  report["committee"] = std::vector<std::string>(committee_ids.begin(), committee_ids.end());
  report["audit_model"] = audit_model_id ? ojson(*audit_model_id) : ojson();

  ojson list = ojson::array();
  std::vector<ConfidenceRecord> pooled;
  std::map<std::string, std::vector<ConfidenceRecord>> by_model;
  for (const auto& s : samples) {
    ojson fidelity = ojson::array();
    for (const auto& f : s.per_model_fidelity) {
      fidelity.push_back({{"model_id", f.model_id}, {"fidelity_drop", f.fidelity_drop}});
    }
    ojson baselines = ojson::array();
    for (const auto& b : s.baselines) {
      baselines.push_back({{"model_id", b.model_id},
                           {"p_orig", b.p_orig},
                           {"faithfulness", b.faithfulness},
                           {"ai_flag", b.ai_flag},
                           {"drop", optional_json(b.drop)},
                           {"gain", optional_json(b.gain)},
                           {"sparseness", scalar_json(b.sparseness)},
                           {"sparseness_degenerate", degenerate_json(b.sparseness)},
                           {"complexity", scalar_json(b.complexity)},
                           {"complexity_degenerate", degenerate_json(b.complexity)}});
      pooled.push_back({b.p_orig, b.faithfulness});
      by_model[b.model_id].push_back({b.p_orig, b.faithfulness});
    }
    list.push_back({{"sample_id", s.sample_id},
                    {"label", std::string(to_string(s.label))},
                    {"fdr_profile", fdr_json(s.fdr_profile)},
                    {"fidelity",
                     {{"mode", decisions.fidelity_mode.label()},
                      {"per_model", std::move(fidelity)},
                      {"mean", s.mean_fidelity}}},
                    {"baselines", std::move(baselines)}});
  }
  report["samples"] = std::move(list);

  ojson aggregates;
  aggregates["sample_count"] = samples.size();
  aggregates["confidence"] = confidence_json(pooled);
  ojson per_model = ojson::object();
  for (const auto& id : committee_ids) {
    const auto it = by_model.find(id);
    per_model[id] = confidence_json(it == by_model.end() ? std::span<const ConfidenceRecord>{}
                                                         : std::span(it->second));
  }
  aggregates["confidence_per_model"] = std::move(per_model);
  aggregates["metrics"] = metrics_json(samples, std::nullopt);
  aggregates["by_class"] = {{"Healthy", metrics_json(samples, ClassLabel::Healthy)},
                            {"Unhealthy", metrics_json(samples, ClassLabel::Unhealthy)}};
  ojson trends;
  for (auto label : {ClassLabel::Healthy, ClassLabel::Unhealthy}) {
    const auto c = trend_counts(samples, label);
    trends[std::string(to_string(label))] = {
        {"total", c.total}, {"downward", c.downward}, {"near_one", c.near_one}};
  }
  aggregates["trend_counts"] = std::move(trends);
  const auto conf = spurious_detection(samples);
  aggregates["spurious_detection"] = {{"tp", conf.tp},
                                      {"fp", conf.fp},
                                      {"fn", conf.fn},
                                      {"tn", conf.tn},
                                      {"precision", optional_json(conf.precision)},
                                      {"recall", optional_json(conf.recall)},
                                      {"specificity", optional_json(conf.specificity)},
                                      {"accuracy", optional_json(conf.accuracy)}};
  report["aggregates"] = std::move(aggregates);

  ojson skipped_json = ojson::array();
  for (const auto& s : skipped) {
    skipped_json.push_back({{"sample_id", s.sample_id}, {"reason", s.reason}});
  }
  report["skipped"] = std::move(skipped_json);
  return report;
}

std::string per_sample_csv(std::span<const SampleReport> samples) {
  std::string out = "sample_id,label,mean_fidelity,reliability,trend\n";
  for (const auto& s : samples) {
    out += s.sample_id;
    out += ',';
    out += to_string(s.label);
    out += ',';
    out += format_real(s.mean_fidelity);
    out += ',';
    out += format_real(s.fdr_profile.reliability);
    out += ',';
    out += to_string(s.fdr_profile.trend);
    out += '\n';
  }
  return out;
}

}  // namespace agrifid
