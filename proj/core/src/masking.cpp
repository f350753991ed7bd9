#include "agrifid/masking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "agrifid/consensus.hpp"
#include "agrifid/error.hpp"
#include "agrifid/matrix_io.hpp"

namespace agrifid {
namespace {

void require_records(std::span<const ConfidenceRecord> records, const char* metric) {
  if (records.empty()) throw ArgumentError(std::string(metric) + " needs at least one record");
}

std::vector<double> absolute_values(const AttributionMap& attr) {
  const auto v = attr.data().values();
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double a) { return std::abs(a); });
  return out;
}

}  // namespace

void ImputationPolicy::validate() const {
  if (kind == ImputationKind::NeighborFrequencyMean && neighbor_radius < 1) {
    throw ConfigError("neighbor imputation radius must be >= 1");
  }
}

std::string_view to_string(ImputationKind kind) {
  return kind == ImputationKind::ZeroFill ? "zero" : "neighbor";
}

Spectrogram apply_mask_keep(const Spectrogram& x, const BinaryMask& m) {
  require_same_shape(m.shape(), x.shape(), "keep mask");
  Matrix out = x.data();
  auto v = out.values();
  const auto bits = m.bits();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!bits[i]) v[i] = 0.0;
  }
  return Spectrogram(std::move(out));
}

Spectrogram apply_mask_remove(const Spectrogram& x, const BinaryMask& m,
                              const ImputationPolicy& policy) {
  policy.validate();
  require_same_shape(m.shape(), x.shape(), "removal mask");
  const Matrix& in = x.data();
  Matrix out = in;
  if (policy.kind == ImputationKind::ZeroFill) {
    auto v = out.values();
    const auto bits = m.bits();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (bits[i]) v[i] = 0.0;
    }
    return Spectrogram(std::move(out));
  }

  const std::size_t bins = in.cols();
  const std::size_t r = policy.neighbor_radius;
  for (std::size_t t = 0; t < in.rows(); ++t) {
    double frame_sum = 0.0;
    std::size_t frame_n = 0;
    for (std::size_t f = 0; f < bins; ++f) {
      if (!m.at(t, f)) {
        frame_sum += in(t, f);
        ++frame_n;
      }
    }
    for (std::size_t f = 0; f < bins; ++f) {
      if (!m.at(t, f)) continue;
      const std::size_t lo = f >= r ? f - r : 0;
      const std::size_t hi = std::min(bins - 1, f + r);
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t g = lo; g <= hi; ++g) {
        if (!m.at(t, g)) {
          sum += in(t, g);
          ++n;
        }
      }
      if (n > 0) {
        out(t, f) = sum / static_cast<double>(n);
      } else if (frame_n > 0) {
        out(t, f) = frame_sum / static_cast<double>(frame_n);
      } else {
        out(t, f) = 0.0;
      }
    }
  }
  return Spectrogram(std::move(out));
}

double faithfulness(const Classifier& model, const Spectrogram& x, const BinaryMask& m,
                    ClassLabel c) {
  return model.probability(apply_mask_keep(x, m).data(), c);
}

double fidelity_drop(const Classifier& model, const Spectrogram& x, const BinaryMask& m,
                     ClassLabel c, const ImputationPolicy& policy) {
  return model.probability(x.data(), c) -
         model.probability(apply_mask_remove(x, m, policy).data(), c);
}

double average_increase(std::span<const ConfidenceRecord> records) {
  require_records(records, "average increase");
  std::size_t hits = 0;
  for (const auto& r : records) hits += r.p_masked_keep > r.p_orig ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

RatioMetric average_drop(std::span<const ConfidenceRecord> records) {
  require_records(records, "average drop");
  RatioMetric out;
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.p_orig == 0.0) {
      ++out.excluded;
      continue;
    }
    sum += std::max(0.0, r.p_orig - r.p_masked_keep) / r.p_orig;
    ++out.used;
  }
  if (out.used > 0) out.percent = 100.0 * sum / static_cast<double>(out.used);
  return out;
}

RatioMetric average_gain(std::span<const ConfidenceRecord> records) {
  require_records(records, "average gain");
  RatioMetric out;
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.p_orig == 1.0) {
      ++out.excluded;
      continue;
    }
    sum += std::max(0.0, r.p_masked_keep - r.p_orig) / (1.0 - r.p_orig);
    ++out.used;
  }
  if (out.used > 0) out.percent = 100.0 * sum / static_cast<double>(out.used);
  return out;
}

ScalarMetric sparseness(const AttributionMap& attr) {
  auto v = absolute_values(attr);
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (double a : v) total += a;
  if (total == 0.0) return {0.0, true};
  const auto n = static_cast<double>(v.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * v[i];
  }
  return {weighted / (n * total), false};
}

ScalarMetric complexity(const AttributionMap& attr) {
  const auto v = absolute_values(attr);
  double total = 0.0;
  for (double a : v) total += a;
  if (total == 0.0) return {0.0, true};
  double h = 0.0;
  for (double a : v) {
    if (a > 0.0) {
      const double q = a / total;
      h -= q * std::log(q);
    }
  }
  return {h, false};
}

std::string FidelityMode::label() const {
  if (kind == FidelityMaskMode::PerModelMask) return "per-model";
  return "consensus:" + format_real(lambda);
}

FidelityMode parse_fidelity_mode(std::string_view text) {
  if (text == "per-model") return {};
  constexpr std::string_view prefix = "consensus:";
  if (text.starts_with(prefix)) {
    const std::string number(text.substr(prefix.size()));
    char* end = nullptr;
    const double lambda = std::strtod(number.c_str(), &end);
    if (number.empty() || end != number.c_str() + number.size() || !(lambda > 0.0) ||
        lambda > 1.0) {
      throw ConfigError("fidelity mode '" + std::string(text) + "': lambda must be in (0, 1]");
    }
    return {FidelityMaskMode::ConsensusTier, lambda};
  }
  throw ConfigError("unknown fidelity mode '" + std::string(text) +
                    "' (expected per-model or consensus:<lambda>)");
}

MeanFidelity agri_mean_fidelity(std::span<const ClassifierPtr> committee, const Spectrogram& x,
                                std::span<const BinaryMask> masks, ClassLabel c,
                                const ImputationPolicy& policy, const FidelityMode& mode) {
  if (committee.size() != masks.size()) {
    throw ArgumentError("committee has " + std::to_string(committee.size()) + " models but " +
                        std::to_string(masks.size()) + " masks were given");
  }
  if (committee.empty()) throw ArgumentError("mean fidelity needs at least one model");

  std::optional<BinaryMask> tier_mask;
  if (mode.kind == FidelityMaskMode::ConsensusTier) {
    const auto tiers = stratify(observed_consensus(masks));
    // Lowest tier whose lambda reaches the requested one (same epsilon as stratify).
    const double eps = 1.0 / (2.0 * static_cast<double>(masks.size()) * 1e6);
    for (const auto& tier : tiers.tiers()) {
      if (tier.lambda >= mode.lambda - eps) {
        tier_mask = tier.mask;
        break;
      }
    }
    if (!tier_mask) tier_mask = tiers.full_consensus().mask;
  }

  MeanFidelity out;
  out.per_model.reserve(committee.size());
  for (std::size_t k = 0; k < committee.size(); ++k) {
    const BinaryMask& m = tier_mask ? *tier_mask : masks[k];
    out.per_model.push_back(fidelity_drop(*committee[k], x, m, c, policy));
  }
  double sum = 0.0;
  for (double d : out.per_model) sum += d;
  out.mean = sum / static_cast<double>(out.per_model.size());
  return out;
}

}  // namespace agrifid
