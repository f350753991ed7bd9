#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agrifid/committee.hpp"
#include "agrifid/matrix.hpp"

namespace agrifid {

enum class ImputationKind { ZeroFill, NeighborFrequencyMean };

struct ImputationPolicy {
  ImputationKind kind = ImputationKind::ZeroFill;
  std::size_t neighbor_radius = 3;  // frequency bins, NeighborFrequencyMean only

  void validate() const;
};

std::string_view to_string(ImputationKind kind);

// x where m = 1, zero elsewhere.
Spectrogram apply_mask_keep(const Spectrogram& x, const BinaryMask& m);

// Replaces the masked bins. ZeroFill writes 0. NeighborFrequencyMean writes the
// mean of unmasked bins within +/- radius frequency bins of the same frame,
// falling back to the unmasked mean of the whole frame, then to 0.
Spectrogram apply_mask_remove(const Spectrogram& x, const BinaryMask& m,
                              const ImputationPolicy& policy = {});

// p_c(x with only the masked bins kept).
double faithfulness(const Classifier& model, const Spectrogram& x, const BinaryMask& m,
                    ClassLabel c);

// p_c(x) - p_c(x with the masked bins removed).
double fidelity_drop(const Classifier& model, const Spectrogram& x, const BinaryMask& m,
                     ClassLabel c, const ImputationPolicy& policy = {});

struct ConfidenceRecord {
  double p_orig = 0.0;
  double p_masked_keep = 0.0;
};

// 100 * fraction of records whose confidence strictly increases under keep-masking.
double average_increase(std::span<const ConfidenceRecord> records);

struct RatioMetric {
  // Mean over the usable records, in percent; empty if every record was excluded.
  std::optional<double> percent;
  std::size_t used = 0;
  std::size_t excluded = 0;  // p_orig == 0 for AD, p_orig == 1 for AG
};

// 100 * mean max(0, p_orig - p_keep) / p_orig.
RatioMetric average_drop(std::span<const ConfidenceRecord> records);
// 100 * mean max(0, p_keep - p_orig) / (1 - p_orig).
RatioMetric average_gain(std::span<const ConfidenceRecord> records);

struct ScalarMetric {
  double value = 0.0;
  bool degenerate = false;  // all-zero attribution map; value forced to 0
};

// Gini index of the sorted absolute attributions.
ScalarMetric sparseness(const AttributionMap& attr);
// Shannon entropy (nats) of |a| / sum |a|.
ScalarMetric complexity(const AttributionMap& attr);

enum class FidelityMaskMode { PerModelMask, ConsensusTier };

struct FidelityMode {
  FidelityMaskMode kind = FidelityMaskMode::PerModelMask;
  double lambda = 1.0;  // tier used by ConsensusTier

  std::string label() const;  // "per-model" or "consensus:<lambda>"
};

FidelityMode parse_fidelity_mode(std::string_view text);

struct MeanFidelity {
  std::vector<double> per_model;
  double mean = 0.0;
};

// Fidelity drop of every committee member. PerModelMask removes each model's
// own mask; ConsensusTier removes the consensus tier mask C_lambda for all.
MeanFidelity agri_mean_fidelity(std::span<const ClassifierPtr> committee, const Spectrogram& x,
                                std::span<const BinaryMask> masks, ClassLabel c,
                                const ImputationPolicy& policy = {},
                                const FidelityMode& mode = {});

}  // namespace agrifid
