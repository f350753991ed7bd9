#pragma once

// Cyclic-shift permutation null and smoothed empirical FDR per consensus tier.
//
// Every permutation b draws one time offset per committee member, shifts each
// mask along the time axis (modulo T), recomputes consensus and counts the
// bins reaching each tier. FDR(lambda) compares the mean null count against the
// observed count with +1 smoothing in numerator and denominator.
//
// Offsets come from a counter-based generator keyed by
// (seed, sample_id, b, k), and per-permutation counts are integers, so the
// profile is bit-identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agrifid/matrix.hpp"

namespace agrifid {

enum class Trend { Downward, NearOne };

std::string_view to_string(Trend trend);
Trend parse_trend(std::string_view text);

// Which tier feeds the scalar reliability. Only full consensus (lambda = 1)
// is supported.
enum class HeadlineTier { FullConsensus };

struct NullConfig {
  std::size_t permutations = 100;  // B
  std::uint64_t seed = 0;
  std::string sample_id;           // part of the randomness key
  HeadlineTier headline_tier = HeadlineTier::FullConsensus;
  double trend_threshold = 0.8;    // theta
  unsigned threads = 1;            // 0 = hardware concurrency
};

struct ShiftVector {
  std::vector<std::size_t> offsets;  // one per committee member, each in [0, T)
};

struct TierFdr {
  double lambda = 0.0;
  std::size_t agreement = 0;  // m in lambda = m/K
  std::size_t observed_count = 0;
  double mean_null_count = 0.0;
  double fdr = 0.0;
  // mean_null_count / observed_count; empty when nothing was observed.
  std::optional<double> unsmoothed_ratio;
};

struct FdrProfile {
  std::vector<TierFdr> per_tier;  // ascending lambda
  std::size_t permutations_used = 0;
  double reliability = 0.0;
  Trend trend = Trend::NearOne;

  const TierFdr& headline() const { return per_tier.back(); }
  std::vector<double> fdr_values() const;
};

// out(t,f) = mask((t + delta) mod T, f). Negative deltas wrap as well.
BinaryMask cyclic_shift(const BinaryMask& mask, long long delta);

// Offsets for permutation `b` of a committee of size K over T frames.
ShiftVector draw_shifts(const NullConfig& cfg, std::size_t b, std::size_t committee_size,
                        std::size_t frames);

// Tier counts (ascending lambda) of the consensus of the shifted masks.
std::vector<std::size_t> shifted_tier_counts(std::span<const BinaryMask> masks,
                                             const ShiftVector& shifts);

FdrProfile empirical_fdr(std::span<const BinaryMask> masks, const NullConfig& cfg);

// Exact distribution summary of the per-permutation null count at one tier,
// taken over all T^K equally likely shift vectors.
struct NullMoments {
  double lambda = 0.0;
  std::size_t agreement = 0;
  double mean = 0.0;
  double variance = 0.0;
};

// Enumerates every shift vector. Throws SizeError when T^K > max_vectors.
std::vector<NullMoments> brute_force_null(std::span<const BinaryMask> masks,
                                          std::uint64_t max_vectors = 1'000'000);

// NearOne iff the FDR at lambda = 1 (last entry) is >= theta.
Trend classify_trend(std::span<const double> fdr_by_tier, double theta = 0.8);

}  // namespace agrifid
