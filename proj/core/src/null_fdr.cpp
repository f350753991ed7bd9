#include "agrifid/null_fdr.hpp"

#include <algorithm>
#include <array>

#include "agrifid/consensus.hpp"
#include "agrifid/error.hpp"
#include "agrifid/parallel.hpp"
#include "agrifid/random.hpp"

namespace agrifid {
namespace {

constexpr std::size_t kPermutationChunks = 64;

Shape validate_committee(std::span<const BinaryMask> masks) {
  if (masks.size() < 2) {
    throw CommitteeSizeError("null model needs at least 2 committee masks, got " +
                             std::to_string(masks.size()));
  }
  const Shape shape = masks.front().shape();
  for (const auto& m : masks) require_same_shape(m.shape(), shape, "committee mask");
  if (shape.rows == 0 || shape.cols == 0) throw DimensionError("committee masks are empty");
  return shape;
}

// Scratch-buffer variant of shifted_tier_counts used in the hot loops.
void accumulate_shifted_counts(std::span<const BinaryMask> masks,
                               std::span<const std::size_t> offsets,
                               std::vector<std::uint16_t>& agreement,
                               std::vector<std::size_t>& histogram,
                               std::span<std::uint64_t> tier_sums,
                               std::span<uint128> tier_sq_sums = {}) {
  const Shape shape = masks.front().shape();
  const std::size_t k = masks.size();
  std::fill(agreement.begin(), agreement.end(), 0);
  for (std::size_t m = 0; m < k; ++m) {
    const auto bits = masks[m].bits();
    const std::size_t delta = offsets[m];
    for (std::size_t t = 0; t < shape.rows; ++t) {
      std::size_t src = t + delta;
      if (src >= shape.rows) src -= shape.rows;
      const std::uint8_t* in = bits.data() + src * shape.cols;
      std::uint16_t* out = agreement.data() + t * shape.cols;
      for (std::size_t f = 0; f < shape.cols; ++f) out[f] += in[f];
    }
  }
  std::fill(histogram.begin(), histogram.end(), 0);
  for (auto a : agreement) ++histogram[a];
  std::size_t running = 0;
  for (std::size_t m = k; m >= 1; --m) {
    running += histogram[m];
    tier_sums[m - 1] += running;
    if (!tier_sq_sums.empty()) {
      tier_sq_sums[m - 1] += static_cast<uint128>(running) * running;
    }
  }
}

}  // namespace

std::string_view to_string(Trend trend) {
  return trend == Trend::Downward ? "Downward" : "NearOne";
}

Trend parse_trend(std::string_view text) {
  if (text == "Downward") return Trend::Downward;
  if (text == "NearOne") return Trend::NearOne;
  throw ArgumentError("unknown trend '" + std::string(text) + "'");
}

std::vector<double> FdrProfile::fdr_values() const {
  std::vector<double> v;
  v.reserve(per_tier.size());
  for (const auto& t : per_tier) v.push_back(t.fdr);
  return v;
}

BinaryMask cyclic_shift(const BinaryMask& mask, long long delta) {
  const Shape shape = mask.shape();
  if (shape.rows == 0) return mask;
  const auto rows = static_cast<long long>(shape.rows);
  const auto d = static_cast<std::size_t>(((delta % rows) + rows) % rows);
  const auto bits = mask.bits();
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t t = 0; t < shape.rows; ++t) {
    const std::size_t src = (t + d) % shape.rows;
    std::copy_n(bits.begin() + static_cast<std::ptrdiff_t>(src * shape.cols), shape.cols,
                out.begin() + static_cast<std::ptrdiff_t>(t * shape.cols));
  }
  return BinaryMask(shape, std::move(out));
}

ShiftVector draw_shifts(const NullConfig& cfg, std::size_t b, std::size_t committee_size,
                        std::size_t frames) {
  if (frames == 0) throw DimensionError("cannot draw shifts over zero frames");
  const std::uint64_t sample_key = hash_string(cfg.sample_id);
  ShiftVector shifts;
  shifts.offsets.resize(committee_size);
  for (std::size_t k = 0; k < committee_size; ++k) {
    SplitMix64 rng(derive_key({cfg.seed, sample_key, b, k}));
    shifts.offsets[k] = static_cast<std::size_t>(rng.below(frames));
  }
  return shifts;
}

std::vector<std::size_t> shifted_tier_counts(std::span<const BinaryMask> masks,
                                             const ShiftVector& shifts) {
  const Shape shape = validate_committee(masks);
  if (shifts.offsets.size() != masks.size()) {
    throw ArgumentError("shift vector length does not match committee size");
  }
  std::vector<std::size_t> offsets(shifts.offsets.size());
  for (std::size_t k = 0; k < offsets.size(); ++k) offsets[k] = shifts.offsets[k] % shape.rows;
  std::vector<std::uint16_t> agreement(shape.size());
  std::vector<std::size_t> histogram(masks.size() + 1);
  std::vector<std::uint64_t> sums(masks.size(), 0);
  accumulate_shifted_counts(masks, offsets, agreement, histogram, sums);
  return {sums.begin(), sums.end()};
}

FdrProfile empirical_fdr(std::span<const BinaryMask> masks, const NullConfig& cfg) {
  const Shape shape = validate_committee(masks);
  if (cfg.permutations == 0) throw ArgumentError("permutation count B must be >= 1");
  if (masks.size() > 0xffff) throw CommitteeSizeError("committee too large");
  const std::size_t k = masks.size();

  const auto observed = tier_counts(observed_consensus(masks));
  const auto lambdas = tier_set(k);

  const std::size_t chunks = std::min(kPermutationChunks, cfg.permutations);
  std::vector<std::vector<std::uint64_t>> chunk_sums(chunks, std::vector<std::uint64_t>(k, 0));
  parallel_for(chunks, cfg.threads, [&](std::size_t c) {
    const std::size_t begin = cfg.permutations * c / chunks;
    const std::size_t end = cfg.permutations * (c + 1) / chunks;
    std::vector<std::uint16_t> agreement(shape.size());
    std::vector<std::size_t> histogram(k + 1);
    for (std::size_t b = begin; b < end; ++b) {
      const auto shifts = draw_shifts(cfg, b, k, shape.rows);
      accumulate_shifted_counts(masks, shifts.offsets, agreement, histogram, chunk_sums[c]);
    }
  });

  std::vector<std::uint64_t> null_sums(k, 0);
  for (const auto& s : chunk_sums) {
    for (std::size_t m = 0; m < k; ++m) null_sums[m] += s[m];
  }

  FdrProfile profile;
  profile.permutations_used = cfg.permutations;
  profile.per_tier.reserve(k);
  const auto b = static_cast<double>(cfg.permutations);
  for (std::size_t m = 0; m < k; ++m) {
    TierFdr tier;
    tier.lambda = lambdas[m];
    tier.agreement = m + 1;
    tier.observed_count = observed[m];
    tier.mean_null_count = static_cast<double>(null_sums[m]) / b;
    const auto obs = static_cast<double>(observed[m]);
    tier.fdr = (tier.mean_null_count + 1.0) / (obs + 1.0);
    if (observed[m] > 0) tier.unsmoothed_ratio = tier.mean_null_count / obs;
    profile.per_tier.push_back(tier);
  }
  profile.reliability = std::max(0.0, 1.0 - profile.headline().fdr);
  const auto fdrs = profile.fdr_values();
  profile.trend = classify_trend(fdrs, cfg.trend_threshold);
  return profile;
}

std::vector<NullMoments> brute_force_null(std::span<const BinaryMask> masks,
                                          std::uint64_t max_vectors) {
  const Shape shape = validate_committee(masks);
  const std::size_t k = masks.size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (total > max_vectors / shape.rows) {
      throw SizeError("exhaustive null needs T^K = " + std::to_string(shape.rows) + "^" +
                      std::to_string(k) + " shift vectors, limit is " +
                      std::to_string(max_vectors));
    }
    total *= shape.rows;
  }

  std::vector<std::uint64_t> sums(k, 0);
  std::vector<uint128> sq_sums(k, 0);
  std::vector<std::uint16_t> agreement(shape.size());
  std::vector<std::size_t> histogram(k + 1);
  std::vector<std::size_t> offsets(k, 0);
  for (std::uint64_t v = 0; v < total; ++v) {
    accumulate_shifted_counts(masks, offsets, agreement, histogram, sums, sq_sums);
    for (std::size_t i = 0; i < k; ++i) {  // odometer increment
      if (++offsets[i] < shape.rows) break;
      offsets[i] = 0;
    }
  }

  const auto lambdas = tier_set(k);
  const auto n = static_cast<long double>(total);
  std::vector<NullMoments> moments(k);
  for (std::size_t m = 0; m < k; ++m) {
    const long double mean = static_cast<long double>(sums[m]) / n;
    const long double second = static_cast<long double>(sq_sums[m]) / n;
    moments[m].lambda = lambdas[m];
    moments[m].agreement = m + 1;
    moments[m].mean = static_cast<double>(mean);
    moments[m].variance = static_cast<double>(std::max<long double>(0.0L, second - mean * mean));
  }
  return moments;
}

Trend classify_trend(std::span<const double> fdr_by_tier, double theta) {
  if (fdr_by_tier.empty()) throw ArgumentError("trend needs at least one tier");
  return fdr_by_tier.back() >= theta ? Trend::NearOne : Trend::Downward;
}

}  // namespace agrifid
