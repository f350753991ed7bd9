#include "agrifid/consensus.hpp"

#include <string>

#include "agrifid/error.hpp"

namespace agrifid {
namespace {

void require_committee(std::size_t k) {
  if (k < 2) {
    throw CommitteeSizeError("consensus needs at least 2 committee masks, got " +
                             std::to_string(k));
  }
}

}  // namespace

ConsensusMap observed_consensus(std::span<const BinaryMask> masks) {
  require_committee(masks.size());
  const Shape shape = masks.front().shape();
  std::vector<std::uint32_t> agreement(shape.size(), 0);
  for (const auto& mask : masks) {
    require_same_shape(mask.shape(), shape, "committee mask");
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) agreement[i] += bits[i];
  }
  return ConsensusMap(shape, masks.size(), std::move(agreement));
}

std::vector<double> tier_set(std::size_t committee_size) {
  require_committee(committee_size);
  std::vector<double> lambdas(committee_size);
  for (std::size_t m = 1; m <= committee_size; ++m) {
    lambdas[m - 1] = static_cast<double>(m) / static_cast<double>(committee_size);
  }
  return lambdas;
}

TierMaskSet stratify(const ConsensusMap& s) {
  const std::size_t k = s.committee_size();
  const auto lambdas = tier_set(k);
  const double eps = 1.0 / (2.0 * static_cast<double>(k) * 1e6);
  const Shape shape = s.shape();

  std::vector<TierMaskSet::Tier> tiers;
  tiers.reserve(k);
  for (std::size_t m = 1; m <= k; ++m) {
    const double lambda = lambdas[m - 1];
    std::vector<std::uint8_t> bits(shape.size(), 0);
    for (std::size_t t = 0; t < shape.rows; ++t) {
      for (std::size_t f = 0; f < shape.cols; ++f) {
        bits[t * shape.cols + f] = s.value(t, f) >= lambda - eps ? 1 : 0;
      }
    }
    tiers.push_back({lambda, m, BinaryMask(shape, std::move(bits))});
  }
  return TierMaskSet(k, std::move(tiers));
}

std::vector<std::size_t> tier_counts(const ConsensusMap& s) {
  const std::size_t k = s.committee_size();
  std::vector<std::size_t> histogram(k + 1, 0);
  for (auto a : s.agreement_counts()) ++histogram[a];
  std::vector<std::size_t> counts(k, 0);
  std::size_t running = 0;
  for (std::size_t m = k; m >= 1; --m) {
    running += histogram[m];
    counts[m - 1] = running;
  }
  return counts;
}

}  // namespace agrifid
