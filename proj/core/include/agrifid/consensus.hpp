#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "agrifid/matrix.hpp"

namespace agrifid {

// S(t,f) = (1/K) sum_k E_k(t,f). K is the number of masks; K >= 2.
// Throws CommitteeSizeError for K < 2 and DimensionError on shape mismatch.
ConsensusMap observed_consensus(std::span<const BinaryMask> masks);

// {1/K, 2/K, ..., 1}, ascending. K >= 2.
std::vector<double> tier_set(std::size_t committee_size);

// C_lambda(t,f) = 1 iff S(t,f) >= lambda - 1/(2K * 1e6), for every lambda in
// tier_set(K).
TierMaskSet stratify(const ConsensusMap& s);

// Active-bin count of every tier, computed from the agreement histogram; same
// numbers as stratify(s) without materializing the masks.
std::vector<std::size_t> tier_counts(const ConsensusMap& s);

}  // namespace agrifid
