#pragma once

// Numerical validation of the null model's two guarantees plus agreement of
// the sampled null with exhaustive enumeration:
//   (a) time-invariant committee masks: FDR == 1 at every tier, reliability 0;
//   (b) K aligned masks on a window of tau frames (rho = tau/T): the
//       unsmoothed null/observed ratio at full consensus tracks rho^(K-1);
//   (c) sampled mean null counts vs exact enumeration on tiny instances.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "agrifid/matrix.hpp"

namespace agrifid {

struct TheoremCheckParams {
  std::size_t stationary_profiles = 50;
  std::size_t stationary_permutations = 100;
  std::size_t sparse_permutations = 5000;
  std::size_t sparse_frames = 500;
  std::size_t sparse_bins = 16;
  std::size_t oracle_instances = 25;
  std::size_t oracle_permutations = 50000;
  double oracle_sigmas = 3.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CheckRow {
  std::string check;   // "stationary", "sparse", "oracle"
  std::string params;  // offending/identifying parameter tuple
  double measured = 0.0;
  double expected = 0.0;
  double lower = 0.0;  // acceptance interval
  double upper = 0.0;
  bool passed = false;
};

// Committee of time-invariant masks E_k(t, f) = phi_k(f), with each phi_k
// drawn at `density`.
std::vector<BinaryMask> stationary_committee(std::size_t committee_size, Shape shape,
                                             double density, std::uint64_t key);

// K identical masks active on frames [onset, onset + window) in every bin.
std::vector<BinaryMask> aligned_window_committee(std::size_t committee_size, Shape shape,
                                                 std::size_t window, std::size_t onset = 0);

// Independent Bernoulli(density) masks.
std::vector<BinaryMask> random_committee(std::size_t committee_size, Shape shape, double density,
                                         std::uint64_t key);

std::vector<CheckRow> check_stationary(const TheoremCheckParams& p);
std::vector<CheckRow> check_sparse(const TheoremCheckParams& p);
std::vector<CheckRow> check_oracle(const TheoremCheckParams& p);
std::vector<CheckRow> run_theorem_check(const TheoremCheckParams& p);

}  // namespace agrifid
