#include "agrifid/theorem_check.hpp"

#include <cmath>
#include <cstdio>

#include "agrifid/null_fdr.hpp"
#include "agrifid/random.hpp"

namespace agrifid {
namespace {

std::string describe(std::initializer_list<std::pair<const char*, double>> kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s=%g", out.empty() ? "" : " ", k, v);
    out += buf;
  }
  return out;
}

}  // namespace

std::vector<BinaryMask> stationary_committee(std::size_t committee_size, Shape shape,
                                             double density, std::uint64_t key) {
  std::vector<BinaryMask> masks;
  for (std::size_t k = 0; k < committee_size; ++k) {
    SplitMix64 rng(derive_key({key, k}));
    std::vector<std::uint8_t> profile(shape.cols);
    for (auto& p : profile) p = rng.uniform01() < density ? 1 : 0;
    std::vector<std::uint8_t> bits(shape.size());
    for (std::size_t t = 0; t < shape.rows; ++t) {
      std::copy(profile.begin(), profile.end(),
                bits.begin() + static_cast<std::ptrdiff_t>(t * shape.cols));
    }
    masks.emplace_back(shape, std::move(bits));
  }
  return masks;
}

std::vector<BinaryMask> aligned_window_committee(std::size_t committee_size, Shape shape,
                                                 std::size_t window, std::size_t onset) {
  std::vector<std::uint8_t> bits(shape.size(), 0);
  for (std::size_t t = onset; t < onset + window && t < shape.rows; ++t) {
    std::fill_n(bits.begin() + static_cast<std::ptrdiff_t>(t * shape.cols), shape.cols, 1);
  }
  return std::vector<BinaryMask>(committee_size, BinaryMask(shape, bits));
}

std::vector<BinaryMask> random_committee(std::size_t committee_size, Shape shape, double density,
                                         std::uint64_t key) {
  std::vector<BinaryMask> masks;
  for (std::size_t k = 0; k < committee_size; ++k) {
    SplitMix64 rng(derive_key({key, k}));
    std::vector<std::uint8_t> bits(shape.size());
    for (auto& b : bits) b = rng.uniform01() < density ? 1 : 0;
    masks.emplace_back(shape, std::move(bits));
  }
  return masks;
}

std::vector<CheckRow> check_stationary(const TheoremCheckParams& p) {
  constexpr std::size_t kCommittees[] = {2, 3, 4};
  constexpr std::size_t kFrames[] = {16, 128};
  constexpr std::size_t kBins[] = {8, 64};
  std::vector<CheckRow> rows;
  for (std::size_t i = 0; i < p.stationary_profiles; ++i) {
    const std::size_t k = kCommittees[i % 3];
    const Shape shape{kFrames[(i / 3) % 2], kBins[(i / 6) % 2]};
    SplitMix64 rng(derive_key({p.seed, 0x5747, i}));
    const double density = 0.1 + 0.8 * rng.uniform01();
    const auto masks = stationary_committee(k, shape, density, derive_key({p.seed, 0x5748, i}));
    NullConfig cfg;
    cfg.permutations = p.stationary_permutations;
    cfg.seed = p.seed;
    cfg.sample_id = "stationary-" + std::to_string(i);
    cfg.threads = p.threads;
    const auto profile = empirical_fdr(masks, cfg);
    bool exact = profile.reliability == 0.0;
    double worst = 1.0;
    for (const auto& t : profile.per_tier) {
      exact = exact && t.fdr == 1.0;
      if (std::abs(t.fdr - 1.0) > std::abs(worst - 1.0)) worst = t.fdr;
    }
    rows.push_back({"stationary",
                    describe({{"profile", double(i)},
                              {"K", double(k)},
                              {"T", double(shape.rows)},
                              {"F", double(shape.cols)}}),
                    worst, 1.0, 1.0, 1.0, exact});
  }
  return rows;
}

std::vector<CheckRow> check_sparse(const TheoremCheckParams& p) {
  struct Case {
    std::size_t k;
    double rho;
    double lower, upper;
  };
  // The first two intervals are the acceptance bounds; the rest use +/-25%.
  const Case cases[] = {{2, 0.1, 0.08, 0.12},
                        {3, 0.2, 0.03, 0.05},
                        {2, 0.25, 0.25 * 0.75, 0.25 * 1.25},
                        {4, 0.5, 0.125 * 0.75, 0.125 * 1.25}};
  std::vector<CheckRow> rows;
  const Shape shape{p.sparse_frames, p.sparse_bins};
  for (const auto& c : cases) {
    const auto window =
        static_cast<std::size_t>(std::llround(c.rho * static_cast<double>(shape.rows)));
    const auto masks = aligned_window_committee(c.k, shape, window, shape.rows / 3);
    NullConfig cfg;
    cfg.permutations = p.sparse_permutations;
    cfg.seed = p.seed;
    cfg.sample_id = "sparse";
    cfg.threads = p.threads;
    const auto profile = empirical_fdr(masks, cfg);
    const double ratio = profile.headline().unsmoothed_ratio.value_or(NAN);
    rows.push_back({"sparse",
                    describe({{"K", double(c.k)},
                              {"rho", c.rho},
                              {"T", double(shape.rows)},
                              {"F", double(shape.cols)},
                              {"B", double(p.sparse_permutations)}}),
                    ratio, std::pow(c.rho, double(c.k - 1)), c.lower, c.upper,
                    ratio >= c.lower && ratio <= c.upper});
  }
  return rows;
}

std::vector<CheckRow> check_oracle(const TheoremCheckParams& p) {
  const Shape shape{6, 4};
  std::vector<CheckRow> rows;
  for (std::size_t i = 0; i < p.oracle_instances; ++i) {
    const auto masks = random_committee(2, shape, 0.35, derive_key({p.seed, 0x0AC1E, i}));
    const auto exact = brute_force_null(masks);
    NullConfig cfg;
    cfg.permutations = p.oracle_permutations;
    cfg.seed = p.seed;
    cfg.sample_id = "oracle-" + std::to_string(i);
    cfg.threads = p.threads;
    const auto profile = empirical_fdr(masks, cfg);
    for (std::size_t m = 0; m < exact.size(); ++m) {
      const double se = std::sqrt(exact[m].variance / double(p.oracle_permutations));
      const double measured = profile.per_tier[m].mean_null_count;
      const double slack = std::max(p.oracle_sigmas * se, 1e-12);
      rows.push_back({"oracle",
                      describe({{"instance", double(i)},
                                {"lambda", exact[m].lambda},
                                {"T", 6},
                                {"K", 2},
                                {"F", 4}}),
                      measured, exact[m].mean, exact[m].mean - slack, exact[m].mean + slack,
                      std::abs(measured - exact[m].mean) <= slack});
    }
  }
  return rows;
}

std::vector<CheckRow> run_theorem_check(const TheoremCheckParams& p) {
  auto rows = check_stationary(p);
  for (auto& r : check_sparse(p)) rows.push_back(std::move(r));
  for (auto& r : check_oracle(p)) rows.push_back(std::move(r));
  return rows;
}

}  // namespace agrifid
