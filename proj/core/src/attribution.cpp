#include "agrifid/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "agrifid/error.hpp"

namespace agrifid {

void IgConfig::validate() const {
  if (steps == 0) throw ConfigError("integrated gradients needs steps >= 1");
  if (!std::isfinite(dataset_min)) throw ConfigError("dataset_min must be finite");
}

double dataset_min(std::span<const Spectrogram> samples) {
  if (samples.empty()) throw ArgumentError("dataset_min of an empty dataset");
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) lo = std::min(lo, s.data().min_value());
  return lo;
}

Matrix ig_baseline(const Matrix& x, const IgConfig& cfg) {
  const double fill = cfg.baseline == IgBaseline::ZeroMatrix ? 0.0 : cfg.dataset_min;
  return Matrix(x.rows(), x.cols(), fill);
}

AttributionMap integrated_gradients(const Classifier& model, const Matrix& x,
                                    ClassLabel target_class, const IgConfig& cfg) {
  cfg.validate();
  return integrated_gradients(model, x, ig_baseline(x, cfg), target_class, cfg.steps, cfg.target);
}

AttributionMap integrated_gradients(const Classifier& model, const Matrix& x,
                                    const Matrix& baseline, ClassLabel target_class,
                                    std::size_t steps, IgTarget target) {
  if (steps == 0) throw ConfigError("integrated gradients needs steps >= 1");
  require_same_shape(baseline.shape(), x.shape(), "IG baseline");
  require_same_shape(x.shape(), model.input_shape(), "IG input");

  const std::size_t n = x.size();
  const auto xv = x.values();
  const auto bv = baseline.values();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = xv[i] - bv[i];

  std::vector<double> grad_sum(n, 0.0);
  Matrix point(x.rows(), x.cols());
  for (std::size_t s = 1; s <= steps; ++s) {
    const double alpha = static_cast<double>(s) / static_cast<double>(steps);
    auto pv = point.values();
    for (std::size_t i = 0; i < n; ++i) pv[i] = bv[i] + alpha * diff[i];
    const Matrix g = target == IgTarget::Probability ? model.input_gradient(point, target_class)
                                                     : model.score_gradient(point, target_class);
    const auto gv = g.values();
    for (std::size_t i = 0; i < n; ++i) grad_sum[i] += gv[i];
  }

  std::vector<double> attr(n);
  const double inv = 1.0 / static_cast<double>(steps);
  for (std::size_t i = 0; i < n; ++i) attr[i] = diff[i] * grad_sum[i] * inv;
  return AttributionMap(Matrix(x.rows(), x.cols(), std::move(attr)), model.id());
}

std::size_t top_fraction_count(Shape shape, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw ArgumentError("kappa must lie in (0, 1], got " + std::to_string(kappa));
  }
  // The small offset keeps products such as 0.29 * 100 from flooring to 28.
  const double raw = kappa * static_cast<double>(shape.size());
  return std::min(shape.size(), static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

TopFractionMask binarize_top_fraction(const AttributionMap& attr, double kappa) {
  const Shape shape = attr.shape();
  const std::size_t keep = top_fraction_count(shape, kappa);
  const auto v = attr.data().values();

  TopFractionMask out{BinaryMask(shape), false};
  if (attr.data().max_value() == attr.data().min_value()) {
    out.degenerate = true;
    return out;
  }
  if (keep == 0) return out;

  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto before = [&](std::size_t a, std::size_t b) {
    return v[a] > v[b] || (v[a] == v[b] && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep - 1), idx.end(),
                   before);
  std::vector<std::uint8_t> bits(v.size(), 0);
  for (std::size_t i = 0; i < keep; ++i) bits[idx[i]] = 1;
  out.mask = BinaryMask(shape, std::move(bits));
  return out;
}

}  // namespace agrifid
