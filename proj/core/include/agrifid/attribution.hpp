#pragma once

#include <cstddef>
#include <span>

#include "agrifid/committee.hpp"
#include "agrifid/matrix.hpp"

namespace agrifid {

enum class IgBaseline { ZeroMatrix, ConstantDatasetMin };
// Probability integrates dp_c/dx. Logit integrates the pre-sigmoid class
// score, which makes IG exact (W * x) for a linear model.
enum class IgTarget { Probability, Logit };

struct IgConfig {
  std::size_t steps = 64;
  IgBaseline baseline = IgBaseline::ZeroMatrix;
  double dataset_min = 0.0;  // fill value for ConstantDatasetMin
  IgTarget target = IgTarget::Probability;

  void validate() const;
};

// Smallest entry over a set of spectrograms (the ConstantDatasetMin fill).
double dataset_min(std::span<const Spectrogram> samples);

Matrix ig_baseline(const Matrix& x, const IgConfig& cfg);

// attribution = (x - baseline) * mean_{s=1..steps} grad(baseline + s/steps (x - baseline)).
AttributionMap integrated_gradients(const Classifier& model, const Matrix& x,
                                    ClassLabel target_class, const IgConfig& cfg = {});
// Explicit-baseline form; throws DimensionError when shapes differ.
AttributionMap integrated_gradients(const Classifier& model, const Matrix& x,
                                    const Matrix& baseline, ClassLabel target_class,
                                    std::size_t steps, IgTarget target = IgTarget::Probability);

struct TopFractionMask {
  BinaryMask mask;
  bool degenerate = false;  // constant attribution map, mask left empty
};

// Keeps the floor(kappa*T*F) largest values. Ties go to the smaller
// row-major index (t, f). A constant map yields an empty, degenerate mask.
TopFractionMask binarize_top_fraction(const AttributionMap& attr, double kappa);

std::size_t top_fraction_count(Shape shape, double kappa);

}  // namespace agrifid
