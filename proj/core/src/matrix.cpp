#include "agrifid/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agrifid/error.hpp"

namespace agrifid {

std::string to_string(const Shape& s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DimensionError("matrix storage holds " + std::to_string(values_.size()) +
                         " values, expected " + std::to_string(rows * cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for Matrix");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(values));
}

bool Matrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::min_value() const {
  if (values_.empty()) throw ArgumentError("min of empty matrix");
  return *std::min_element(values_.begin(), values_.end());
}

double Matrix::max_value() const {
  if (values_.empty()) throw ArgumentError("max of empty matrix");
  return *std::max_element(values_.begin(), values_.end());
}

double Matrix::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": shape " + to_string(a) + " does not match " +
                         to_string(b));
  }
}

Spectrogram::Spectrogram(Matrix data) : data_(std::move(data)) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw DimensionError("spectrogram needs at least one frame and one bin");
  }
  if (!data_.all_finite()) throw ArgumentError("spectrogram contains non-finite values");
}

AttributionMap::AttributionMap(Matrix data, std::string model_id)
    : data_(std::move(data)), model_id_(std::move(model_id)) {
  if (data_.empty()) throw DimensionError("attribution map is empty");
  if (!data_.all_finite()) throw ArgumentError("attribution map contains non-finite values");
}

BinaryMask::BinaryMask(Shape shape) : shape_(shape), bits_(shape.size(), 0) {}

BinaryMask::BinaryMask(Shape shape, std::vector<std::uint8_t> bits)
    : shape_(shape), bits_(std::move(bits)) {
  if (bits_.size() != shape_.size()) {
    throw DimensionError("mask storage holds " + std::to_string(bits_.size()) +
                         " entries, expected " + std::to_string(shape_.size()));
  }
  for (auto b : bits_) {
    if (b > 1) throw ArgumentError("mask entries must be 0 or 1");
    active_count_ += b;
  }
}

BinaryMask BinaryMask::from_matrix(const Matrix& m) {
  std::vector<std::uint8_t> bits(m.size());
  const auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 1.0) {
      bits[i] = 1;
    } else if (v[i] != 0.0) {
      throw ArgumentError("mask value at row " + std::to_string(i / m.cols()) + ", column " +
                          std::to_string(i % m.cols()) + " is neither 0 nor 1");
    }
  }
  return BinaryMask(m.shape(), std::move(bits));
}

BinaryMask BinaryMask::full(Shape shape) {
  return BinaryMask(shape, std::vector<std::uint8_t>(shape.size(), 1));
}

bool BinaryMask::is_subset_of(const BinaryMask& other) const {
  require_same_shape(shape_, other.shape_, "mask subset test");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

std::vector<std::size_t> BinaryMask::column_counts() const {
  std::vector<std::size_t> counts(shape_.cols, 0);
  for (std::size_t t = 0; t < shape_.rows; ++t) {
    for (std::size_t f = 0; f < shape_.cols; ++f) counts[f] += bits_[t * shape_.cols + f];
  }
  return counts;
}

Matrix BinaryMask::to_matrix() const {
  std::vector<double> values(bits_.begin(), bits_.end());
  return Matrix(shape_.rows, shape_.cols, std::move(values));
}

ConsensusMap::ConsensusMap(Shape shape, std::size_t committee_size,
                           std::vector<std::uint32_t> agreement)
    : shape_(shape), committee_size_(committee_size), agreement_(std::move(agreement)) {
  if (committee_size_ == 0) throw CommitteeSizeError("consensus needs a positive committee size");
  if (agreement_.size() != shape_.size()) {
    throw DimensionError("consensus storage does not match shape " + to_string(shape_));
  }
  for (auto a : agreement_) {
    if (a > committee_size_) throw ArgumentError("agreement count exceeds committee size");
  }
}

ConsensusMap ConsensusMap::from_matrix(const Matrix& m, std::size_t committee_size) {
  if (committee_size == 0) throw CommitteeSizeError("consensus needs a positive committee size");
  std::vector<std::uint32_t> agreement(m.size());
  const auto v = m.values();
  const auto k = static_cast<double>(committee_size);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double scaled = v[i] * k;
    const double rounded = std::round(scaled);
    if (!(std::abs(scaled - rounded) <= 1e-9) || rounded < 0.0 || rounded > k) {
      throw ArgumentError("consensus value " + std::to_string(v[i]) + " is not a multiple of 1/" +
                          std::to_string(committee_size) + " in [0,1]");
    }
    agreement[i] = static_cast<std::uint32_t>(rounded);
  }
  return ConsensusMap(m.shape(), committee_size, std::move(agreement));
}

Matrix ConsensusMap::to_matrix() const {
  Matrix m(shape_.rows, shape_.cols);
  auto out = m.values();
  for (std::size_t i = 0; i < agreement_.size(); ++i) {
    out[i] = static_cast<double>(agreement_[i]) / static_cast<double>(committee_size_);
  }
  return m;
}

TierMaskSet::TierMaskSet(std::size_t committee_size, std::vector<Tier> tiers)
    : committee_size_(committee_size), tiers_(std::move(tiers)) {
  if (tiers_.size() != committee_size_) {
    throw ArgumentError("tier set must hold exactly K = " + std::to_string(committee_size_) +
                        " tiers");
  }
  for (std::size_t i = 1; i < tiers_.size(); ++i) {
    if (!(tiers_[i - 1].lambda < tiers_[i].lambda)) {
      throw ArgumentError("tiers must be in ascending lambda order");
    }
    if (!tiers_[i].mask.is_subset_of(tiers_[i - 1].mask)) {
      throw ArgumentError("tier masks are not nested");
    }
  }
}

}  // namespace agrifid
