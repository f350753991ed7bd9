#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace agrifid {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

// Dense row-major real matrix. Rows are time frames, columns frequency bins.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  Shape shape() const { return {rows_, cols_}; }
  bool empty() const { return values_.empty(); }

  double operator()(std::size_t t, std::size_t f) const { return values_[t * cols_ + f]; }
  double& operator()(std::size_t t, std::size_t f) { return values_[t * cols_ + f]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(values_).subspan(t * cols_, cols_);
  }

  bool all_finite() const;
  double min_value() const;
  double max_value() const;
  double sum() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Throws DimensionError naming `what` when the shapes differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

// Model input X: T x F log-magnitude values, T >= 1, F >= 1, all finite.
class Spectrogram {
 public:
  explicit Spectrogram(Matrix data);

  const Matrix& data() const { return data_; }
  std::size_t frames() const { return data_.rows(); }
  std::size_t bins() const { return data_.cols(); }
  Shape shape() const { return data_.shape(); }

  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;

 private:
  Matrix data_;
};

// Per-bin importance scores produced by one committee member (or an external
// explainer). Signed, finite.
class AttributionMap {
 public:
  AttributionMap(Matrix data, std::string model_id = {});

  const Matrix& data() const { return data_; }
  const std::string& model_id() const { return model_id_; }
  Shape shape() const { return data_.shape(); }

 private:
  Matrix data_;
  std::string model_id_;
};

// 0/1 explanation mask with a cached active count.
class BinaryMask {
 public:
  BinaryMask() = default;
  // All-zero mask.
  explicit BinaryMask(Shape shape);
  // Throws ArgumentError if any entry is not 0 or 1.
  BinaryMask(Shape shape, std::vector<std::uint8_t> bits);

  // Entries must be exactly 0.0 or 1.0.
  static BinaryMask from_matrix(const Matrix& m);
  static BinaryMask full(Shape shape);

  Shape shape() const { return shape_; }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  std::size_t active_count() const { return active_count_; }
  bool at(std::size_t t, std::size_t f) const { return bits_[t * shape_.cols + f] != 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool is_subset_of(const BinaryMask& other) const;
  std::vector<std::size_t> column_counts() const;
  Matrix to_matrix() const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.shape_ == b.shape_ && a.bits_ == b.bits_;
  }

 private:
  Shape shape_;
  std::vector<std::uint8_t> bits_;
  std::size_t active_count_ = 0;
};

// Committee agreement S(t,f) = (#models marking the bin) / K. The agreement
// count is stored as an integer so every entry is an exact multiple of 1/K.
class ConsensusMap {
 public:
  ConsensusMap(Shape shape, std::size_t committee_size, std::vector<std::uint32_t> agreement);

  // Accepts a real matrix whose entries times K are integers in [0, K]
  // (within 1e-9); throws ArgumentError otherwise.
  static ConsensusMap from_matrix(const Matrix& m, std::size_t committee_size);

  Shape shape() const { return shape_; }
  std::size_t committee_size() const { return committee_size_; }
  std::uint32_t agreement(std::size_t t, std::size_t f) const {
    return agreement_[t * shape_.cols + f];
  }
  double value(std::size_t t, std::size_t f) const {
    return static_cast<double>(agreement(t, f)) / static_cast<double>(committee_size_);
  }
  std::span<const std::uint32_t> agreement_counts() const { return agreement_; }
  Matrix to_matrix() const;

  friend bool operator==(const ConsensusMap&, const ConsensusMap&) = default;

 private:
  Shape shape_;
  std::size_t committee_size_ = 0;
  std::vector<std::uint32_t> agreement_;
};

// One binary mask per non-zero agreement level m/K, ascending in lambda.
class TierMaskSet {
 public:
  struct Tier {
    double lambda = 0.0;
    std::size_t agreement = 0;  // m in lambda = m/K
    BinaryMask mask;
  };

  // Throws ArgumentError unless there are exactly K tiers and they nest.
  TierMaskSet(std::size_t committee_size, std::vector<Tier> tiers);

  std::size_t committee_size() const { return committee_size_; }
  std::span<const Tier> tiers() const { return tiers_; }
  const Tier& full_consensus() const { return tiers_.back(); }

 private:
  std::size_t committee_size_ = 0;
  std::vector<Tier> tiers_;
};

}  // namespace agrifid
