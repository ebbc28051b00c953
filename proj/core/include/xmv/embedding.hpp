#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xmv {

// Unit-length vector in the matching space. Only obtainable through
// l2_normalize or from_unit, so every instance satisfies |‖v‖ − 1| ≤ 1e-6.
class Embedding {
 public:
  static constexpr double kUnitTolerance = 1e-6;

  Embedding() = default;

  // Wraps a vector that should already be unit length; throws
  // NormalizationError otherwise.
  static Embedding from_unit(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  explicit Embedding(std::vector<double> v) : values_(std::move(v)) {}
  friend Embedding l2_normalize(std::span<const double> v);

  std::vector<double> values_;
};

// v / ‖v‖₂. Throws NormalizationError for zero-norm or non-finite input.
Embedding l2_normalize(std::span<const double> v);
Embedding l2_normalize(std::span<const float> v);

double dot(std::span<const double> a, std::span<const double> b);

// Dot product clamped to [-1, 1]. Throws DimensionError on mismatch.
double cosine_similarity(const Embedding& a, const Embedding& b);

// ‖a − b‖², computed directly from the differences.
double squared_distance(const Embedding& a, const Embedding& b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// Dense row-major score matrix; rows are selfies, columns are documents.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// M[i][j] = cosine_similarity(selfies[i], docs[j]). Rows are split across
// `threads` workers (0 = hardware concurrency); each entry is computed by
// the same kernel regardless of the split, so the output is identical for
// any worker count.
ScoreMatrix cross_modal_scores(std::span<const Embedding> docs,
                               std::span<const Embedding> selfies,
                               unsigned threads = 0);

}  // namespace xmv
