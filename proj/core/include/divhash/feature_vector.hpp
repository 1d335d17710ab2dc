#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace divhash {

/// A real vector stored either densely or as a sorted coordinate list.
///
/// Sparse vectors keep strictly increasing indices so that every dot product
/// and distance runs in O(nnz). Mixed dense/sparse arithmetic is supported.
class FeatureVector {
 public:
  FeatureVector() = default;

  static FeatureVector dense(std::vector<double> values);
  /// Throws InvalidArgument unless indices are strictly increasing and < dim.
  static FeatureVector sparse(std::size_t dim, std::vector<std::uint32_t> indices,
                              std::vector<double> values);

  bool is_sparse() const noexcept { return sparse_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  /// Dense: all coordinates. Sparse: the stored non-zeros.
  std::span<const double> values() const noexcept { return values_; }
  /// Empty for dense vectors.
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }

  double dot(std::span<const double> dense) const;
  double dot(const FeatureVector& other) const;
  double squared_norm() const;
  double norm() const;

  void scale(double factor);
  std::vector<double> to_dense() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  bool sparse_ = false;
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

/// ‖a − b‖², computed coordinate-wise in ascending index order.
double squared_distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace divhash
