#include "divhash/feature_vector.hpp"

#include <cmath>
#include <string>

#include "divhash/error.hpp"

namespace divhash {

FeatureVector FeatureVector::dense(std::vector<double> values) {
  FeatureVector v;
  v.dim_ = values.size();
  v.values_ = std::move(values);
  return v;
}

FeatureVector FeatureVector::sparse(std::size_t dim, std::vector<std::uint32_t> indices,
                                    std::vector<double> values) {
  if (indices.size() != values.size()) {
    throw InvalidArgument("sparse vector: index/value count mismatch");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= dim) {
      throw InvalidArgument("index out of range: " + std::to_string(indices[i]));
    }
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw InvalidArgument("sparse indices must be strictly increasing");
    }
  }
  FeatureVector v;
  v.sparse_ = true;
  v.dim_ = dim;
  v.indices_ = std::move(indices);
  v.values_ = std::move(values);
  return v;
}

double FeatureVector::dot(std::span<const double> dense) const {
  if (dense.size() != dim_) {
    throw InvalidArgument("dot: dimension mismatch");
  }
  double acc = 0.0;
  if (sparse_) {
    for (std::size_t i = 0; i < indices_.size(); ++i) acc += values_[i] * dense[indices_[i]];
  } else {
    for (std::size_t i = 0; i < dim_; ++i) acc += values_[i] * dense[i];
  }
  return acc;
}

double FeatureVector::dot(const FeatureVector& other) const {
  if (other.dim_ != dim_) {
    throw InvalidArgument("dot: dimension mismatch");
  }
  if (!other.sparse_) return dot(std::span<const double>(other.values_));
  if (!sparse_) return other.dot(std::span<const double>(values_));
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < indices_.size() && j < other.indices_.size()) {
    if (indices_[i] < other.indices_[j]) {
      ++i;
    } else if (indices_[i] > other.indices_[j]) {
      ++j;
    } else {
      acc += values_[i++] * other.values_[j++];
    }
  }
  return acc;
}

double FeatureVector::squared_norm() const {
  double acc = 0.0;
  for (double x : values_) acc += x * x;
  return acc;
}

double FeatureVector::norm() const { return std::sqrt(squared_norm()); }

void FeatureVector::scale(double factor) {
  for (double& x : values_) x *= factor;
}

std::vector<double> FeatureVector::to_dense() const {
  if (!sparse_) return values_;
  std::vector<double> out(dim_, 0.0);
  for (std::size_t i = 0; i < indices_.size(); ++i) out[indices_[i]] = values_[i];
  return out;
}

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("squared_distance: dimension mismatch");
  }
  double acc = 0.0;
  if (!a.is_sparse() && !b.is_sparse()) {
    const auto x = a.values();
    const auto y = b.values();
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double diff = x[c] - y[c];
      acc += diff * diff;
    }
    return acc;
  }
  if (a.is_sparse() && b.is_sparse()) {
    const auto ia = a.indices(), ib = b.indices();
    const auto va = a.values(), vb = b.values();
    std::size_t i = 0, j = 0;
    while (i < ia.size() || j < ib.size()) {
      double diff;
      if (j == ib.size() || (i < ia.size() && ia[i] < ib[j])) {
        diff = va[i++];
      } else if (i == ia.size() || ib[j] < ia[i]) {
        diff = -vb[j++];
      } else {
        diff = va[i++] - vb[j++];
      }
      acc += diff * diff;
    }
    return acc;
  }
  // Mixed: walk the dense side and consume the sparse entries in order.
  const FeatureVector& sp = a.is_sparse() ? a : b;
  const FeatureVector& de = a.is_sparse() ? b : a;
  const auto idx = sp.indices();
  const auto sv = sp.values();
  const auto dv = de.values();
  std::size_t j = 0;
  for (std::size_t c = 0; c < dv.size(); ++c) {
    double diff = dv[c];
    if (j < idx.size() && idx[j] == c) diff -= sv[j++];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace divhash
