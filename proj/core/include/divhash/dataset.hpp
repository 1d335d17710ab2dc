#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "divhash/feature_vector.hpp"

namespace divhash {

using PointId = std::uint32_t;

struct DataPoint {
  PointId id = 0;
  FeatureVector vector;
  std::optional<int> category;
  std::optional<int> subtopic;
  /// Multi-label annotations (sparse text format); empty otherwise.
  std::vector<int> labels;
};

/// Immutable collection of points sharing one dimension, ids 0..n-1.
class Dataset {
 public:
  Dataset() = default;
  /// Validates dimensions and ids; derives the subtopic count of every
  /// category from the distinct subtopic labels present.
  Dataset(std::size_t dim, std::vector<DataPoint> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  const DataPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<DataPoint>& points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  /// m for a category: the number of sub-categories it is divided into.
  const std::map<int, int>& subtopic_count_per_category() const noexcept {
    return subtopic_counts_;
  }
  std::optional<int> subtopic_count(int category) const;
  /// Overrides the derived count, e.g. when a sample misses some subtopics.
  void set_subtopic_count(int category, int m);

 private:
  std::size_t dim_ = 0;
  std::vector<DataPoint> points_;
  std::map<int, int> subtopic_counts_;
};

/// Scales v to unit norm; throws InvalidArgument("zero vector") if ‖v‖ = 0.
void normalize_in_place(FeatureVector& v);

/// Dense rows: `[category:subtopic:]v1,v2,...`; either label may be empty.
Dataset load_dense(const std::filesystem::path& path, bool normalize);
Dataset parse_dense(std::string_view text, bool normalize);
/// Writes the dense format at full precision (round-trips to ~1e-16).
void save_dense(const Dataset& data, const std::filesystem::path& path);

/// LIBSVM-style lines: `lab1,lab2 idx:val idx:val ...` with 1-based indices.
Dataset load_sparse(const std::filesystem::path& path, std::size_t dim, bool normalize);
Dataset parse_sparse(std::string_view text, std::size_t dim, bool normalize);

/// Returns a dataset holding copies of the given points, re-numbered 0..m-1
/// in the given order. Subtopic counts are inherited from `source`.
Dataset subset(const Dataset& source, std::span<const PointId> ids);

}  // namespace divhash
