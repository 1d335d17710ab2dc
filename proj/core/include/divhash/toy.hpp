#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "divhash/dataset.hpp"

namespace divhash {

/// Two-class synthetic data: an isotropic Gaussian cloud around each center.
struct ToyConfig {
  std::size_t n_per_class = 500;
  std::array<std::vector<double>, 2> class_centers;
  double spread = 0.1;
  std::uint64_t seed = 1;
  /// Each cloud is cut into this many angular sectors (by the direction of
  /// the offset in its first two coordinates); the sector is the subtopic.
  int subtopics_per_class = 4;

  void validate() const;
};

/// Deterministic in the config. Class-0 points come first; every point is
/// unit-normalized and labelled category = class, subtopic = sector.
Dataset make_toy(const ToyConfig& config);

/// The stock two-class layout in four dimensions: class centers on the third
/// and fourth axes, so the sector coordinates (the first two) are tangential
/// to both clouds.
ToyConfig default_toy(std::size_t n_per_class, std::uint64_t seed);

}  // namespace divhash
