#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "divhash/dataset.hpp"
#include "oracles.hpp"

namespace fixtures {

/// Dataset of dense points with ids 0..n-1 and no labels.
divhash::Dataset from_vectors(const std::vector<oracle::Vec>& xs);

/// n random unit vectors in d dimensions.
std::vector<oracle::Vec> random_units(std::size_t n, std::size_t d, std::uint64_t seed);

/// A fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace fixtures
