#include "fixtures.hpp"

#include <utility>

namespace fixtures {

divhash::Dataset from_vectors(const std::vector<oracle::Vec>& xs) {
  std::vector<divhash::DataPoint> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    divhash::DataPoint p;
    p.id = static_cast<divhash::PointId>(i);
    p.vector = divhash::FeatureVector::dense(xs[i]);
    pts.push_back(std::move(p));
  }
  return divhash::Dataset(xs.empty() ? 0 : xs[0].size(), std::move(pts));
}

std::vector<oracle::Vec> random_units(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<oracle::Vec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_unit(d, seed * 1000003ULL + i));
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("divhash_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
