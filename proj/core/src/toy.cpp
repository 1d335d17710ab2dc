#include "divhash/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "divhash/error.hpp"
#include "divhash/random.hpp"

namespace divhash {

void ToyConfig::validate() const {
  const auto& [a, b] = class_centers;
  if (a.empty() || a.size() != b.size()) {
    throw InvalidArgument("toy: class centers must be non-empty and of equal dimension");
  }
  if (a == b) throw InvalidArgument("toy: class centers must be distinct");
  if (!(spread > 0.0)) throw InvalidArgument("toy: spread must be > 0");
  if (subtopics_per_class < 1) throw InvalidArgument("toy: subtopics_per_class must be >= 1");
}

Dataset make_toy(const ToyConfig& config) {
  config.validate();
  const std::size_t d = config.class_centers[0].size();
  const int m = config.subtopics_per_class;
  std::vector<DataPoint> points;
  points.reserve(2 * config.n_per_class);

  for (int cls = 0; cls < 2; ++cls) {
    const auto& center = config.class_centers[cls];
    for (std::size_t i = 0; i < config.n_per_class; ++i) {
      std::vector<double> offset(d);
      for (std::size_t j = 0; j < d; ++j) {
        offset[j] = config.spread * counter_rng::gaussian(config.seed, static_cast<std::uint64_t>(cls),
                                                          i * d + j);
      }
      const double angle = d >= 2 ? std::atan2(offset[1], offset[0]) : (offset[0] >= 0 ? 0.0 : -1.0);
      // atan2 lies in (-pi, pi]; map to sector 0..m-1.
      int sector = static_cast<int>(std::floor((angle + std::numbers::pi) / (2 * std::numbers::pi) * m));
      sector = std::clamp(sector, 0, m - 1);

      std::vector<double> x(d);
      for (std::size_t j = 0; j < d; ++j) x[j] = center[j] + offset[j];
      DataPoint p;
      p.id = static_cast<PointId>(points.size());
      p.vector = FeatureVector::dense(std::move(x));
      normalize_in_place(p.vector);
      p.category = cls;
      p.subtopic = sector;
      points.push_back(std::move(p));
    }
  }
  Dataset out(d, std::move(points));
  out.set_subtopic_count(0, m);
  out.set_subtopic_count(1, m);
  return out;
}

ToyConfig default_toy(std::size_t n_per_class, std::uint64_t seed) {
  ToyConfig c;
  c.n_per_class = n_per_class;
  c.class_centers = {std::vector<double>{0.0, 0.0, 1.0, 0.0}, std::vector<double>{0.0, 0.0, 0.0, 1.0}};
  c.spread = 0.35;
  c.seed = seed;
  c.subtopics_per_class = 4;
  return c;
}

}  // namespace divhash
