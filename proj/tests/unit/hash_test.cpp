#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "divhash/error.hpp"
#include "divhash/hash.hpp"
#include "fixtures.hpp"

using namespace divhash;

namespace {

FamilyParams plain(std::size_t d, std::size_t l, std::size_t L, std::uint64_t seed = 1) {
  FamilyParams p;
  p.kind = HashKind::PlainRandom;
  p.dim = d;
  p.bits_per_table = l;
  p.table_count = L;
  p.seed = seed;
  return p;
}

FeatureVector at_angle(double degrees) {
  const double t = degrees * std::numbers::pi / 180.0;
  return FeatureVector::dense({std::cos(t), std::sin(t), 0.0});
}

}  // namespace

TEST(HashFamily, SameSeedSamePlanes) {
  const auto a = new_family(plain(8, 16, 4, 7));
  const auto b = new_family(plain(8, 16, 4, 7));
  EXPECT_TRUE(a == b);
  const auto c = new_family(plain(8, 16, 4, 8));
  EXPECT_FALSE(a == c);
}

TEST(HashFamily, LargerFamilyExtendsSmaller) {
  const auto small = new_family(plain(5, 8, 2, 3));
  const auto big = new_family(plain(5, 12, 4, 3));
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t b = 0; b < 8; ++b) {
      const auto x = small.hyperplane(t, b);
      const auto y = big.hyperplane(t, b);
      EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
    }
  }
}

TEST(HashFamily, BitBounds) {
  EXPECT_THROW(new_family(plain(4, 65, 1)), InvalidArgument);
  EXPECT_THROW(new_family(plain(4, 0, 1)), InvalidArgument);
  EXPECT_THROW(new_family(plain(4, 8, 0)), InvalidArgument);
  EXPECT_NO_THROW(new_family(plain(4, 64, 1)));
}

TEST(HashFamily, PcaNeedsDataOrBasis) {
  auto p = plain(4, 8, 2);
  p.kind = HashKind::PcaProjected;
  p.projected_dim = 2;
  EXPECT_THROW(new_family(p), InvalidArgument);
}

TEST(HashFamily, PcaNormalsStayInDataSubspace) {
  // Points in span{e0 + e1, e2} of R^5.
  std::vector<oracle::Vec> xs;
  for (int i = 0; i < 30; ++i) {
    const double a = std::cos(0.3 * i), b = std::sin(0.7 * i) + 0.1;
    xs.push_back({a, a, b, 0.0, 0.0});
  }
  const auto data = fixtures::from_vectors(xs);
  auto p = plain(5, 8, 3);
  p.kind = HashKind::PcaProjected;
  p.projected_dim = 2;
  const auto fam = new_family(p, &data);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t b = 0; b < 8; ++b) {
      const auto n = fam.effective_normal(t, b);
      // Residual after projecting onto span{(e0+e1)/√2, e2}.
      const double c01 = (n[0] + n[1]) / std::sqrt(2.0);
      const double resid = std::sqrt(std::pow(n[0] - c01 / std::sqrt(2.0), 2) + std::pow(n[1] - c01 / std::sqrt(2.0), 2) +
                                     n[3] * n[3] + n[4] * n[4]);
      EXPECT_LE(resid, 1e-6);
    }
  }
}

TEST(HashFamily, IdentityBasisReproducesPlain) {
  const std::size_t d = 6;
  TruncatedBasis basis;
  basis.U = Eigen::MatrixXd::Identity(d, d);
  basis.singular_values.assign(d, 1.0);
  basis.converged = true;
  auto p = plain(d, 16, 3, 21);
  const auto fam_plain = new_family(p);
  p.kind = HashKind::PcaProjected;
  p.projected_dim = d;
  const auto fam_pca = new_family(p, nullptr, basis);
  for (const auto& v : fixtures::random_units(50, d, 2)) {
    const auto x = FeatureVector::dense(v);
    EXPECT_EQ(fam_plain.hash_all(x), fam_pca.hash_all(x));
  }
}

TEST(HashFamily, PcaDirectUsesAxes) {
  const auto xs = fixtures::random_units(40, 6, 4);
  const auto data = fixtures::from_vectors(xs);
  auto p = plain(6, 4, 2);
  p.kind = HashKind::PcaDirect;
  p.projected_dim = 3;
  const auto fam = new_family(p, &data);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t b = 0; b < 4; ++b) {
      const auto r = fam.hyperplane(t, b);
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(r[c], c == (t * 4 + b) % 3 ? 1.0 : 0.0);
    }
  }
}

TEST(HashPoint, NegationComplementsKey) {
  const auto fam = new_family(plain(7, 20, 3, 5));
  for (const auto& v : fixtures::random_units(20, 7, 6)) {
    DataPoint x, y;
    x.vector = FeatureVector::dense(v);
    auto neg = v;
    for (auto& c : neg) c = -c;
    y.vector = FeatureVector::dense(neg);
    for (std::size_t t = 0; t < 3; ++t) {
      const auto a = hash_point(fam, t, x), b = hash_point(fam, t, y);
      EXPECT_EQ(a.bits ^ b.bits, (std::uint64_t{1} << 20) - 1);
    }
  }
}

TEST(HashPoint, HyperplaneHashesToOne) {
  const auto fam = new_family(plain(5, 1, 1, 9));
  const auto r = fam.hyperplane(0, 0);
  DataPoint x;
  x.vector = FeatureVector::dense({r.begin(), r.end()});
  EXPECT_EQ(hash_point(fam, 0, x).bits, 1u);
}

TEST(HashPoint, DimensionMismatch) {
  const auto fam = new_family(plain(5, 8, 1));
  DataPoint x;
  x.vector = FeatureVector::dense({1.0, 0.0});
  EXPECT_THROW(hash_point(fam, 0, x), InvalidArgument);
}

TEST(HashPoint, SparseAndDenseAgree) {
  const auto fam = new_family(plain(6, 24, 2, 3));
  const auto dense = FeatureVector::dense({0.0, 0.6, 0.0, 0.0, 0.8, 0.0});
  const auto sparse = FeatureVector::sparse(6, {1, 4}, {0.6, 0.8});
  EXPECT_EQ(fam.hash_all(dense), fam.hash_all(sparse));
  EXPECT_EQ(hamming_distance(fam, dense, sparse), 0u);
}

TEST(CollisionProbability, Examples) {
  const auto a = FeatureVector::dense({1.0, 0.0});
  EXPECT_DOUBLE_EQ(collision_probability(a, a), 1.0);
  EXPECT_DOUBLE_EQ(collision_probability(a, FeatureVector::dense({0.0, 1.0})), 0.5);
  EXPECT_DOUBLE_EQ(collision_probability(a, FeatureVector::dense({-1.0, 0.0})), 0.0);
  EXPECT_THROW(collision_probability(a, FeatureVector::dense({0.0, 0.0})), InvalidArgument);
}

TEST(CollisionRate, Examples) {
  const auto a = at_angle(0);
  EXPECT_EQ(estimate_collision_rate(a, a, 1000, 1), 1.0);
  EXPECT_EQ(estimate_collision_rate(a, FeatureVector::dense({-1.0, 0.0, 0.0}), 1000, 1), 0.0);
  EXPECT_NEAR(estimate_collision_rate(a, at_angle(60), 50000, 2), 2.0 / 3.0, 0.01);
}

TEST(CollisionRate, LawAcrossAngles) {
  const std::size_t trials = 20000;
  const double bound = 4.0 * std::sqrt(0.25 / static_cast<double>(trials));
  for (const double deg : {15.0, 45.0, 60.0, 90.0, 150.0}) {
    const double est = estimate_collision_rate(at_angle(0), at_angle(deg), trials, 77);
    EXPECT_NEAR(est, 1.0 - deg / 180.0, bound) << deg;
  }
}

TEST(FamilyIo, RoundTrip) {
  const auto xs = fixtures::random_units(30, 5, 8);
  const auto data = fixtures::from_vectors(xs);
  for (const auto kind : {HashKind::PlainRandom, HashKind::PcaProjected, HashKind::PcaDirect}) {
    auto p = plain(5, 10, 3, 12);
    p.kind = kind;
    p.projected_dim = kind == HashKind::PlainRandom ? 0 : 3;
    const auto fam = new_family(p, &data);
    std::stringstream buf;
    write_family(buf, fam);
    const auto back = read_family(buf);
    EXPECT_TRUE(back == fam);
  }
}

TEST(FamilyIo, RejectsGarbage) {
  std::stringstream buf("not a family file");
  EXPECT_THROW(read_family(buf), IoError);
}

TEST(HashKindNames, ParseAliases) {
  EXPECT_EQ(parse_hash_kind("lshdiv"), HashKind::PlainRandom);
  EXPECT_EQ(parse_hash_kind("lshsdiv"), HashKind::PcaProjected);
  EXPECT_EQ(parse_hash_kind("pcahash"), HashKind::PcaDirect);
  EXPECT_THROW(parse_hash_kind("md5"), InvalidArgument);
}
