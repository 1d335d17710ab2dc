#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "divhash/dataset.hpp"
#include "divhash/linalg.hpp"

namespace divhash {

/// How the hyperplanes of a sign-projection family are chosen.
enum class HashKind : std::uint32_t {
  PlainRandom = 0,   ///< r ~ N(0, I_d)
  PcaProjected = 1,  ///< r ~ N(0, I_α) applied to Uᵀx (randomized PCA hashing)
  PcaDirect = 2,     ///< r = a standard basis vector of the top-α space (PCA-Hash)
};

std::string_view to_string(HashKind kind);
HashKind parse_hash_kind(std::string_view name);

/// Packed l-bit table key; bit b is set iff r_b·x ≥ 0.
struct HashKey {
  std::uint64_t bits = 0;
  friend auto operator<=>(const HashKey&, const HashKey&) = default;
};

inline constexpr std::size_t kMaxBitsPerTable = 64;

struct FamilyParams {
  HashKind kind = HashKind::PlainRandom;
  std::size_t bits_per_table = 16;  ///< l
  std::size_t table_count = 8;      ///< L
  std::size_t dim = 0;              ///< d
  std::size_t projected_dim = 0;    ///< α (PCA kinds only)
  std::uint64_t seed = 1;
};

/// L tables of l sign-random-projection bits each. Immutable once built.
///
/// Coordinate c of the hyperplane for (table t, bit b) is the counter-based
/// draw gaussian(seed, t·2³² + b, c), so a family with more tables or bits
/// extends, rather than reshuffles, a smaller one with the same seed.
class HashFamily {
 public:
  /// PCA kinds need a basis with α columns over dimension d.
  HashFamily(const FamilyParams& params, std::optional<TruncatedBasis> basis = std::nullopt);

  const FamilyParams& params() const noexcept { return params_; }
  HashKind kind() const noexcept { return params_.kind; }
  std::size_t bits_per_table() const noexcept { return params_.bits_per_table; }
  std::size_t table_count() const noexcept { return params_.table_count; }
  std::size_t dim() const noexcept { return params_.dim; }
  const std::optional<TruncatedBasis>& basis() const noexcept { return basis_; }

  /// Hyperplane r for (table, bit) in the space it is applied in
  /// (d-dimensional for PlainRandom, α-dimensional for PCA kinds).
  std::span<const double> hyperplane(std::size_t table, std::size_t bit) const;
  /// The d-dimensional normal actually cut: r, or U·r for PCA kinds.
  std::vector<double> effective_normal(std::size_t table, std::size_t bit) const;

  HashKey hash(std::size_t table, const FeatureVector& x) const;
  /// Keys for every table; projects onto the basis only once.
  void hash_all(const FeatureVector& x, std::span<HashKey> out) const;
  std::vector<HashKey> hash_all(const FeatureVector& x) const;

  friend bool operator==(const HashFamily& a, const HashFamily& b);

 private:
  std::size_t plane_dim() const noexcept;
  std::vector<double> project(const FeatureVector& x) const;
  HashKey key_from(std::size_t table, std::span<const double> z) const;

  FamilyParams params_;
  std::optional<TruncatedBasis> basis_;
  std::vector<double> planes_;  // [table][bit][plane_dim]
};

/// Builds a family. PCA kinds compute the basis from `data` (top
/// `projected_dim` singular vectors of the d × n point matrix) unless a
/// precomputed basis is supplied.
HashFamily new_family(const FamilyParams& params, const Dataset* data = nullptr,
                      std::optional<TruncatedBasis> basis = std::nullopt);

/// Convenience: hash of x in one table.
HashKey hash_point(const HashFamily& family, std::size_t table, const DataPoint& x);

/// Total differing bits across all tables (l·L bits in all).
std::size_t hamming_distance(const HashFamily& family, const FeatureVector& a, const FeatureVector& b);

/// Per-bit agreement probability 1 − arccos(a·b / ‖a‖‖b‖)/π.
double collision_probability(const FeatureVector& a, const FeatureVector& b);

/// Fraction of `trials` independent Gaussian hyperplanes on which
/// sign(r·a) = sign(r·b), with sign(0) counted as positive.
double estimate_collision_rate(const FeatureVector& a, const FeatureVector& b, std::size_t trials,
                               std::uint64_t seed);

/// Binary sidecar: header (kind, l, L, d, α, seed) plus the PCA basis when
/// present. Hyperplanes are regenerated from the seed on load.
void write_family(std::ostream& out, const HashFamily& family);
HashFamily read_family(std::istream& in);
void save_family(const HashFamily& family, const std::filesystem::path& path);
HashFamily load_family(const std::filesystem::path& path);

}  // namespace divhash

template <>
struct std::hash<divhash::HashKey> {
  std::size_t operator()(const divhash::HashKey& k) const noexcept {
    std::uint64_t x = k.bits;
    x = (x ^ (x >> 33)) * 0xff51afd7ed558ccdULL;
    x = (x ^ (x >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return static_cast<std::size_t>(x ^ (x >> 33));
  }
};
