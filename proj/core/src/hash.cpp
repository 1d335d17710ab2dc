#include "divhash/hash.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "binary_io.hpp"
#include "divhash/error.hpp"
#include "divhash/random.hpp"

namespace divhash {
namespace {

constexpr std::string_view kFamilyMagic = "DVHFAM01";

std::uint64_t plane_stream(std::size_t table, std::size_t bit) {
  return (static_cast<std::uint64_t>(table) << 32) | static_cast<std::uint64_t>(bit);
}

}  // namespace

std::string_view to_string(HashKind kind) {
  switch (kind) {
    case HashKind::PlainRandom: return "plain";
    case HashKind::PcaProjected: return "pca";
    case HashKind::PcaDirect: return "pcadirect";
  }
  return "unknown";
}

HashKind parse_hash_kind(std::string_view name) {
  if (name == "plain" || name == "lshdiv") return HashKind::PlainRandom;
  if (name == "pca" || name == "lshsdiv") return HashKind::PcaProjected;
  if (name == "pcadirect" || name == "pcahash") return HashKind::PcaDirect;
  throw InvalidArgument("unknown hash kind '" + std::string(name) + "'");
}

HashFamily::HashFamily(const FamilyParams& params, std::optional<TruncatedBasis> basis)
    : params_(params), basis_(std::move(basis)) {
  if (params_.bits_per_table < 1 || params_.bits_per_table > kMaxBitsPerTable) {
    throw InvalidArgument("bits per table must be in [1, 64], got " +
                          std::to_string(params_.bits_per_table));
  }
  if (params_.table_count < 1) throw InvalidArgument("table count must be >= 1");
  if (params_.dim < 1) throw InvalidArgument("family dimension must be >= 1");

  if (params_.kind == HashKind::PlainRandom) {
    params_.projected_dim = 0;
    basis_.reset();
  } else {
    if (!basis_) throw InvalidArgument("PCA hash families need a basis or data");
    if (basis_->dim() != params_.dim) throw InvalidArgument("basis dimension does not match family");
    if (params_.projected_dim == 0) params_.projected_dim = basis_->rank();
    if (basis_->rank() != params_.projected_dim) {
      throw InvalidArgument("basis has " + std::to_string(basis_->rank()) + " columns, expected " +
                            std::to_string(params_.projected_dim));
    }
  }

  const std::size_t pd = plane_dim();
  const std::size_t l = params_.bits_per_table;
  planes_.assign(params_.table_count * l * pd, 0.0);
  for (std::size_t t = 0; t < params_.table_count; ++t) {
    for (std::size_t b = 0; b < l; ++b) {
      double* plane = planes_.data() + (t * l + b) * pd;
      if (params_.kind == HashKind::PcaDirect) {
        plane[(t * l + b) % pd] = 1.0;
      } else {
        for (std::size_t c = 0; c < pd; ++c) plane[c] = counter_rng::gaussian(params_.seed, plane_stream(t, b), c);
      }
    }
  }
}

std::size_t HashFamily::plane_dim() const noexcept {
  return params_.kind == HashKind::PlainRandom ? params_.dim : params_.projected_dim;
}

std::span<const double> HashFamily::hyperplane(std::size_t table, std::size_t bit) const {
  if (table >= params_.table_count || bit >= params_.bits_per_table) {
    throw InvalidArgument("hyperplane index out of range");
  }
  const std::size_t pd = plane_dim();
  return {planes_.data() + (table * params_.bits_per_table + bit) * pd, pd};
}

std::vector<double> HashFamily::effective_normal(std::size_t table, std::size_t bit) const {
  const auto r = hyperplane(table, bit);
  if (!basis_) return {r.begin(), r.end()};
  const Eigen::VectorXd n = basis_->U * Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  return {n.data(), n.data() + n.size()};
}

std::vector<double> HashFamily::project(const FeatureVector& x) const {
  const auto& U = basis_->U;
  std::vector<double> z(static_cast<std::size_t>(U.cols()), 0.0);
  const auto vals = x.values();
  if (x.is_sparse()) {
    const auto idx = x.indices();
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < idx.size(); ++t) acc += U(idx[t], j) * vals[t];
      z[static_cast<std::size_t>(j)] = acc;
    }
  } else {
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index c = 0; c < U.rows(); ++c) acc += U(c, j) * vals[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(j)] = acc;
    }
  }
  return z;
}

HashKey HashFamily::key_from(std::size_t table, std::span<const double> z) const {
  const std::size_t l = params_.bits_per_table;
  const std::size_t pd = plane_dim();
  const double* plane = planes_.data() + table * l * pd;
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < l; ++b, plane += pd) {
    double acc = 0.0;
    for (std::size_t c = 0; c < pd; ++c) acc += plane[c] * z[c];
    if (acc >= 0.0) bits |= std::uint64_t{1} << b;
  }
  return HashKey{bits};
}

HashKey HashFamily::hash(std::size_t table, const FeatureVector& x) const {
  if (x.dim() != params_.dim) {
    throw InvalidArgument("hash: point dimension " + std::to_string(x.dim()) + " != family dimension " +
                          std::to_string(params_.dim));
  }
  if (table >= params_.table_count) throw InvalidArgument("hash: table index out of range");
  if (basis_) {
    const auto z = project(x);
    return key_from(table, z);
  }
  if (!x.is_sparse()) return key_from(table, x.values());
  const std::size_t l = params_.bits_per_table;
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < l; ++b) {
    if (x.dot(hyperplane(table, b)) >= 0.0) bits |= std::uint64_t{1} << b;
  }
  return HashKey{bits};
}

void HashFamily::hash_all(const FeatureVector& x, std::span<HashKey> out) const {
  if (out.size() != params_.table_count) throw InvalidArgument("hash_all: output size != table count");
  if (x.dim() != params_.dim) {
    throw InvalidArgument("hash: point dimension " + std::to_string(x.dim()) + " != family dimension " +
                          std::to_string(params_.dim));
  }
  if (basis_) {
    const auto z = project(x);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = key_from(t, z);
  } else if (!x.is_sparse()) {
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = key_from(t, x.values());
  } else {
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = hash(t, x);
  }
}

std::vector<HashKey> HashFamily::hash_all(const FeatureVector& x) const {
  std::vector<HashKey> keys(params_.table_count);
  hash_all(x, keys);
  return keys;
}

bool operator==(const HashFamily& a, const HashFamily& b) {
  const auto& p = a.params_;
  const auto& q = b.params_;
  if (p.kind != q.kind || p.bits_per_table != q.bits_per_table || p.table_count != q.table_count ||
      p.dim != q.dim || p.projected_dim != q.projected_dim || p.seed != q.seed) {
    return false;
  }
  if (a.basis_.has_value() != b.basis_.has_value()) return false;
  if (a.basis_ && (a.basis_->U != b.basis_->U || a.basis_->singular_values != b.basis_->singular_values)) {
    return false;
  }
  return a.planes_ == b.planes_;
}

HashFamily new_family(const FamilyParams& params, const Dataset* data, std::optional<TruncatedBasis> basis) {
  if (params.kind != HashKind::PlainRandom && !basis) {
    if (data == nullptr) throw InvalidArgument("PCA hash families need a dataset or a precomputed basis");
    if (params.projected_dim == 0) throw InvalidArgument("PCA hash families need projected_dim >= 1");
    if (data->dim() != params.dim) throw InvalidArgument("dataset dimension does not match family");
    SvdOptions opt;
    opt.seed = params.seed;
    basis = truncated_svd(*data, params.projected_dim, opt);
  }
  return HashFamily(params, std::move(basis));
}

HashKey hash_point(const HashFamily& family, std::size_t table, const DataPoint& x) {
  return family.hash(table, x.vector);
}

std::size_t hamming_distance(const HashFamily& family, const FeatureVector& a, const FeatureVector& b) {
  const auto ka = family.hash_all(a);
  const auto kb = family.hash_all(b);
  std::size_t total = 0;
  for (std::size_t t = 0; t < ka.size(); ++t) {
    total += static_cast<std::size_t>(std::popcount(ka[t].bits ^ kb[t].bits));
  }
  return total;
}

double collision_probability(const FeatureVector& a, const FeatureVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw InvalidArgument("collision_probability: zero vector");
  const double cosine = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return 1.0 - std::acos(cosine) / std::numbers::pi;
}

double estimate_collision_rate(const FeatureVector& a, const FeatureVector& b, std::size_t trials,
                               std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("estimate_collision_rate: trials must be >= 1");
  if (a.dim() != b.dim()) throw InvalidArgument("estimate_collision_rate: dimension mismatch");
  const std::size_t d = a.dim();
  std::vector<double> r(d);
  std::size_t agree = 0;
  for (std::size_t j = 0; j < trials; ++j) {
    for (std::size_t c = 0; c < d; ++c) r[c] = counter_rng::gaussian(seed, j, c);
    const bool sa = a.dot(r) >= 0.0;
    const bool sb = b.dot(r) >= 0.0;
    agree += sa == sb ? 1 : 0;
  }
  return static_cast<double>(agree) / static_cast<double>(trials);
}

void write_family(std::ostream& out, const HashFamily& family) {
  using detail::write_pod;
  const auto& p = family.params();
  detail::write_magic(out, kFamilyMagic);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.kind));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.bits_per_table));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.table_count));
  write_pod<std::uint32_t>(out, 0);
  write_pod<std::uint64_t>(out, p.dim);
  write_pod<std::uint64_t>(out, p.projected_dim);
  write_pod<std::uint64_t>(out, p.seed);
  const auto& basis = family.basis();
  write_pod<std::uint8_t>(out, basis ? 1 : 0);
  if (basis) {
    const auto& U = basis->U;
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(U.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(U.cols()));
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
      for (Eigen::Index i = 0; i < U.rows(); ++i) write_pod<double>(out, U(i, j));
    }
    for (double s : basis->singular_values) write_pod<double>(out, s);
  }
}

HashFamily read_family(std::istream& in) {
  using detail::read_pod;
  detail::expect_magic(in, kFamilyMagic);
  FamilyParams p;
  const auto kind = read_pod<std::uint32_t>(in);
  if (kind > 2) throw IoError("unknown hash kind in family header");
  p.kind = static_cast<HashKind>(kind);
  p.bits_per_table = read_pod<std::uint32_t>(in);
  p.table_count = read_pod<std::uint32_t>(in);
  (void)read_pod<std::uint32_t>(in);
  p.dim = read_pod<std::uint64_t>(in);
  p.projected_dim = read_pod<std::uint64_t>(in);
  p.seed = read_pod<std::uint64_t>(in);
  std::optional<TruncatedBasis> basis;
  if (read_pod<std::uint8_t>(in) != 0) {
    const auto rows = read_pod<std::uint64_t>(in);
    const auto cols = read_pod<std::uint64_t>(in);
    if (rows != p.dim || cols != p.projected_dim) throw IoError("basis shape does not match family header");
    TruncatedBasis b;
    b.U.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < b.U.cols(); ++j) {
      for (Eigen::Index i = 0; i < b.U.rows(); ++i) b.U(i, j) = read_pod<double>(in);
    }
    b.singular_values.resize(cols);
    for (auto& s : b.singular_values) s = read_pod<double>(in);
    b.converged = true;
    basis = std::move(b);
  }
  return HashFamily(p, std::move(basis));
}

void save_family(const HashFamily& family, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_family(out, family);
  if (!out) throw IoError("write failed: " + path.string());
}

HashFamily load_family(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_family(in);
}

}  // namespace divhash
