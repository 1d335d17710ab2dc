#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "divhash/dataset.hpp"
#include "divhash/hash.hpp"

namespace divhash {

/// Points returned by probing every table with the query's keys.
struct CandidateSet {
  std::vector<PointId> ids;      ///< deduplicated, ascending
  std::size_t probed_tables = 0;
  std::size_t touched = 0;       ///< bucket entries scanned, duplicates included
  std::size_t union_size = 0;    ///< |ids| before any truncation or radius filter
};

struct QueryOptions {
  /// Keep only the closest candidates (exact distance, ties by id).
  std::optional<std::size_t> max_candidates;
  /// Drop candidates farther than this Euclidean distance from the query.
  std::optional<double> radius;
  /// Probe only the first `tables` tables (all when unset).
  std::optional<std::size_t> tables;
};

/// L hash tables mapping packed keys to the ids stored in that bucket.
/// Only non-empty buckets are stored; every id appears once per table.
class LshIndex {
 public:
  using Table = std::unordered_map<HashKey, std::vector<PointId>>;

  LshIndex(std::shared_ptr<const Dataset> data, HashFamily family, std::vector<Table> tables);

  const HashFamily& family() const noexcept { return family_; }
  const Dataset& dataset() const noexcept { return *data_; }
  std::shared_ptr<const Dataset> dataset_handle() const noexcept { return data_; }
  const std::vector<Table>& tables() const noexcept { return tables_; }
  std::size_t size() const noexcept { return data_->size(); }

  CandidateSet query(const FeatureVector& q, const QueryOptions& options = {}) const;

 private:
  std::shared_ptr<const Dataset> data_;
  HashFamily family_;
  std::vector<Table> tables_;
};

/// Hashes every point into each of the family's tables.
LshIndex build(std::shared_ptr<const Dataset> data, const HashFamily& family);

CandidateSet query(const LshIndex& index, const FeatureVector& q, const QueryOptions& options = {});

/// Persists the family sidecar followed by each table's (key, ids) runs in
/// ascending key order. The dataset itself is not stored.
void save_index(const LshIndex& index, const std::filesystem::path& path);
LshIndex load_index(const std::filesystem::path& path, std::shared_ptr<const Dataset> data);

struct TuneOptions {
  HashKind kind = HashKind::PlainRandom;
  std::size_t projected_dim = 0;  ///< PCA kinds only
  std::uint64_t seed = 1;
  std::size_t sample_queries = 100;  ///< held out from the dataset
  std::size_t neighbors = 10;
  std::size_t min_bits = 8, max_bits = 64, bit_step = 4;
  std::size_t max_tables = 32;
};

struct TuneResult {
  std::size_t bits_per_table = 0;  ///< l
  std::size_t table_count = 0;     ///< L
  bool feasible = false;
  double recall = 0.0;         ///< on the held-out sample
  double mean_touched = 0.0;   ///< bucket entries scanned per query
  double mean_candidates = 0.0;
};

/// Grid search over l ∈ {8, 12, …, 64} and L ∈ {1, …, 32}. Holds out a query
/// sample, indexes the rest, and returns the pair with the smallest mean
/// touched count whose recall@10 reaches `target_recall`. Recall counts the
/// candidates within (1 + ε)·r₁₀ of the query (r₁₀ = exact 10th-NN distance),
/// capped at 10, so ε = 0 is plain recall against exact NN. Without a
/// feasible pair, returns the highest-recall pair with feasible = false.
TuneResult tune(const Dataset& data, double target_recall, double epsilon, const TuneOptions& options = {});

/// Mean fraction of exact k-NN (over `data`) found in each query's candidates.
double recall_at_k(const LshIndex& index, const Dataset& queries, std::size_t k,
                   const QueryOptions& options = {});

/// Exact k nearest ids by squared distance, ties by ascending id.
std::vector<PointId> exact_knn(const Dataset& data, const FeatureVector& q, std::size_t k);

}  // namespace divhash
