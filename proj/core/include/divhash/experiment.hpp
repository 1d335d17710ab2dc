#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divhash/dataset.hpp"
#include "divhash/hash.hpp"

namespace divhash {

enum class Method { Nn, Rerank, Greedy, Mmr, QpRel };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// "nh" (no hashing: every point is a candidate) or one of the hash kinds.
std::optional<HashKind> parse_hash_choice(std::string_view name);
/// Table name of a hash choice: nh, lshdiv, lshsdiv, pcahash.
std::string_view hash_label(std::optional<HashKind> kind);

struct ExperimentConfig {
  std::filesystem::path data_path;
  std::filesystem::path query_path;
  /// "dense" or "sparse"; sparse files need `sparse_dim`.
  std::string format = "dense";
  std::size_t sparse_dim = 0;
  bool normalize = true;

  std::vector<std::string> methods{"nn"};
  std::vector<std::string> hashes{"nh"};
  std::vector<std::size_t> ks{10};
  double lambda = 0.5;
  std::size_t bits_per_table = 16;  ///< l
  std::size_t table_count = 8;      ///< L
  std::size_t projected_dim = 0;    ///< α; 0 picks min(200, d)
  std::uint64_t seed = 1;

  double rerank_pool = 3.0;
  /// Hashed paths keep the candidate_factor·k closest candidates; 0 keeps all.
  std::size_t candidate_factor = 50;
  bool allow_expensive = false;
  std::size_t qp_max_points = 5000;
  /// Off: time columns are written as 0 so output files are reproducible.
  bool record_timing = true;
  /// 0 reads DIVHASH_WORKERS, falling back to the hardware thread count.
  std::size_t workers = 0;

  // Multi-label runs.
  std::filesystem::path model_path;      ///< load factors instead of fitting
  std::filesystem::path hierarchy_path;  ///< enables the D and h columns
  std::size_t rank = 20;
  double ridge = 1.0;
  std::size_t label_count = 0;  ///< 0: one more than the largest label seen
  std::size_t predict_alpha = 10;

  std::filesystem::path output;

  /// Throws InvalidArgument on empty lists or out-of-range parameters.
  void validate() const;
};

/// Reads a JSON object whose keys mirror the field names above.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view json_text);

struct ResultRow {
  std::string method;
  std::string hash;
  std::size_t k = 0;
  double precision = 0.0;
  double subtopic_recall = 0.0;
  double diversity = 0.0;
  double h = 0.0;
  double seconds = 0.0;  ///< mean per query
  double candidate_fraction = 1.0;
  std::size_t queries = 0;
};

struct MultilabelRow {
  std::string method;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  std::optional<double> diversity;
  std::optional<double> h;
  double millis = 0.0;  ///< mean per query
  double eval_fraction = 1.0;
  double cutoff = 0.0;
  std::size_t queries = 0;
};

/// Progress and warning sink; defaults to standard error.
using LogFn = std::function<void(std::string_view)>;

/// One row per (method, hash, k). NH feeds every point to the selector;
/// hashed choices feed the LSH candidates. Metrics are per-query means.
std::vector<ResultRow> run_retrieval_experiment(const ExperimentConfig& config, const LogFn& log = {});
std::vector<ResultRow> run_retrieval_experiment(const ExperimentConfig& config, const Dataset& data,
                                                const Dataset& queries, const LogFn& log = {});

/// Splits the labelled data 4:1 into train and test (seeded shuffle), holds
/// out a quarter of train for the cutoff search, and reports an "exact" row
/// followed by one row per hash choice other than nh.
std::vector<MultilabelRow> run_multilabel_experiment(const ExperimentConfig& config, const LogFn& log = {});
std::vector<MultilabelRow> run_multilabel_experiment(const ExperimentConfig& config, const Dataset& data,
                                                     const LogFn& log = {});

/// Number of worker threads for query batches.
std::size_t resolve_workers(std::size_t requested);

// Output. CSV floats use 3 decimals; the JSON twin keeps full precision.
std::string csv_header();
std::string format_row(const ResultRow& row);
std::string to_csv(const std::vector<ResultRow>& rows);
std::string to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_json(std::string_view text);

std::string multilabel_csv_header();
std::string format_row(const MultilabelRow& row);
std::string to_csv(const std::vector<MultilabelRow>& rows);
std::string to_json(const std::vector<MultilabelRow>& rows);

/// Writes `text` to `path`; throws IoError when the file cannot be written.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace divhash
