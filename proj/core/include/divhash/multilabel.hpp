#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "divhash/dataset.hpp"
#include "divhash/hash.hpp"
#include "divhash/index.hpp"
#include "divhash/metrics.hpp"

namespace divhash {

/// Low-rank multi-label predictor: label i scores W_i·(Hᵀx).
struct FactorModel {
  Eigen::MatrixXd W;  ///< labels × k
  Eigen::MatrixXd H;  ///< d × k

  std::size_t labels() const noexcept { return static_cast<std::size_t>(W.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(H.rows()); }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(W.cols()); }

  /// Throws InvalidArgument on mismatched ranks, k > min(d, labels) or a
  /// non-finite entry.
  void validate() const;
  /// Hᵀx; x must have dimension d.
  Eigen::VectorXd embed(std::span<const double> x) const;
};

/// Header of three little-endian u64 (labels, d, k), then W and H row-major
/// as float64.
FactorModel load_factors(const std::filesystem::path& path);
void save_factors(const FactorModel& model, const std::filesystem::path& path);

/// Synthetic stand-in for a trained model: ridge least squares
/// B = (XᵀX + ridge·I)⁻¹XᵀY, truncated to rank k by SVD, with H = U_kΣ_k and
/// W = V_k so that HWᵀ ≈ B. X is n × d, Y is n × labels (typically ±1).
FactorModel fit_lowrank_ridge(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, std::size_t k, double ridge);

struct LabelPrediction {
  std::vector<int> labels;
  std::vector<double> scores;  ///< W_i·(Hᵀx), aligned with labels
  std::size_t eval_count = 0;  ///< label scores or distances computed
  bool underfilled = false;
};

/// The alpha highest-scoring labels (ties by id) from a full scan.
LabelPrediction predict_exact(const FactorModel& model, std::span<const double> x, std::size_t alpha);

/// Hash index over the unit-normalized rows of W. The original row norms are
/// kept so that returned scores are the model's true scores.
struct LabelIndex {
  std::shared_ptr<const Dataset> rows;
  LshIndex index;
  std::vector<double> norms;
  /// The same unit rows stored contiguously, for ranking candidates by angle.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> unit_rows;
};

struct LabelIndexParams {
  HashKind kind = HashKind::PcaProjected;
  std::size_t bits_per_table = 12;
  std::size_t table_count = 8;
  /// 0 picks min(200, 2k), clamped to k.
  std::size_t projected_dim = 0;
  std::uint64_t seed = 1;
};

std::size_t default_label_projection(std::size_t rank);
LabelIndex build_label_index(const FactorModel& model, const LabelIndexParams& params = {});

struct DiverseOptions {
  double lambda = 0.5;
  /// Keep only this many angularly closest candidates before selection.
  std::optional<std::size_t> max_candidates;
};

/// Queries the label index with the normalized embedding, then runs the
/// greedy diversity selector over the candidate labels. When alpha covers
/// every label, all labels are returned by score without hashing.
LabelPrediction predict_diverse(const FactorModel& model, const LabelIndex& index, std::span<const double> x,
                                std::size_t alpha, const DiverseOptions& options = {});

enum class ThresholdStrategy { FixedAlpha, ScoreCutoff };

/// FixedAlpha keeps the top ⌈param⌉ labels; ScoreCutoff keeps every label
/// with score ≥ param. The result is ordered by score, ties by id.
std::vector<int> threshold_select(const LabelPrediction& prediction, ThresholdStrategy strategy, double param);

/// |predicted ∩ truth| / |predicted| (0 for an empty prediction) and
/// |predicted ∩ truth| / |truth| (0 for an empty truth set).
double set_precision(std::span<const int> predicted, std::span<const int> truth);
double set_recall(std::span<const int> predicted, std::span<const int> truth);

struct CutoffChoice {
  double cutoff = 0.0;
  double objective = 0.0;  ///< mean h-score, or mean f-score without a tree
};

/// Picks a score cutoff from 50 evenly spaced values spanning the observed
/// scores. Maximizes the mean h-score of (precision, tree diversity) when a
/// hierarchy is supplied and the mean f-score otherwise; ties keep the
/// smaller cutoff.
CutoffChoice choose_cutoff(std::span<const LabelPrediction> predictions, std::span<const std::vector<int>> truth,
                           const HierarchyTree* tree = nullptr);

/// The most frequent value, ties by the smallest. Throws on empty input.
int majority_vote(std::span<const int> votes);

}  // namespace divhash
