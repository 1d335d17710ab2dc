#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "divhash/dataset.hpp"

namespace divhash {

/// Top-α left singular vectors of a d × n matrix.
struct TruncatedBasis {
  Eigen::MatrixXd U;                   ///< d × α, orthonormal columns
  std::vector<double> singular_values;  ///< α values, non-increasing
  bool converged = false;
  int iterations = 0;
  /// ‖X − UUᵀX‖_F after each outer iteration.
  std::vector<double> residual_history;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(U.rows()); }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(U.cols()); }
};

struct SvdOptions {
  double tol = 1e-6;
  int max_iter = 300;
  std::uint64_t seed = 0x5eedULL;
};

/// Block power (subspace) iteration with QR re-orthonormalization and a
/// Rayleigh-Ritz rotation each step. Stops once every column satisfies
/// ‖XXᵀu_i − σ_i²u_i‖ ≤ tol·σ₁²; otherwise returns the last iterate with
/// converged = false. Requires 1 ≤ alpha ≤ min(d, n).
TruncatedBasis truncated_svd(const Eigen::MatrixXd& X, std::size_t alpha,
                             const SvdOptions& options = {});

/// Same, for the d × n matrix whose columns are the dataset points.
TruncatedBasis truncated_svd(const Dataset& data, std::size_t alpha,
                             const SvdOptions& options = {});

/// Feasible set {a : Σa = k, 0 ≤ a ≤ 1} of dimension n.
struct CappedSimplex {
  std::size_t k = 1;
  std::size_t n = 1;

  CappedSimplex(std::size_t k, std::size_t n);
  bool contains(std::span<const double> a, double tol = 1e-9) const;
};

/// Euclidean projection onto the capped simplex with budget k.
///
/// Finds the scalar τ with Σ clip(v_i − τ, 0, 1) = k by sweeping the sorted
/// breakpoints {v_i − 1, v_i} of the piecewise-linear left side, then
/// returns clip(v − τ, 0, 1). O(n log n). Throws if k = 0 or k > n.
std::vector<double> project_capped_simplex(std::span<const double> v, std::size_t k);

}  // namespace divhash
