#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "divhash/dataset.hpp"

namespace divhash {

struct Candidate {
  PointId id = 0;
  const FeatureVector* vector = nullptr;
};

/// Pick k of the candidates for query q, trading relevance against diversity
/// with λ ∈ [0, 1] (λ = 1: relevance only).
struct SelectionProblem {
  const FeatureVector* query = nullptr;
  std::vector<Candidate> candidates;
  std::size_t k = 10;
  double lambda = 0.5;

  /// Throws InvalidArgument on k = 0, λ outside [0, 1], a null vector or
  /// repeated candidate ids.
  void validate() const;
};

/// Candidates drawn from `data` by id, in the given order.
SelectionProblem make_problem(const Dataset& data, std::span<const PointId> ids, const FeatureVector& query,
                              std::size_t k, double lambda);

struct SelectionResult {
  std::vector<PointId> ids;     ///< in pick order, length min(k, |candidates|)
  std::vector<double> scores;   ///< the selector's criterion at pick time
  double objective = 0.0;       ///< diversity-regularized loss of the chosen set
  bool underfilled = false;     ///< fewer than k candidates were available
};

/// λ Σ_i ‖q − x_i‖² − (1 − λ) Σ_{i,j} ‖x_i − x_j‖² over the chosen points.
/// The pair sum runs over ordered pairs, so every unordered pair counts twice.
double evaluate_objective(const FeatureVector& q, std::span<const FeatureVector* const> points, double lambda);

/// The k candidates closest to q (squared distance, ties by id).
SelectionResult select_nn(const SelectionProblem& problem);

/// Greedy post-selection over a candidate set: at iteration i (1-based) pick
///   argmin_r λ‖q − r‖² − (1/i) Σ_{s∈S} ‖r − s‖²
/// over the remaining pool, ties by ascending id.
SelectionResult select_greedy_div(const SelectionProblem& problem);

/// Maximal marginal relevance with sim(a, b) = a·b:
///   argmax_r λ·sim(q, r) − (1 − λ)·max_{s∈S} sim(r, s).
/// The first pick is the most similar candidate.
SelectionResult select_mmr(const SelectionProblem& problem);

/// Backward selection: keep the ⌈pool_factor·k⌉ nearest candidates, start
/// from the nearest, then repeatedly add the pool point with the largest
/// summed squared distance to the points already chosen.
SelectionResult select_rerank(const SelectionProblem& problem, double pool_factor);

struct QpOptions {
  /// Step size η; 0 means 1 / (2‖G‖_F), a bound on 1/Lipschitz(∇f).
  double step = 0.0;
  int max_iter = 5000;
  double tol = 1e-10;
  bool record_history = false;
};

struct QpSolveReport {
  std::vector<double> alpha;  ///< in [0, 1]^n, sums to k; candidate order
  double relaxed_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  ///< f(α_t), when requested
};

/// Relaxed quadratic program
///   min λ cᵀα + αᵀGα   s.t. Σα = k, 0 ≤ α ≤ 1,
/// with c_i = −q·x_i and G_ij = x_i·x_j over the candidate set only, solved
/// by projected gradient descent from α = (k/n)·1.
QpSolveReport qp_relax_solve(const SelectionProblem& problem, const QpOptions& options = {});

/// λ cᵀα + αᵀGα for a given α (candidate order).
double qp_objective(const SelectionProblem& problem, std::span<const double> alpha);

/// Solves the relaxation and keeps the k largest coordinates (ties by id).
SelectionResult select_qp_rel(const SelectionProblem& problem, const QpOptions& options = {});

/// Rounds a fractional solution: ids of the k largest α (ties by id).
SelectionResult round_top_k(const SelectionProblem& problem, std::span<const double> alpha);

}  // namespace divhash
