#pragma once

// Naive reference implementations used only by the tests. They work on
// plain std::vector<double> and recompute everything from scratch, so they
// share no code with the library beyond the input data.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double sqdist(const Vec& a, const Vec& b);

/// Positions (into xs) of the k nearest points, ties by ids[i].
std::vector<std::size_t> nn(const Vec& q, const std::vector<Vec>& xs, const std::vector<std::uint32_t>& ids,
                            std::size_t k);

/// Literal line-7 loop: recomputes Σ_{s∈S}‖r − s‖² for every candidate at every step.
std::vector<std::size_t> greedy(const Vec& q, const std::vector<Vec>& xs, const std::vector<std::uint32_t>& ids,
                                std::size_t k, double lambda);

std::vector<std::size_t> mmr(const Vec& q, const std::vector<Vec>& xs, const std::vector<std::uint32_t>& ids,
                             std::size_t k, double lambda);

std::vector<std::size_t> rerank(const Vec& q, const std::vector<Vec>& xs, const std::vector<std::uint32_t>& ids,
                                std::size_t k, double pool_factor);

/// λ Σ‖q − x‖² − (1 − λ) Σ_{i≠j} ‖x_i − x_j‖² by double loop.
double set_objective(const Vec& q, const std::vector<Vec>& chosen, double lambda);

/// min over all k-subsets of λcᵀα + αᵀGα (α the subset indicator).
struct Exhaustive {
  double best = 0.0;
  std::vector<std::size_t> subset;
};
Exhaustive qp_integer_optimum(const Vec& q, const std::vector<Vec>& xs, std::size_t k, double lambda);

/// Projection onto {Σa = k, 0 ≤ a ≤ 1} by bisection on the shift τ.
Vec capped_simplex_bisection(const Vec& v, std::size_t k);

/// Projection by enumerating, for every coordinate, whether it sits at 0,
/// at 1 or strictly inside; the free coordinates share one shift. Returns
/// the feasible candidate closest to v. Only for small n (3^n cases).
Vec capped_simplex_active_sets(const Vec& v, std::size_t k);

/// Exact k nearest ids (positions) by squared distance, ties by position.
std::vector<std::size_t> knn(const std::vector<Vec>& xs, const Vec& q, std::size_t k);

/// Uniform unit vector from a seeded std::mt19937_64 stream.
Vec random_unit(std::size_t d, std::uint64_t seed);

}  // namespace oracle
