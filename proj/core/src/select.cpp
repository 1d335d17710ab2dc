#include "divhash/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "divhash/error.hpp"
#include "divhash/linalg.hpp"

namespace divhash {
namespace {

std::vector<const FeatureVector*> vectors_of(const SelectionProblem& p, std::span<const std::size_t> picks) {
  std::vector<const FeatureVector*> out;
  out.reserve(picks.size());
  for (const std::size_t i : picks) out.push_back(p.candidates[i].vector);
  return out;
}

SelectionResult finish(const SelectionProblem& p, std::span<const std::size_t> picks, std::vector<double> scores) {
  SelectionResult r;
  r.ids.reserve(picks.size());
  for (const std::size_t i : picks) r.ids.push_back(p.candidates[i].id);
  r.scores = std::move(scores);
  const auto vecs = vectors_of(p, picks);
  r.objective = evaluate_objective(*p.query, vecs, p.lambda);
  r.underfilled = p.candidates.size() < p.k;
  return r;
}

// Candidate positions sorted by distance to the query, ties by id.
std::vector<std::size_t> nearest_order(const SelectionProblem& p, std::vector<double>& dist) {
  const std::size_t n = p.candidates.size();
  dist.resize(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(*p.query, *p.candidates[i].vector);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && p.candidates[a].id < p.candidates[b].id);
  });
  return order;
}

}  // namespace

void SelectionProblem::validate() const {
  if (query == nullptr) throw InvalidArgument("selection: query is null");
  if (k < 1) throw InvalidArgument("selection: k must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("selection: lambda must lie in [0, 1]");
  std::vector<PointId> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.vector == nullptr) throw InvalidArgument("selection: candidate vector is null");
    if (c.vector->dim() != query->dim()) throw InvalidArgument("selection: candidate dimension mismatch");
    ids.push_back(c.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw InvalidArgument("selection: candidate ids must be distinct");
  }
}

SelectionProblem make_problem(const Dataset& data, std::span<const PointId> ids, const FeatureVector& query,
                              std::size_t k, double lambda) {
  SelectionProblem p;
  p.query = &query;
  p.k = k;
  p.lambda = lambda;
  p.candidates.reserve(ids.size());
  for (const PointId id : ids) {
    if (id >= data.size()) throw InvalidArgument("make_problem: id out of range");
    p.candidates.push_back({id, &data[id].vector});
  }
  return p;
}

double evaluate_objective(const FeatureVector& q, std::span<const FeatureVector* const> points, double lambda) {
  double relevance = 0.0;
  for (const auto* x : points) relevance += squared_distance(q, *x);
  // Ordered double sum over i ≠ j, i.e. twice the unordered pair sum.
  double spread = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) spread += squared_distance(*points[i], *points[j]);
  }
  return lambda * relevance - (1.0 - lambda) * 2.0 * spread;
}

SelectionResult select_nn(const SelectionProblem& p) {
  p.validate();
  std::vector<double> dist;
  auto order = nearest_order(p, dist);
  order.resize(std::min(p.k, order.size()));
  std::vector<double> scores;
  for (const auto i : order) scores.push_back(dist[i]);
  return finish(p, order, std::move(scores));
}

SelectionResult select_greedy_div(const SelectionProblem& p) {
  p.validate();
  const std::size_t n = p.candidates.size();
  const std::size_t m = std::min(p.k, n);
  std::vector<double> qdist(n), spread(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) qdist[r] = squared_distance(*p.query, *p.candidates[r].vector);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> picks;
  std::vector<double> scores;

  for (std::size_t i = 1; i <= m; ++i) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (taken[r]) continue;
      const double score = p.lambda * qdist[r] - (1.0 / static_cast<double>(i)) * spread[r];
      if (best == n || score < best_score ||
          (score == best_score && p.candidates[r].id < p.candidates[best].id)) {
        best = r;
        best_score = score;
      }
    }
    taken[best] = 1;
    picks.push_back(best);
    scores.push_back(best_score);
    for (std::size_t r = 0; r < n; ++r) {
      if (!taken[r]) spread[r] += squared_distance(*p.candidates[r].vector, *p.candidates[best].vector);
    }
  }
  return finish(p, picks, std::move(scores));
}

SelectionResult select_mmr(const SelectionProblem& p) {
  p.validate();
  const std::size_t n = p.candidates.size();
  const std::size_t m = std::min(p.k, n);
  std::vector<double> qsim(n), max_sim(n, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < n; ++r) qsim[r] = p.query->dot(*p.candidates[r].vector);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> picks;
  std::vector<double> scores;

  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (taken[r]) continue;
      const double score = i == 0 ? qsim[r] : p.lambda * qsim[r] - (1.0 - p.lambda) * max_sim[r];
      if (best == n || score > best_score ||
          (score == best_score && p.candidates[r].id < p.candidates[best].id)) {
        best = r;
        best_score = score;
      }
    }
    taken[best] = 1;
    picks.push_back(best);
    scores.push_back(best_score);
    for (std::size_t r = 0; r < n; ++r) {
      if (!taken[r]) max_sim[r] = std::max(max_sim[r], p.candidates[r].vector->dot(*p.candidates[best].vector));
    }
  }
  return finish(p, picks, std::move(scores));
}

SelectionResult select_rerank(const SelectionProblem& p, double pool_factor) {
  p.validate();
  if (!(pool_factor >= 1.0)) throw InvalidArgument("select_rerank: pool_factor must be >= 1");
  std::vector<double> dist;
  auto pool = nearest_order(p, dist);
  const auto pool_size = static_cast<std::size_t>(std::ceil(pool_factor * static_cast<double>(p.k)));
  pool.resize(std::min(pool_size, pool.size()));
  const std::size_t m = std::min(p.k, pool.size());

  std::vector<std::size_t> picks;
  std::vector<double> scores;
  if (m == 0) return finish(p, picks, scores);
  std::vector<double> spread(pool.size(), 0.0);
  std::vector<char> taken(pool.size(), 0);
  std::size_t current = 0;  // the nearest point seeds the set
  double current_score = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) {
      std::size_t best = pool.size();
      for (std::size_t r = 0; r < pool.size(); ++r) {
        if (taken[r]) continue;
        if (best == pool.size() || spread[r] > spread[best] ||
            (spread[r] == spread[best] && p.candidates[pool[r]].id < p.candidates[pool[best]].id)) {
          best = r;
        }
      }
      current = best;
      current_score = spread[best];
    }
    taken[current] = 1;
    picks.push_back(pool[current]);
    scores.push_back(current_score);
    for (std::size_t r = 0; r < pool.size(); ++r) {
      if (!taken[r]) spread[r] += squared_distance(*p.candidates[pool[r]].vector, *p.candidates[pool[current]].vector);
    }
  }
  return finish(p, picks, std::move(scores));
}

namespace {

struct QpData {
  Eigen::VectorXd c;
  Eigen::MatrixXd G;
};

QpData qp_data(const SelectionProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.candidates.size());
  QpData d;
  d.c.resize(n);
  d.G.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& xi = *p.candidates[static_cast<std::size_t>(i)].vector;
    d.c(i) = -p.query->dot(xi);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double g = xi.dot(*p.candidates[static_cast<std::size_t>(j)].vector);
      d.G(i, j) = g;
      d.G(j, i) = g;
    }
  }
  return d;
}

double objective_of(const QpData& d, double lambda, const Eigen::VectorXd& a) {
  return lambda * d.c.dot(a) + a.dot(d.G * a);
}

}  // namespace

double qp_objective(const SelectionProblem& p, std::span<const double> alpha) {
  p.validate();
  if (alpha.size() != p.candidates.size()) throw InvalidArgument("qp_objective: alpha size mismatch");
  const auto d = qp_data(p);
  const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  return objective_of(d, p.lambda, a);
}

QpSolveReport qp_relax_solve(const SelectionProblem& p, const QpOptions& opt) {
  p.validate();
  const std::size_t n = p.candidates.size();
  if (n == 0) throw InvalidArgument("qp_relax_solve: no candidates");
  if (p.k > n) {
    throw InvalidArgument("qp_relax_solve: k = " + std::to_string(p.k) + " exceeds candidate count " +
                          std::to_string(n));
  }
  const auto d = qp_data(p);
  double step = opt.step;
  if (!(step > 0.0)) {
    const double fro = d.G.norm();
    step = fro > 0.0 ? 1.0 / (2.0 * fro) : 1.0;
  }

  QpSolveReport rep;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                static_cast<double>(p.k) / static_cast<double>(n));
  if (opt.record_history) rep.objective_history.push_back(objective_of(d, p.lambda, a));
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd grad = p.lambda * d.c + 2.0 * (d.G * a);
    const Eigen::VectorXd trial = a - step * grad;
    const auto projected = project_capped_simplex(std::span<const double>(trial.data(), n), p.k);
    const Eigen::VectorXd next = Eigen::Map<const Eigen::VectorXd>(projected.data(), static_cast<Eigen::Index>(n));
    const double moved = (next - a).norm();
    a = next;
    rep.iterations = it;
    if (opt.record_history) rep.objective_history.push_back(objective_of(d, p.lambda, a));
    if (moved <= opt.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.alpha.assign(a.data(), a.data() + a.size());
  rep.relaxed_objective = objective_of(d, p.lambda, a);
  return rep;
}

SelectionResult round_top_k(const SelectionProblem& p, std::span<const double> alpha) {
  p.validate();
  if (alpha.size() != p.candidates.size()) throw InvalidArgument("round_top_k: alpha size mismatch");
  std::vector<std::size_t> order(alpha.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return alpha[a] > alpha[b] || (alpha[a] == alpha[b] && p.candidates[a].id < p.candidates[b].id);
  });
  order.resize(std::min(p.k, order.size()));
  std::vector<double> scores;
  for (const auto i : order) scores.push_back(alpha[i]);
  return finish(p, order, std::move(scores));
}

SelectionResult select_qp_rel(const SelectionProblem& p, const QpOptions& opt) {
  p.validate();
  if (p.candidates.size() <= p.k) {
    // Every candidate is taken; the relaxation has nothing to decide.
    std::vector<double> ones(p.candidates.size(), 1.0);
    return round_top_k(p, ones);
  }
  const auto rep = qp_relax_solve(p, opt);
  return round_top_k(p, rep.alpha);
}

}  // namespace divhash
