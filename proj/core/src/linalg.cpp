#include "divhash/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "divhash/error.hpp"
#include "divhash/random.hpp"

namespace divhash {
namespace {

// X is only touched through X·B and Xᵀ·Q so dense and dataset-backed (possibly
// sparse) matrices share one iteration.
template <typename ApplyX, typename ApplyXt>
TruncatedBasis subspace_iteration(std::size_t d, std::size_t n, double frob_sq, std::size_t alpha,
                                  const SvdOptions& opt, ApplyX&& apply_x, ApplyXt&& apply_xt) {
  if (alpha < 1 || alpha > std::min(d, n)) {
    throw InvalidArgument("truncated_svd: alpha must be in [1, min(d, n)], got " +
                          std::to_string(alpha));
  }
  const auto a = static_cast<Eigen::Index>(alpha);
  const auto rows = static_cast<Eigen::Index>(d);

  Eigen::MatrixXd Z(rows, a);
  for (Eigen::Index j = 0; j < a; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      Z(i, j) = counter_rng::gaussian(opt.seed, static_cast<std::uint64_t>(j),
                                      static_cast<std::uint64_t>(i));
    }
  }

  TruncatedBasis out;
  Eigen::MatrixXd Q;
  Eigen::VectorXd theta;
  for (int it = 1; it <= std::max(opt.max_iter, 1); ++it) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, a);

    // Rayleigh-Ritz on span(Q): eigenpairs of (XᵀQ)ᵀ(XᵀQ), sorted descending.
    Eigen::MatrixXd B = apply_xt(Q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B.transpose() * B);
    const Eigen::MatrixXd V = eig.eigenvectors().rowwise().reverse();
    theta = eig.eigenvalues().reverse().cwiseMax(0.0);
    Q = Q * V;
    B = B * V;

    Z = apply_x(B);  // = XXᵀQ, also the next block to orthonormalize
    const double scale = theta(0);
    bool done = true;
    for (Eigen::Index j = 0; j < a; ++j) {
      const double res = (Z.col(j) - theta(j) * Q.col(j)).norm();
      if (res > opt.tol * scale) done = false;
    }
    out.residual_history.push_back(std::sqrt(std::max(0.0, frob_sq - theta.sum())));
    out.iterations = it;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.U = std::move(Q);
  out.singular_values.resize(alpha);
  for (std::size_t j = 0; j < alpha; ++j) {
    out.singular_values[j] = std::sqrt(theta(static_cast<Eigen::Index>(j)));
  }
  return out;
}

}  // namespace

TruncatedBasis truncated_svd(const Eigen::MatrixXd& X, std::size_t alpha, const SvdOptions& options) {
  return subspace_iteration(
      static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(X.cols()), X.squaredNorm(), alpha,
      options, [&](const Eigen::MatrixXd& B) -> Eigen::MatrixXd { return X * B; },
      [&](const Eigen::MatrixXd& Q) -> Eigen::MatrixXd { return X.transpose() * Q; });
}

TruncatedBasis truncated_svd(const Dataset& data, std::size_t alpha, const SvdOptions& options) {
  double frob_sq = 0.0;
  for (const auto& p : data) frob_sq += p.vector.squared_norm();
  const auto d = static_cast<Eigen::Index>(data.dim());
  const auto n = static_cast<Eigen::Index>(data.size());

  auto apply_xt = [&](const Eigen::MatrixXd& Q) -> Eigen::MatrixXd {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, Q.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& v = data[static_cast<std::size_t>(i)].vector;
      const auto vals = v.values();
      if (v.is_sparse()) {
        const auto idx = v.indices();
        for (std::size_t t = 0; t < idx.size(); ++t) out.row(i) += vals[t] * Q.row(idx[t]);
      } else {
        out.row(i) = Eigen::Map<const Eigen::VectorXd>(vals.data(), d).transpose() * Q;
      }
    }
    return out;
  };
  auto apply_x = [&](const Eigen::MatrixXd& B) -> Eigen::MatrixXd {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, B.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& v = data[static_cast<std::size_t>(i)].vector;
      const auto vals = v.values();
      if (v.is_sparse()) {
        const auto idx = v.indices();
        for (std::size_t t = 0; t < idx.size(); ++t) out.row(idx[t]) += vals[t] * B.row(i);
      } else {
        out.noalias() += Eigen::Map<const Eigen::VectorXd>(vals.data(), d) * B.row(i);
      }
    }
    return out;
  };
  return subspace_iteration(data.dim(), data.size(), frob_sq, alpha, options, apply_x, apply_xt);
}

CappedSimplex::CappedSimplex(std::size_t k_, std::size_t n_) : k(k_), n(n_) {
  if (k == 0 || k > n) throw InvalidArgument("capped simplex requires 0 < k <= n");
}

bool CappedSimplex::contains(std::span<const double> a, double tol) const {
  if (a.size() != n) return false;
  double sum = 0.0;
  for (double x : a) {
    if (x < -tol || x > 1.0 + tol) return false;
    sum += x;
  }
  return std::abs(sum - static_cast<double>(k)) <= tol;
}

std::vector<double> project_capped_simplex(std::span<const double> v, std::size_t k) {
  const std::size_t n = v.size();
  if (k == 0 || k > n) {
    throw InvalidArgument("project_capped_simplex: need 0 < k <= n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
  }
  // Event at v_i − 1: coordinate i leaves the cap and starts decreasing.
  // Event at v_i: it hits zero.
  struct Event {
    double at;
    int kind;  // 0 = enter linear region, 1 = leave to zero
  };
  std::vector<Event> events;
  events.reserve(2 * n);
  for (double x : v) {
    events.push_back({x - 1.0, 0});
    events.push_back({x, 1});
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.at < b.at || (a.at == b.at && a.kind < b.kind); });

  const double target = static_cast<double>(k);
  // For τ left of every event all coordinates sit at the cap: φ = n.
  double ones = static_cast<double>(n);
  double lin_count = 0.0;
  double lin_sum = 0.0;  // Σ v_i over coordinates in the linear region
  double tau = events.front().at;
  bool found = static_cast<double>(n) <= target;
  for (std::size_t e = 0; e < events.size() && !found; ++e) {
    const double b = events[e].at;
    const double phi_b = ones + lin_sum - lin_count * b;
    if (phi_b <= target) {
      // φ is linear on [prev, b] with slope −lin_count and crosses target there.
      tau = lin_count > 0.0 ? (ones + lin_sum - target) / lin_count : b;
      found = true;
      break;
    }
    if (events[e].kind == 0) {
      ones -= 1.0;
      lin_count += 1.0;
      lin_sum += b + 1.0;
    } else {
      lin_count -= 1.0;
      lin_sum -= b;
    }
  }
  if (!found) tau = events.back().at;  // unreachable for 0 < k ≤ n

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i] - tau, 0.0, 1.0);
  return out;
}

}  // namespace divhash
