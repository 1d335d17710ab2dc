#include "divhash/multilabel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "divhash/error.hpp"
#include "divhash/select.hpp"

namespace divhash {
namespace {

std::vector<std::size_t> top_by_score(const Eigen::VectorXd& scores, std::size_t alpha) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto m = std::min(alpha, order.size());
  const auto before = [&](std::size_t a, std::size_t b) {
    const auto sa = scores(static_cast<Eigen::Index>(a));
    const auto sb = scores(static_cast<Eigen::Index>(b));
    return sa > sb || (sa == sb && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), before);
  order.resize(m);
  return order;
}

std::vector<int> sorted_copy(std::span<const int> v) {
  std::vector<int> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t overlap(std::span<const int> predicted, std::span<const int> truth) {
  const auto p = sorted_copy(predicted);
  const auto t = sorted_copy(truth);
  std::vector<int> common;
  std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(common));
  return common.size();
}

}  // namespace

void FactorModel::validate() const {
  if (W.cols() != H.cols()) throw InvalidArgument("factor model: W and H have different ranks");
  const auto k = rank();
  if (k == 0) throw InvalidArgument("factor model: rank must be >= 1");
  if (k > std::min(dim(), labels())) throw InvalidArgument("factor model: rank exceeds min(d, labels)");
  if (!W.allFinite() || !H.allFinite()) throw InvalidArgument("factor model: non-finite entry");
}

Eigen::VectorXd FactorModel::embed(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw InvalidArgument("factor model: input has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(dim()));
  }
  return H.transpose() * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

FactorModel load_factors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto labels = detail::read_pod<std::uint64_t>(in);
  const auto d = detail::read_pod<std::uint64_t>(in);
  const auto k = detail::read_pod<std::uint64_t>(in);

  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t expected = 24 + 8 * (labels * k + d * k);
  if (k == 0 || file_size != expected) {
    throw IoError("factor file size mismatch: header implies " + std::to_string(expected) + " bytes, found " +
                  std::to_string(file_size));
  }
  in.seekg(24);

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto read_matrix = [&](std::uint64_t rows) {
    RowMajor m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(8 * rows * k));
    if (!in) throw IoError("unexpected end of factor file");
    return Eigen::MatrixXd(m);
  };
  FactorModel model;
  model.W = read_matrix(labels);
  model.H = read_matrix(d);
  model.validate();
  return model;
}

void save_factors(const FactorModel& model, const std::filesystem::path& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  detail::write_pod<std::uint64_t>(out, model.labels());
  detail::write_pod<std::uint64_t>(out, model.dim());
  detail::write_pod<std::uint64_t>(out, model.rank());
  for (const Eigen::MatrixXd* m : {&model.W, &model.H}) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) detail::write_pod<double>(out, (*m)(r, c));
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

FactorModel fit_lowrank_ridge(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, std::size_t k, double ridge) {
  if (!(ridge > 0.0)) throw InvalidArgument("fit_lowrank_ridge: ridge must be > 0");
  if (X.rows() != Y.rows()) throw InvalidArgument("fit_lowrank_ridge: X and Y row counts differ");
  const auto d = static_cast<std::size_t>(X.cols());
  const auto labels = static_cast<std::size_t>(Y.cols());
  if (k == 0 || k > std::min(d, labels)) throw InvalidArgument("fit_lowrank_ridge: need 1 <= k <= min(d, labels)");

  Eigen::MatrixXd gram = X.transpose() * X;
  gram.diagonal().array() += ridge;
  const Eigen::MatrixXd B = gram.llt().solve(X.transpose() * Y);  // d × labels
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto kk = static_cast<Eigen::Index>(k);

  FactorModel model;
  model.H = svd.matrixU().leftCols(kk) * svd.singularValues().head(kk).asDiagonal();
  model.W = svd.matrixV().leftCols(kk);
  model.validate();
  return model;
}

LabelPrediction predict_exact(const FactorModel& model, std::span<const double> x, std::size_t alpha) {
  const Eigen::VectorXd scores = model.W * model.embed(x);
  LabelPrediction out;
  for (const auto i : top_by_score(scores, alpha)) {
    out.labels.push_back(static_cast<int>(i));
    out.scores.push_back(scores(static_cast<Eigen::Index>(i)));
  }
  out.eval_count = model.labels();
  out.underfilled = out.labels.size() < alpha;
  return out;
}

std::size_t default_label_projection(std::size_t rank) { return std::min<std::size_t>({200, 2 * rank, rank}); }

LabelIndex build_label_index(const FactorModel& model, const LabelIndexParams& params) {
  model.validate();
  const auto k = model.rank();
  std::vector<DataPoint> points;
  std::vector<double> norms;
  points.reserve(model.labels());
  for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
    const double norm = model.W.row(i).norm();
    if (norm == 0.0) throw InvalidArgument("label " + std::to_string(i) + " has a zero embedding");
    std::vector<double> row(k);
    for (std::size_t c = 0; c < k; ++c) row[c] = model.W(i, static_cast<Eigen::Index>(c)) / norm;
    DataPoint p;
    p.id = static_cast<PointId>(i);
    p.vector = FeatureVector::dense(std::move(row));
    points.push_back(std::move(p));
    norms.push_back(norm);
  }
  auto rows = std::make_shared<const Dataset>(k, std::move(points));

  FamilyParams fp;
  fp.kind = params.kind;
  fp.bits_per_table = params.bits_per_table;
  fp.table_count = params.table_count;
  fp.dim = k;
  fp.seed = params.seed;
  if (params.kind != HashKind::PlainRandom) {
    fp.projected_dim = params.projected_dim != 0 ? std::min(params.projected_dim, k) : default_label_projection(k);
  }
  auto family = new_family(fp, rows.get());
  auto index = build(rows, family);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> unit = model.W;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) unit.row(i) /= norms[static_cast<std::size_t>(i)];
  return LabelIndex{std::move(rows), std::move(index), std::move(norms), std::move(unit)};
}

LabelPrediction predict_diverse(const FactorModel& model, const LabelIndex& index, std::span<const double> x,
                                std::size_t alpha, const DiverseOptions& options) {
  if (alpha >= model.labels()) return predict_exact(model, x, alpha);
  if (index.rows->size() != model.labels()) throw InvalidArgument("predict_diverse: index built for another model");

  const Eigen::VectorXd q = model.embed(x);
  LabelPrediction out;
  const double norm = q.norm();
  if (norm == 0.0) {
    out.underfilled = true;
    return out;
  }
  std::vector<double> unit(q.data(), q.data() + q.size());
  for (auto& v : unit) v /= norm;
  const auto query_vec = FeatureVector::dense(std::move(unit));

  auto cands = index.index.query(query_vec);
  out.eval_count = cands.union_size;
  if (cands.ids.empty()) {
    out.underfilled = true;
    return out;
  }
  if (options.max_candidates && cands.ids.size() > *options.max_candidates) {
    // Largest cosine first, ties by id; same order as distance between unit vectors.
    const double* uq = query_vec.values().data();
    const auto k = static_cast<std::size_t>(q.size());
    std::vector<std::pair<double, PointId>> ranked;
    ranked.reserve(cands.ids.size());
    for (const PointId id : cands.ids) {
      const double* row = index.unit_rows.data() + static_cast<std::size_t>(id) * k;
      double acc[4] = {0.0, 0.0, 0.0, 0.0};
      std::size_t c = 0;
      for (; c + 4 <= k; c += 4) {
        for (std::size_t j = 0; j < 4; ++j) acc[j] += row[c + j] * uq[c + j];
      }
      for (; c < k; ++c) acc[0] += row[c] * uq[c];
      ranked.emplace_back(-((acc[0] + acc[1]) + (acc[2] + acc[3])), id);
    }
    const auto keep = static_cast<std::ptrdiff_t>(*options.max_candidates);
    std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());
    cands.ids.clear();
    for (std::ptrdiff_t i = 0; i < keep; ++i) cands.ids.push_back(ranked[static_cast<std::size_t>(i)].second);
    std::sort(cands.ids.begin(), cands.ids.end());
  }

  const auto problem = make_problem(*index.rows, cands.ids, query_vec, alpha, options.lambda);
  const auto chosen = select_greedy_div(problem);
  for (const auto id : chosen.ids) {
    out.labels.push_back(static_cast<int>(id));
    out.scores.push_back(model.W.row(static_cast<Eigen::Index>(id)).dot(q));
  }
  out.underfilled = chosen.underfilled;
  return out;
}

std::vector<int> threshold_select(const LabelPrediction& prediction, ThresholdStrategy strategy, double param) {
  std::vector<std::size_t> order(prediction.labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = prediction.scores[a], sb = prediction.scores[b];
    return sa > sb || (sa == sb && prediction.labels[a] < prediction.labels[b]);
  });
  std::vector<int> out;
  if (strategy == ThresholdStrategy::FixedAlpha) {
    const double want = std::ceil(param);
    const auto m = want <= 0.0 ? std::size_t{0} : std::min(order.size(), static_cast<std::size_t>(want));
    for (std::size_t i = 0; i < m; ++i) out.push_back(prediction.labels[order[i]]);
  } else {
    for (const auto i : order) {
      if (prediction.scores[i] >= param) out.push_back(prediction.labels[i]);
    }
  }
  return out;
}

double set_precision(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty()) return 0.0;
  return static_cast<double>(overlap(predicted, truth)) / static_cast<double>(sorted_copy(predicted).size());
}

double set_recall(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) return 0.0;
  return static_cast<double>(overlap(predicted, truth)) / static_cast<double>(sorted_copy(truth).size());
}

CutoffChoice choose_cutoff(std::span<const LabelPrediction> predictions, std::span<const std::vector<int>> truth,
                           const HierarchyTree* tree) {
  if (predictions.size() != truth.size()) throw InvalidArgument("choose_cutoff: predictions and truth differ in size");
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& p : predictions) {
    for (const double s : p.scores) {
      lo = any ? std::min(lo, s) : s;
      hi = any ? std::max(hi, s) : s;
      any = true;
    }
  }
  CutoffChoice best;
  if (!any) return best;

  constexpr int kGrid = 50;
  for (int j = 0; j < kGrid; ++j) {
    const double cutoff = lo + (hi - lo) * static_cast<double>(j) / (kGrid - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const auto kept = threshold_select(predictions[i], ThresholdStrategy::ScoreCutoff, cutoff);
      const double prec = set_precision(kept, truth[i]);
      total += tree != nullptr ? h_score(prec, tree_diversity(kept, *tree)) : f_score(prec, set_recall(kept, truth[i]));
    }
    const double mean = predictions.empty() ? 0.0 : total / static_cast<double>(predictions.size());
    if (j == 0 || mean > best.objective) best = {cutoff, mean};
  }
  return best;
}

int majority_vote(std::span<const int> votes) {
  if (votes.empty()) throw InvalidArgument("majority_vote: no votes");
  std::map<int, std::size_t> counts;
  for (const int v : votes) ++counts[v];
  return std::max_element(counts.begin(), counts.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

}  // namespace divhash
