#include "divhash/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "divhash/error.hpp"
#include "divhash/index.hpp"
#include "divhash/metrics.hpp"
#include "divhash/multilabel.hpp"
#include "divhash/random.hpp"
#include "divhash/select.hpp"

namespace divhash {
namespace {

void default_log(std::string_view msg) { std::cerr << "divhash: " << msg << '\n'; }

// Runs fn(i) for i in [0, n) on `workers` threads. Rethrows the exception of
// the lowest failing index so errors do not depend on scheduling.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
}

Dataset load_data(const ExperimentConfig& c, const std::filesystem::path& path) {
  if (c.format == "sparse") return load_sparse(path, c.sparse_dim, c.normalize);
  return load_dense(path, c.normalize);
}

SelectionResult run_selector(Method m, const SelectionProblem& p, double pool) {
  switch (m) {
    case Method::Nn: return select_nn(p);
    case Method::Rerank: return select_rerank(p, pool);
    case Method::Greedy: return select_greedy_div(p);
    case Method::Mmr: return select_mmr(p);
    case Method::QpRel: return select_qp_rel(p);
  }
  throw InvalidArgument("unknown method");
}

std::size_t default_projection(const Dataset& data, std::size_t requested) {
  const std::size_t cap = std::min(data.dim(), data.size());
  return requested != 0 ? std::min(requested, cap) : std::min<std::size_t>(200, cap);
}

struct QueryOutcome {
  double precision = 0, recall = 0, diversity = 0, h = 0, seconds = 0, fraction = 0;
};

std::vector<ResultRow> retrieval_impl(const ExperimentConfig& c, std::shared_ptr<const Dataset> data,
                                      const Dataset& queries, const LogFn& log) {
  if (data->empty()) throw InvalidArgument("dataset is empty");
  if (queries.dim() != data->dim()) throw InvalidArgument("query dimension differs from dataset dimension");
  const std::size_t n = data->size();
  const std::size_t workers = resolve_workers(c.workers);

  std::vector<PointId> everyone(n);
  std::iota(everyone.begin(), everyone.end(), PointId{0});

  std::vector<ResultRow> rows;
  for (const auto& hash_name : c.hashes) {
    const auto kind = parse_hash_choice(hash_name);
    std::optional<LshIndex> index;
    if (kind) {
      log("building " + std::string(hash_label(kind)) + " index over " + std::to_string(n) + " points");
      FamilyParams fp;
      fp.kind = *kind;
      fp.bits_per_table = c.bits_per_table;
      fp.table_count = c.table_count;
      fp.dim = data->dim();
      fp.projected_dim = *kind == HashKind::PlainRandom ? 0 : default_projection(*data, c.projected_dim);
      fp.seed = c.seed;
      index.emplace(build(data, new_family(fp, data.get())));
    }

    for (const auto& method_name : c.methods) {
      const Method method = parse_method(method_name);
      if (method == Method::QpRel && !kind) {
        if (!c.allow_expensive) {
          log("skipping qprel on nh: needs allow_expensive (dense gram matrix over the whole dataset)");
          continue;
        }
        if (n > c.qp_max_points) {
          log("skipping qprel on nh: " + std::to_string(n) + " points exceeds the cap of " +
              std::to_string(c.qp_max_points));
          continue;
        }
      }
      for (const std::size_t k : c.ks) {
        log(std::string(to_string(method)) + "/" + std::string(hash_label(kind)) + " k=" + std::to_string(k));
        std::vector<QueryOutcome> out(queries.size());
        std::atomic<bool> missing_subtopics{false};
        parallel_for(queries.size(), workers, [&](std::size_t qi) {
          const auto& query = queries[qi];
          const std::string where = "method " + method_name + ", hash " + hash_name + ", query " + std::to_string(qi);
          with_context(where, [&] {
            if (!query.category) throw InvalidArgument("query has no category label");
            Stopwatch clock;
            SelectionResult picked;
            double fraction = 1.0;
            if (index) {
              QueryOptions qo;
              if (c.candidate_factor > 0) qo.max_candidates = c.candidate_factor * k;
              const auto cands = index->query(query.vector, qo);
              fraction = static_cast<double>(cands.union_size) / static_cast<double>(n);
              picked = run_selector(method, make_problem(*data, cands.ids, query.vector, k, c.lambda), c.rerank_pool);
            } else {
              picked = run_selector(method, make_problem(*data, everyone, query.vector, k, c.lambda), c.rerank_pool);
            }
            const double elapsed = clock.seconds();

            const int cat = *query.category;
            auto& o = out[qi];
            o.precision = precision_at_k(picked.ids, [&](PointId id) { return (*data)[id].category == cat; }, k);
            const auto m = data->subtopic_count(cat);
            if (m) {
              o.recall = subtopic_recall(picked.ids, *data, cat, k);
              o.diversity = *m >= 2 ? entropy_diversity(picked.ids, *data, cat) : 0.0;
            } else {
              missing_subtopics = true;
            }
            o.h = h_score(o.precision, o.diversity);
            o.seconds = elapsed;
            o.fraction = fraction;
            return 0;
          });
        });
        if (missing_subtopics) log("some query categories have no subtopic labels; SR and D count them as 0");

        ResultRow row;
        row.method = std::string(to_string(method));
        row.hash = std::string(hash_label(kind));
        row.k = k;
        row.queries = out.size();
        row.candidate_fraction = 0.0;
        for (const auto& o : out) {
          row.precision += o.precision;
          row.subtopic_recall += o.recall;
          row.diversity += o.diversity;
          row.h += o.h;
          row.seconds += o.seconds;
          row.candidate_fraction += o.fraction;
        }
        if (!out.empty()) {
          const double q = static_cast<double>(out.size());
          row.precision /= q;
          row.subtopic_recall /= q;
          row.diversity /= q;
          row.h /= q;
          row.seconds /= q;
          row.candidate_fraction /= q;
        } else {
          row.candidate_fraction = kind ? 0.0 : 1.0;
        }
        if (!c.record_timing) row.seconds = 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// Seeded Fisher-Yates over 0..n-1.
std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(counter_rng::bits(seed, 0x5b117, i) % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

struct LabelledSplit {
  Eigen::MatrixXd X;
  std::vector<std::vector<int>> truth;
};

LabelledSplit gather(const Dataset& data, std::span<const std::size_t> ids) {
  LabelledSplit s;
  s.X.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(data.dim()));
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto dense = data[ids[r]].vector.to_dense();
    for (std::size_t c = 0; c < dense.size(); ++c) s.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = dense[c];
    s.truth.push_back(data[ids[r]].labels);
  }
  return s;
}

std::span<const double> row_of(const Eigen::MatrixXd& X, Eigen::Index r, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index c = 0; c < X.cols(); ++c) buf[static_cast<std::size_t>(c)] = X(r, c);
  return buf;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Nn: return "nn";
    case Method::Rerank: return "rerank";
    case Method::Greedy: return "greedy";
    case Method::Mmr: return "mmr";
    case Method::QpRel: return "qprel";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "nn") return Method::Nn;
  if (name == "rerank") return Method::Rerank;
  if (name == "greedy") return Method::Greedy;
  if (name == "mmr") return Method::Mmr;
  if (name == "qprel") return Method::QpRel;
  throw InvalidArgument("unknown method: " + std::string(name));
}

std::optional<HashKind> parse_hash_choice(std::string_view name) {
  if (name == "nh") return std::nullopt;
  return parse_hash_kind(name);
}

std::string_view hash_label(std::optional<HashKind> kind) {
  if (!kind) return "nh";
  switch (*kind) {
    case HashKind::PlainRandom: return "lshdiv";
    case HashKind::PcaProjected: return "lshsdiv";
    case HashKind::PcaDirect: return "pcahash";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw InvalidArgument("config: method list is empty");
  if (hashes.empty()) throw InvalidArgument("config: hash list is empty");
  if (ks.empty()) throw InvalidArgument("config: k list is empty");
  for (const auto& m : methods) parse_method(m);
  for (const auto& h : hashes) parse_hash_choice(h);
  for (const auto k : ks) {
    if (k == 0) throw InvalidArgument("config: k must be >= 1");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("config: lambda must lie in [0, 1]");
  if (bits_per_table == 0 || bits_per_table > kMaxBitsPerTable) throw InvalidArgument("config: l must lie in [1, 64]");
  if (table_count == 0) throw InvalidArgument("config: L must be >= 1");
  if (!(rerank_pool >= 1.0)) throw InvalidArgument("config: rerank_pool must be >= 1");
  if (format != "dense" && format != "sparse") throw InvalidArgument("config: format must be dense or sparse");
  if (format == "sparse" && sparse_dim == 0) throw InvalidArgument("config: sparse format needs sparse_dim");
  if (!(ridge > 0.0)) throw InvalidArgument("config: ridge must be > 0");
  if (rank == 0) throw InvalidArgument("config: rank must be >= 1");
  if (predict_alpha == 0) throw InvalidArgument("config: predict_alpha must be >= 1");
}

ExperimentConfig parse_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "data") c.data_path = v.get<std::string>();
      else if (key == "queries") c.query_path = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "sparse_dim") c.sparse_dim = v.get<std::size_t>();
      else if (key == "normalize") c.normalize = v.get<bool>();
      else if (key == "methods") c.methods = v.get<std::vector<std::string>>();
      else if (key == "hashes") c.hashes = v.get<std::vector<std::string>>();
      else if (key == "k") c.ks = v.get<std::vector<std::size_t>>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "bits") c.bits_per_table = v.get<std::size_t>();
      else if (key == "tables") c.table_count = v.get<std::size_t>();
      else if (key == "alpha") c.projected_dim = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "rerank_pool") c.rerank_pool = v.get<double>();
      else if (key == "candidate_factor") c.candidate_factor = v.get<std::size_t>();
      else if (key == "allow_expensive") c.allow_expensive = v.get<bool>();
      else if (key == "qp_max_points") c.qp_max_points = v.get<std::size_t>();
      else if (key == "timing") c.record_timing = v.get<bool>();
      else if (key == "workers") c.workers = v.get<std::size_t>();
      else if (key == "model") c.model_path = v.get<std::string>();
      else if (key == "hierarchy") c.hierarchy_path = v.get<std::string>();
      else if (key == "rank") c.rank = v.get<std::size_t>();
      else if (key == "ridge") c.ridge = v.get<double>();
      else if (key == "labels") c.label_count = v.get<std::size_t>();
      else if (key == "predict_alpha") c.predict_alpha = v.get<std::size_t>();
      else if (key == "output") c.output = v.get<std::string>();
      else throw InvalidArgument("config: unknown key \"" + key + "\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested != 0) return requested;
  if (const char* env = std::getenv("DIVHASH_WORKERS")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ResultRow> run_retrieval_experiment(const ExperimentConfig& config, const LogFn& log) {
  config.validate();
  const LogFn sink = log ? log : default_log;
  auto data = std::make_shared<const Dataset>(load_data(config, config.data_path));
  const auto queries = load_data(config, config.query_path);
  return retrieval_impl(config, std::move(data), queries, sink);
}

std::vector<ResultRow> run_retrieval_experiment(const ExperimentConfig& config, const Dataset& data,
                                                const Dataset& queries, const LogFn& log) {
  config.validate();
  return retrieval_impl(config, std::make_shared<const Dataset>(data), queries, log ? log : default_log);
}

std::vector<MultilabelRow> run_multilabel_experiment(const ExperimentConfig& config, const LogFn& log) {
  config.validate();
  return run_multilabel_experiment(config, load_data(config, config.data_path), log);
}

std::vector<MultilabelRow> run_multilabel_experiment(const ExperimentConfig& c, const Dataset& data,
                                                     const LogFn& log_in) {
  c.validate();
  const LogFn log = log_in ? log_in : default_log;
  if (data.size() < 5) throw InvalidArgument("multilabel: need at least 5 labelled points");

  int max_label = -1;
  for (const auto& p : data) {
    for (const int l : p.labels) {
      if (l < 0) throw InvalidArgument("multilabel: negative label id");
      max_label = std::max(max_label, l);
    }
  }
  const std::size_t labels = c.label_count != 0 ? c.label_count : static_cast<std::size_t>(max_label + 1);
  if (labels == 0) throw InvalidArgument("multilabel: data carries no labels");
  if (max_label >= 0 && static_cast<std::size_t>(max_label) >= labels) {
    throw InvalidArgument("multilabel: label id " + std::to_string(max_label) + " exceeds label count");
  }

  const auto order = shuffled(data.size(), c.seed);
  const std::size_t n_train = data.size() * 4 / 5;
  const std::size_t n_fit = n_train * 3 / 4;
  const std::span<const std::size_t> all(order);
  const auto fit = gather(data, all.subspan(0, n_fit));
  const auto valid = gather(data, all.subspan(n_fit, n_train - n_fit));
  const auto test = gather(data, all.subspan(n_train));

  FactorModel model;
  if (!c.model_path.empty()) {
    model = load_factors(c.model_path);
    if (model.labels() != labels || model.dim() != data.dim()) {
      throw InvalidArgument("multilabel: factor model shape does not match the data");
    }
  } else {
    log("fitting rank-" + std::to_string(c.rank) + " ridge model on " + std::to_string(n_fit) + " points");
    Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(fit.X.rows(), static_cast<Eigen::Index>(labels), -1.0);
    for (std::size_t r = 0; r < fit.truth.size(); ++r) {
      for (const int l : fit.truth[r]) Y(static_cast<Eigen::Index>(r), l) = 1.0;
    }
    model = fit_lowrank_ridge(fit.X, Y, c.rank, c.ridge);
  }

  std::optional<HierarchyTree> tree;
  if (!c.hierarchy_path.empty()) {
    const auto edges = load_edges(c.hierarchy_path);
    auto pruned = bfs_prune(edges, infer_root(edges));
    for (const auto& w : pruned.warnings) log(w);
    tree = std::move(pruned.tree);
  }

  struct Predictor {
    std::string name;
    std::function<LabelPrediction(std::span<const double>)> predict;
  };
  std::vector<std::unique_ptr<LabelIndex>> indexes;
  std::vector<Predictor> predictors;
  predictors.push_back({"exact", [&](std::span<const double> x) { return predict_exact(model, x, c.predict_alpha); }});
  for (const auto& hash_name : c.hashes) {
    const auto kind = parse_hash_choice(hash_name);
    if (!kind) continue;
    LabelIndexParams lp;
    lp.kind = *kind;
    lp.bits_per_table = c.bits_per_table;
    lp.table_count = c.table_count;
    lp.projected_dim = c.projected_dim;
    lp.seed = c.seed;
    log("building " + std::string(hash_label(kind)) + " label index over " + std::to_string(labels) + " labels");
    indexes.push_back(std::make_unique<LabelIndex>(build_label_index(model, lp)));
    const LabelIndex* idx = indexes.back().get();
    DiverseOptions opt;
    opt.lambda = c.lambda;
    if (c.candidate_factor > 0) opt.max_candidates = c.candidate_factor * c.predict_alpha;
    predictors.push_back({std::string(hash_label(kind)), [&model, idx, opt, &c](std::span<const double> x) {
                            return predict_diverse(model, *idx, x, c.predict_alpha, opt);
                          }});
  }

  const std::size_t workers = resolve_workers(c.workers);
  std::vector<MultilabelRow> rows;
  for (const auto& pred : predictors) {
    std::vector<LabelPrediction> vpred(valid.truth.size());
    parallel_for(vpred.size(), workers, [&](std::size_t i) {
      std::vector<double> buf;
      vpred[i] = with_context("method " + pred.name + ", validation point " + std::to_string(i),
                              [&] { return pred.predict(row_of(valid.X, static_cast<Eigen::Index>(i), buf)); });
    });
    const auto cut = choose_cutoff(vpred, valid.truth, tree ? &*tree : nullptr);
    log(pred.name + ": cutoff " + std::to_string(cut.cutoff));

    struct Outcome {
      double p = 0, r = 0, f = 0, d = 0, h = 0, ms = 0, evals = 0;
    };
    std::vector<Outcome> out(test.truth.size());
    parallel_for(out.size(), workers, [&](std::size_t i) {
      std::vector<double> buf;
      const auto x = row_of(test.X, static_cast<Eigen::Index>(i), buf);
      with_context("method " + pred.name + ", test point " + std::to_string(i), [&] {
        Stopwatch clock;
        const auto prediction = pred.predict(x);
        const auto kept = threshold_select(prediction, ThresholdStrategy::ScoreCutoff, cut.cutoff);
        const double ms = clock.seconds() * 1e3;
        auto& o = out[i];
        o.p = set_precision(kept, test.truth[i]);
        o.r = set_recall(kept, test.truth[i]);
        o.f = f_score(o.p, o.r);
        if (tree) {
          o.d = tree_diversity(kept, *tree);
          o.h = h_score(o.p, o.d);
        }
        o.ms = ms;
        o.evals = static_cast<double>(prediction.eval_count);
        return 0;
      });
    });

    MultilabelRow row;
    row.method = pred.name;
    row.cutoff = cut.cutoff;
    row.queries = out.size();
    double d = 0, h = 0, evals = 0;
    for (const auto& o : out) {
      row.precision += o.p;
      row.recall += o.r;
      row.f += o.f;
      d += o.d;
      h += o.h;
      row.millis += o.ms;
      evals += o.evals;
    }
    const double q = std::max<double>(1.0, static_cast<double>(out.size()));
    row.precision /= q;
    row.recall /= q;
    row.f /= q;
    row.millis = c.record_timing ? row.millis / q : 0.0;
    row.eval_fraction = evals / q / static_cast<double>(labels);
    if (tree) {
      row.diversity = d / q;
      row.h = h / q;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace divhash
