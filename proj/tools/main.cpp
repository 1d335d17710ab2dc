// divhash: build LSH indexes and run diverse-retrieval experiments.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "divhash/error.hpp"
#include "divhash/experiment.hpp"
#include "divhash/index.hpp"
#include "divhash/random.hpp"
#include "divhash/toy.hpp"

namespace {

using namespace divhash;

struct DataArgs {
  std::string path;
  std::string format = "dense";
  std::size_t dim = 0;
  bool raw = false;

  void add(CLI::App* app, const std::string& flag, const std::string& what) {
    app->add_option(flag, path, what)->required()->check(CLI::ExistingFile);
    app->add_option("--format", format, "dense or sparse")->check(CLI::IsMember({"dense", "sparse"}));
    app->add_option("--dim", dim, "dimension of sparse input");
    app->add_flag("--no-normalize", raw, "keep vectors at their original norm");
  }
  Dataset load(const std::string& file) const {
    if (format == "sparse") {
      if (dim == 0) throw InvalidArgument("--dim is required for sparse input");
      return load_sparse(file, dim, !raw);
    }
    return load_dense(file, !raw);
  }
};

std::filesystem::path json_twin(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

// Flags that override a loaded config only when given on the command line.
struct ExperimentArgs {
  std::string config;
  ExperimentConfig c;
  std::string methods, hashes, ks;
  bool no_timing = false;
  std::vector<CLI::Option*> opts;
  CLI::App* app = nullptr;

  void add(CLI::App* a, bool multilabel) {
    app = a;
    a->add_option("--config", config, "JSON file with experiment settings")->check(CLI::ExistingFile);
    a->add_option("--data", c.data_path, "dataset file");
    if (!multilabel) a->add_option("--queries", c.query_path, "query file (labelled like the dataset)");
    a->add_option("--format", c.format, "dense or sparse");
    a->add_option("--dim", c.sparse_dim, "dimension of sparse input");
    if (!multilabel) a->add_option("--methods", methods, "comma list of nn,rerank,greedy,mmr,qprel");
    a->add_option("--hashes", hashes, "comma list of nh,lshdiv,lshsdiv,pcahash");
    if (!multilabel) a->add_option("--k", ks, "comma list of result sizes");
    a->add_option("--lambda", c.lambda, "relevance weight in [0, 1]");
    a->add_option("--bits", c.bits_per_table, "bits per table (l)");
    a->add_option("--tables", c.table_count, "number of tables (L)");
    a->add_option("--alpha", c.projected_dim, "principal components for PCA hashes");
    a->add_option("--seed", c.seed, "random seed");
    a->add_option("--candidate-factor", c.candidate_factor, "keep factor*k closest candidates; 0 keeps all");
    if (!multilabel) {
      a->add_option("--rerank-pool", c.rerank_pool, "rerank pool size as a multiple of k");
      a->add_flag("--allow-expensive", c.allow_expensive, "allow qprel without hashing");
      a->add_option("--qp-cap", c.qp_max_points, "largest dataset for qprel without hashing");
    } else {
      a->add_option("--model", c.model_path, "factor model file; fitted from the data when absent");
      a->add_option("--hierarchy", c.hierarchy_path, "label hierarchy as 'child parent' lines");
      a->add_option("--rank", c.rank, "rank of the fitted model");
      a->add_option("--ridge", c.ridge, "ridge penalty of the fitted model");
      a->add_option("--labels", c.label_count, "number of labels (default: largest id + 1)");
      a->add_option("--predict-alpha", c.predict_alpha, "labels retrieved per point before thresholding");
    }
    a->add_flag("--no-timing", no_timing, "write 0 in time columns");
    a->add_option("--workers", c.workers, "worker threads (default: DIVHASH_WORKERS or all cores)");
    a->add_option("--out", c.output, "CSV output; a .json twin is written next to it");
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  ExperimentConfig resolve() const {
    ExperimentConfig out = config.empty() ? ExperimentConfig{} : load_config(config);
    const auto given = [&](const char* name) {
      const auto* opt = app->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--data")) out.data_path = c.data_path;
    if (given("--queries")) out.query_path = c.query_path;
    if (given("--format")) out.format = c.format;
    if (given("--dim")) out.sparse_dim = c.sparse_dim;
    if (given("--methods")) out.methods = split(methods);
    if (given("--hashes")) out.hashes = split(hashes);
    if (given("--k")) {
      out.ks.clear();
      for (const auto& k : split(ks)) out.ks.push_back(std::stoul(k));
    }
    if (given("--lambda")) out.lambda = c.lambda;
    if (given("--bits")) out.bits_per_table = c.bits_per_table;
    if (given("--tables")) out.table_count = c.table_count;
    if (given("--alpha")) out.projected_dim = c.projected_dim;
    if (given("--seed")) out.seed = c.seed;
    if (given("--candidate-factor")) out.candidate_factor = c.candidate_factor;
    if (given("--rerank-pool")) out.rerank_pool = c.rerank_pool;
    if (given("--allow-expensive")) out.allow_expensive = true;
    if (given("--qp-cap")) out.qp_max_points = c.qp_max_points;
    if (given("--model")) out.model_path = c.model_path;
    if (given("--hierarchy")) out.hierarchy_path = c.hierarchy_path;
    if (given("--rank")) out.rank = c.rank;
    if (given("--ridge")) out.ridge = c.ridge;
    if (given("--labels")) out.label_count = c.label_count;
    if (given("--predict-alpha")) out.predict_alpha = c.predict_alpha;
    if (no_timing) out.record_timing = false;
    if (given("--workers")) out.workers = c.workers;
    if (given("--out")) out.output = c.output;
    if (out.data_path.empty()) throw InvalidArgument("no dataset given (--data or config \"data\")");
    if (out.output.empty()) throw InvalidArgument("no output given (--out or config \"output\")");
    return out;
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diverse nearest-neighbor retrieval with locality-sensitive hashing"};
  app.require_subcommand(1);

  // index build / index query
  auto* index_cmd = app.add_subcommand("index", "build or query a hash index");
  index_cmd->require_subcommand(1);

  auto* build_cmd = index_cmd->add_subcommand("build", "hash a dataset into L tables");
  DataArgs build_data;
  std::string build_hash = "lshdiv", build_out;
  FamilyParams fp;
  build_data.add(build_cmd, "--data", "dataset file");
  build_cmd->add_option("--hash", build_hash, "lshdiv, lshsdiv or pcahash");
  build_cmd->add_option("--bits", fp.bits_per_table, "bits per table (l)");
  build_cmd->add_option("--tables", fp.table_count, "number of tables (L)");
  build_cmd->add_option("--alpha", fp.projected_dim, "principal components for PCA hashes");
  build_cmd->add_option("--seed", fp.seed, "random seed");
  build_cmd->add_option("--out", build_out, "index file")->required();

  auto* query_cmd = index_cmd->add_subcommand("query", "list candidates for each query");
  DataArgs query_data;
  std::string index_path, queries_path, query_out;
  std::size_t max_candidates = 0;
  double radius = 0.0;
  query_data.add(query_cmd, "--data", "dataset the index was built over");
  query_cmd->add_option("--index", index_path, "index file")->required()->check(CLI::ExistingFile);
  query_cmd->add_option("--queries", queries_path, "query file")->required()->check(CLI::ExistingFile);
  query_cmd->add_option("--max-candidates", max_candidates, "keep the closest candidates only");
  query_cmd->add_option("--radius", radius, "drop candidates farther than this");
  query_cmd->add_option("--out", query_out, "output file, '-' for standard output")->required();

  auto* retrieve_cmd = app.add_subcommand("retrieve", "run a retrieval experiment grid");
  ExperimentArgs retrieve_args;
  retrieve_args.add(retrieve_cmd, false);

  auto* ml_cmd = app.add_subcommand("multilabel", "run a multi-label prediction experiment");
  ExperimentArgs ml_args;
  ml_args.add(ml_cmd, true);

  auto* toy_cmd = app.add_subcommand("toy-gen", "write the two-class synthetic dataset and queries");
  std::size_t toy_n = 500, toy_q = 25;
  std::uint64_t toy_seed = 1;
  double toy_spread = 0.35;
  int toy_subtopics = 4;
  std::string toy_out, toy_queries_out;
  toy_cmd->add_option("--n-per-class", toy_n, "points per class");
  toy_cmd->add_option("--queries-per-class", toy_q, "held-out queries per class");
  toy_cmd->add_option("--spread", toy_spread, "standard deviation around each center");
  toy_cmd->add_option("--subtopics", toy_subtopics, "angular sectors per class");
  toy_cmd->add_option("--seed", toy_seed, "random seed");
  toy_cmd->add_option("--out", toy_out, "dataset file")->required();
  toy_cmd->add_option("--queries-out", toy_queries_out, "query file");

  auto* tune_cmd = app.add_subcommand("tune", "search (l, L) for a recall target");
  DataArgs tune_data;
  TuneOptions topt;
  std::string tune_hash = "lshdiv", tune_out = "-";
  double target = 0.9, epsilon = 0.0;
  tune_data.add(tune_cmd, "--data", "dataset file");
  tune_cmd->add_option("--hash", tune_hash, "lshdiv, lshsdiv or pcahash");
  tune_cmd->add_option("--alpha", topt.projected_dim, "principal components for PCA hashes");
  tune_cmd->add_option("--target-recall", target, "required recall@10 in (0, 1)");
  tune_cmd->add_option("--epsilon", epsilon, "count neighbors within (1 + epsilon) of the 10th distance");
  tune_cmd->add_option("--seed", topt.seed, "random seed");
  tune_cmd->add_option("--sample", topt.sample_queries, "held-out query sample size");
  tune_cmd->add_option("--max-tables", topt.max_tables, "largest L to try");
  tune_cmd->add_option("--out", tune_out, "result file, '-' for standard output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) {
      auto data = std::make_shared<const Dataset>(build_data.load(build_data.path));
      fp.kind = parse_hash_kind(build_hash);
      fp.dim = data->dim();
      if (fp.kind != HashKind::PlainRandom && fp.projected_dim == 0) {
        fp.projected_dim = std::min<std::size_t>({200, data->dim(), data->size()});
      }
      std::cerr << "divhash: hashing " << data->size() << " points into " << fp.table_count << " tables\n";
      const auto index = build(data, new_family(fp, data.get()));
      save_index(index, build_out);
    } else if (*query_cmd) {
      auto data = std::make_shared<const Dataset>(query_data.load(query_data.path));
      const auto queries = query_data.load(queries_path);
      const auto index = load_index(index_path, data);
      QueryOptions qo;
      if (max_candidates > 0) qo.max_candidates = max_candidates;
      if (radius > 0.0) qo.radius = radius;
      std::string text;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto cands = index.query(queries[i].vector, qo);
        text += std::to_string(i) + ":";
        for (std::size_t j = 0; j < cands.ids.size(); ++j) {
          text += (j == 0 ? " " : ",") + std::to_string(cands.ids[j]);
        }
        text += '\n';
      }
      write_output(query_out, text);
    } else if (*retrieve_cmd) {
      const auto config = retrieve_args.resolve();
      if (config.query_path.empty()) throw InvalidArgument("no query file given (--queries or config \"queries\")");
      const auto rows = run_retrieval_experiment(config);
      write_text(config.output, to_csv(rows));
      write_text(json_twin(config.output), to_json(rows));
    } else if (*ml_cmd) {
      const auto config = ml_args.resolve();
      const auto rows = run_multilabel_experiment(config);
      write_text(config.output, to_csv(rows));
      write_text(json_twin(config.output), to_json(rows));
    } else if (*toy_cmd) {
      auto tc = default_toy(toy_n, toy_seed);
      tc.spread = toy_spread;
      tc.subtopics_per_class = toy_subtopics;
      save_dense(make_toy(tc), toy_out);
      if (!toy_queries_out.empty()) {
        tc.n_per_class = toy_q;
        tc.seed = counter_rng::mix64(toy_seed + 1);
        save_dense(make_toy(tc), toy_queries_out);
      }
    } else if (*tune_cmd) {
      const auto data = tune_data.load(tune_data.path);
      topt.kind = parse_hash_kind(tune_hash);
      if (topt.kind != HashKind::PlainRandom && topt.projected_dim == 0) {
        topt.projected_dim = std::min<std::size_t>({200, data.dim(), data.size()});
      }
      const auto r = tune(data, target, epsilon, topt);
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "{\"bits\": %zu, \"tables\": %zu, \"feasible\": %s, \"recall\": %.6f, \"mean_touched\": %.3f, "
                    "\"mean_candidates\": %.3f}\n",
                    r.bits_per_table, r.table_count, r.feasible ? "true" : "false", r.recall, r.mean_touched,
                    r.mean_candidates);
      if (!r.feasible) std::cerr << "divhash: no (l, L) reached the recall target; reporting the best found\n";
      write_output(tune_out, buf);
    }
  } catch (const std::exception& e) {
    std::cerr << "divhash: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
