#include <algorithm>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "divhash/error.hpp"
#include "divhash/experiment.hpp"
#include "divhash/toy.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace divhash;

namespace {

void quiet(std::string_view) {}

struct Toy {
  Dataset data;
  Dataset queries;
};

Toy small_toy() {
  return {make_toy(default_toy(100, 3)), make_toy(default_toy(5, 4))};
}

}  // namespace

TEST(Config, EmptyMethodsRejected) {
  ExperimentConfig c;
  c.methods.clear();
  EXPECT_THROW(c.validate(), InvalidArgument);
  const auto toy = small_toy();
  EXPECT_THROW(run_retrieval_experiment(c, toy.data, toy.queries, quiet), InvalidArgument);
}

TEST(Config, ParseKeys) {
  const auto c = parse_config(R"({"methods": ["greedy", "mmr"], "hashes": ["nh", "lshdiv"],
    "k": [5, 10], "lambda": 0.25, "bits": 12, "tables": 6, "seed": 9, "timing": false})");
  EXPECT_EQ(c.methods, (std::vector<std::string>{"greedy", "mmr"}));
  EXPECT_EQ(c.ks, (std::vector<std::size_t>{5, 10}));
  EXPECT_DOUBLE_EQ(c.lambda, 0.25);
  EXPECT_EQ(c.bits_per_table, 12u);
  EXPECT_EQ(c.table_count, 6u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_FALSE(c.record_timing);
  EXPECT_THROW(parse_config(R"({"methodz": ["nn"]})"), InvalidArgument);
  EXPECT_THROW(parse_method("bogus"), InvalidArgument);
}

TEST(Retrieval, NearestNeighbourPrecisionMatchesBruteForce) {
  const auto toy = small_toy();
  ExperimentConfig c;
  c.ks = {10};
  const auto rows = run_retrieval_experiment(c, toy.data, toy.queries, quiet);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, "nn");
  EXPECT_EQ(rows[0].hash, "nh");
  EXPECT_DOUBLE_EQ(rows[0].candidate_fraction, 1.0);

  double total = 0.0;
  for (const auto& q : toy.queries) {
    const auto qv = q.vector.to_dense();
    std::vector<std::pair<double, PointId>> d;
    for (const auto& p : toy.data) d.emplace_back(oracle::sqdist(p.vector.to_dense(), qv), p.id);
    std::sort(d.begin(), d.end());
    int hits = 0;
    for (std::size_t i = 0; i < 10; ++i) hits += toy.data[d[i].second].category == q.category ? 1 : 0;
    total += hits / 10.0;
  }
  EXPECT_NEAR(rows[0].precision, total / static_cast<double>(toy.queries.size()), 1e-12);
}

TEST(Retrieval, DeterministicAcrossRunsAndWorkers) {
  const auto toy = small_toy();
  ExperimentConfig c;
  c.methods = {"nn", "greedy", "mmr", "rerank"};
  c.hashes = {"nh", "lshdiv", "lshsdiv", "pcahash"};
  c.bits_per_table = 6;
  c.table_count = 4;
  c.record_timing = false;
  c.workers = 1;
  const auto a = to_csv(run_retrieval_experiment(c, toy.data, toy.queries, quiet));
  c.workers = 4;
  const auto b = to_csv(run_retrieval_experiment(c, toy.data, toy.queries, quiet));
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 17);
}

TEST(Retrieval, QpOnFullDataNeedsOptIn) {
  const auto toy = small_toy();
  ExperimentConfig c;
  c.methods = {"qprel"};
  std::vector<std::string> logs;
  const auto rows = run_retrieval_experiment(c, toy.data, toy.queries,
                                             [&](std::string_view m) { logs.emplace_back(m); });
  EXPECT_TRUE(rows.empty());
  EXPECT_TRUE(std::any_of(logs.begin(), logs.end(),
                          [](const std::string& m) { return m.find("skipping qprel") != std::string::npos; }));
}

TEST(Emit, HeaderOnlyForNoRows) {
  EXPECT_EQ(to_csv(std::vector<ResultRow>{}), "method,hash,k,P,SR,D,h,time\n");
}

TEST(Emit, SampleRowFormat) {
  ResultRow r;
  r.method = "nn";
  r.hash = "lshdiv";
  r.k = 10;
  r.precision = 0.97;
  r.subtopic_recall = 0.79;
  r.diversity = 0.76;
  r.h = 0.84;
  r.seconds = 0.112;
  EXPECT_EQ(format_row(r), "nn,lshdiv,10,0.970,0.790,0.760,0.840,0.112");
}

TEST(Emit, JsonRoundTripReproducesCsv) {
  const auto toy = small_toy();
  ExperimentConfig c;
  c.methods = {"nn", "greedy"};
  c.hashes = {"nh", "lshsdiv"};
  c.bits_per_table = 6;
  c.table_count = 4;
  const auto rows = run_retrieval_experiment(c, toy.data, toy.queries, quiet);
  EXPECT_EQ(to_csv(rows_from_json(to_json(rows))), to_csv(rows));
}

TEST(Emit, WriteToMissingDirectoryFails) {
  EXPECT_THROW(write_text("/nonexistent-dir/x/y.csv", "a"), IoError);
}

TEST(Multilabel, NoHierarchyGivesNa) {
  // Labels determined by the sign of a few coordinates.
  std::vector<DataPoint> pts;
  const auto xs = fixtures::random_units(300, 8, 5);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    DataPoint p;
    p.id = static_cast<PointId>(i);
    p.vector = FeatureVector::dense(xs[i]);
    for (int l = 0; l < 8; ++l) {
      if (xs[i][static_cast<std::size_t>(l)] > 0.2) p.labels.push_back(l);
    }
    pts.push_back(std::move(p));
  }
  const Dataset data(8, std::move(pts));
  ExperimentConfig c;
  c.hashes = {"nh", "lshdiv"};
  c.rank = 4;
  c.predict_alpha = 3;
  c.bits_per_table = 4;
  c.table_count = 4;
  c.record_timing = false;
  const auto rows = run_multilabel_experiment(c, data, quiet);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "exact");
  for (const auto& r : rows) {
    EXPECT_FALSE(r.diversity.has_value());
    EXPECT_FALSE(r.h.has_value());
    EXPECT_GT(r.precision, 0.0);
  }
  const auto csv = to_csv(rows);
  EXPECT_NE(csv.find(",NA,NA,"), std::string::npos);
  EXPECT_NE(to_json(rows).find("null"), std::string::npos);
}
