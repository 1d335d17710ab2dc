#include <cmath>

#include <gtest/gtest.h>

#include "divhash/error.hpp"
#include "divhash/metrics.hpp"

using namespace divhash;

namespace {

// Category 0 with subtopics given per point; vectors are irrelevant here.
Dataset labelled(const std::vector<std::pair<int, int>>& cat_sub, int m) {
  std::vector<DataPoint> pts;
  for (std::size_t i = 0; i < cat_sub.size(); ++i) {
    DataPoint p;
    p.id = static_cast<PointId>(i);
    p.vector = FeatureVector::dense({1.0});
    p.category = cat_sub[i].first;
    p.subtopic = cat_sub[i].second;
    pts.push_back(std::move(p));
  }
  Dataset d(1, std::move(pts));
  d.set_subtopic_count(0, m);
  return d;
}

std::vector<PointId> iota_ids(std::size_t n) {
  std::vector<PointId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<PointId>(i);
  return v;
}

}  // namespace

TEST(PrecisionAtK, Examples) {
  const auto ids = iota_ids(10);
  EXPECT_DOUBLE_EQ(precision_at_k(ids, [](PointId) { return true; }, 10), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_k(ids, [](PointId) { return false; }, 10), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_k(ids, [](PointId id) { return id < 7; }, 10), 0.7);
  // Underfilled lists count missing slots as misses.
  EXPECT_DOUBLE_EQ(precision_at_k(iota_ids(3), [](PointId) { return true; }, 10), 0.3);
  EXPECT_THROW(precision_at_k(ids, [](PointId) { return true; }, 0), InvalidArgument);
}

TEST(SubtopicRecall, Examples) {
  const auto all = labelled({{0, 0}, {0, 1}, {0, 2}}, 3);
  EXPECT_DOUBLE_EQ(subtopic_recall(iota_ids(3), all, 0, 3), 1.0);
  const auto one = labelled({{0, 2}, {0, 2}, {0, 2}, {0, 2}}, 4);
  EXPECT_DOUBLE_EQ(subtopic_recall(iota_ids(4), one, 0, 4), 0.25);
  const auto two = labelled({{0, 1}, {0, 3}, {1, 0}, {0, 1}}, 5);
  EXPECT_DOUBLE_EQ(subtopic_recall(iota_ids(4), two, 0, 4), 0.4);
  EXPECT_THROW(subtopic_recall(iota_ids(4), two, 7, 4), InvalidArgument);
}

TEST(EntropyDiversity, Examples) {
  const auto one = labelled({{0, 1}, {0, 1}, {0, 1}}, 4);
  EXPECT_DOUBLE_EQ(entropy_diversity(iota_ids(3), one, 0), 0.0);
  const auto uniform = labelled({{0, 0}, {0, 1}, {0, 2}, {0, 3}}, 4);
  EXPECT_DOUBLE_EQ(entropy_diversity(iota_ids(4), uniform, 0), 1.0);
  const auto halves = labelled({{0, 0}, {0, 2}, {0, 0}, {0, 2}}, 4);
  EXPECT_DOUBLE_EQ(entropy_diversity(iota_ids(4), halves, 0), std::log(2.0) / std::log(4.0));
  EXPECT_DOUBLE_EQ(entropy_diversity(iota_ids(4), halves, 0), 0.5);
}

TEST(EntropyDiversity, PermutationInvariantAndErrors) {
  const auto d = labelled({{0, 0}, {0, 1}, {0, 1}, {0, 2}, {0, 0}}, 3);
  const std::vector<PointId> a{0, 1, 2, 3, 4}, b{4, 2, 0, 3, 1};
  EXPECT_DOUBLE_EQ(entropy_diversity(a, d, 0), entropy_diversity(b, d, 0));
  const auto single = labelled({{0, 0}}, 1);
  EXPECT_THROW(entropy_diversity(iota_ids(1), single, 0), InvalidArgument);
}

TEST(HScore, Examples) {
  EXPECT_DOUBLE_EQ(h_score(0.4, 0.4), 0.4);
  EXPECT_DOUBLE_EQ(h_score(1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(h_score(0.0, 0.0), 0.0);
  EXPECT_NEAR(h_score(0.93, 0.86), 0.894, 5e-4);
  EXPECT_EQ(std::round(h_score(0.93, 0.86) * 100) / 100, 0.89);
  EXPECT_DOUBLE_EQ(h_score(0.3, 0.8), h_score(0.8, 0.3));
}

TEST(FScore, Examples) {
  EXPECT_DOUBLE_EQ(f_score(0.6, 0.6), 0.6);
  EXPECT_DOUBLE_EQ(f_score(1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(f_score(0.5, 0.25), 1.0 / 3.0);
}

TEST(BfsPrune, TreeUnchanged) {
  const std::vector<std::pair<int, int>> edges{{1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 2}};
  const auto r = bfs_prune(edges, 0);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.tree.nodes, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  for (const auto& [c, p] : edges) EXPECT_EQ(r.tree.parent.at(c), p);
  EXPECT_EQ(r.tree.parent.size(), r.tree.nodes.size() - 1);
  EXPECT_EQ(r.tree.depth.at(5), 2);
}

TEST(BfsPrune, DiamondKeepsFirstParent) {
  // 0 → {1, 2} → 3. BFS reaches 1 before 2, so 3 keeps parent 1.
  const std::vector<std::pair<int, int>> edges{{1, 0}, {2, 0}, {3, 2}, {3, 1}};
  const auto r = bfs_prune(edges, 0);
  EXPECT_EQ(r.tree.parent.at(3), 1);
  EXPECT_EQ(r.tree.depth.at(3), 2);
  EXPECT_EQ(r.tree.parent.size(), 3u);
}

TEST(BfsPrune, ShallowerParentWinsOverSmallerId) {
  // 5 is reachable at depth 2 via 4 (depth 1) and at depth 3 via 1.
  const std::vector<std::pair<int, int>> edges{{4, 0}, {2, 0}, {1, 2}, {5, 1}, {5, 4}};
  const auto r = bfs_prune(edges, 0);
  EXPECT_EQ(r.tree.parent.at(5), 4);
}

TEST(BfsPrune, UnreachableCycleDropped) {
  const std::vector<std::pair<int, int>> edges{{1, 0}, {7, 8}, {8, 9}, {9, 7}};
  const auto r = bfs_prune(edges, 0);
  EXPECT_EQ(r.tree.nodes, (std::vector<int>{0, 1}));
  EXPECT_EQ(r.warnings.size(), 3u);
}

TEST(Hierarchy, ParseAndRoot) {
  const auto edges = parse_edges("# child parent\n1 0\n2 0\r\n\n3 1\n");
  EXPECT_EQ(edges.size(), 3u);
  EXPECT_EQ(infer_root(edges), 0);
  EXPECT_THROW(parse_edges("1 0\n2\n"), ParseError);
  EXPECT_THROW(infer_root(parse_edges("1 0\n3 2\n")), InvalidArgument);
}

TEST(TreeDiversity, Examples) {
  // Root 0; top-level 1..4; leaves below each.
  const std::vector<std::pair<int, int>> edges{{1, 0},  {2, 0},  {3, 0},  {4, 0},  {11, 1},
                                               {12, 1}, {21, 2}, {22, 2}, {31, 3}, {41, 4}};
  const auto tree = bfs_prune(edges, 0).tree;
  const std::vector<int> one_top{11, 12, 1};
  EXPECT_DOUBLE_EQ(tree_diversity(one_top, tree), 0.0);
  const std::vector<int> uniform{11, 21, 31, 41};
  EXPECT_DOUBLE_EQ(tree_diversity(uniform, tree), 1.0);
  const std::vector<int> split{11, 12, 21, 22};
  EXPECT_DOUBLE_EQ(tree_diversity(split, tree), std::log(2.0) / std::log(4.0));
  const std::vector<int> absent{99};
  EXPECT_THROW(tree_diversity(absent, tree), InvalidArgument);
}

TEST(PairwiseDiversity, MeanOverUnorderedPairs) {
  std::vector<DataPoint> pts(3);
  const std::vector<std::vector<double>> xs{{0, 0}, {3, 4}, {0, 4}};
  for (std::size_t i = 0; i < 3; ++i) {
    pts[i].id = static_cast<PointId>(i);
    pts[i].vector = FeatureVector::dense(xs[i]);
  }
  const Dataset d(2, std::move(pts));
  EXPECT_DOUBLE_EQ(pairwise_diversity(iota_ids(3), d), (5.0 + 4.0 + 3.0) / 3.0);
  EXPECT_DOUBLE_EQ(pairwise_diversity(iota_ids(1), d), 0.0);
}
