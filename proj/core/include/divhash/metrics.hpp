#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "divhash/dataset.hpp"

namespace divhash {

struct QueryEval {
  double precision = 0.0;
  double subtopic_recall = 0.0;
  double diversity = 0.0;
  double h_score = 0.0;
  double elapsed = 0.0;  ///< seconds
};

/// Share of the top k that is relevant. The denominator is always k, so a
/// short list counts its missing slots as misses.
double precision_at_k(std::span<const PointId> retrieved, const std::function<bool(PointId)>& relevant,
                      std::size_t k);

/// Distinct subtopics of `category` among the relevant (same-category) items
/// of the top k, divided by the category's subtopic count m.
double subtopic_recall(std::span<const PointId> retrieved, const Dataset& data, int category, std::size_t k);

/// Normalized entropy −Σ sᵢ ln sᵢ / ln m of the given per-bucket counts.
/// Zero counts contribute nothing. Throws InvalidArgument when m < 2.
double normalized_entropy(std::span<const std::size_t> counts, std::size_t m);

/// Normalized entropy of the subtopic mix among retrieved items of
/// `category`. Returns 0 when no such item carries a subtopic.
double entropy_diversity(std::span<const PointId> retrieved, const Dataset& data, int category);

/// Mean Euclidean distance over unordered pairs; 0 for fewer than two points.
double pairwise_diversity(std::span<const PointId> retrieved, const Dataset& data);

/// 2ad / (a + d), and 0 when a + d = 0.
double h_score(double accuracy, double diversity);
double f_score(double precision, double recall);

/// Rooted tree over integer category ids.
struct HierarchyTree {
  int root = 0;
  std::vector<int> nodes;       ///< ascending, root included
  std::map<int, int> parent;    ///< every node but the root
  std::map<int, int> depth;     ///< root has depth 0

  bool contains(int node) const { return depth.contains(node); }
  /// The depth-1 ancestor of a non-root node (the node itself at depth 1).
  int top_level_ancestor(int node) const;
  /// Children of the root, ascending.
  std::vector<int> top_level() const;
};

struct PruneResult {
  HierarchyTree tree;
  std::vector<std::string> warnings;
};

/// Keeps, for every node reachable from `root`, the parent through which a
/// level-by-level BFS first reaches it (frontiers visited in ascending id,
/// so ties go to the smaller parent). Unreachable nodes are dropped with a
/// warning. Edges are (child, parent).
PruneResult bfs_prune(std::span<const std::pair<int, int>> edges, int root);

/// Reads "child parent" lines; blank lines and '#' comments are skipped.
std::vector<std::pair<int, int>> parse_edges(std::string_view text);
std::vector<std::pair<int, int>> load_edges(const std::filesystem::path& path);
/// The unique node never listed as a child. Throws InvalidArgument otherwise.
int infer_root(std::span<const std::pair<int, int>> edges);

/// Normalized entropy of the labels' top-level categories, normalized by the
/// number of top-level categories. Throws InvalidArgument for a label not in
/// the tree or equal to its root; returns 0 when the tree has fewer than two
/// top-level categories or no labels are given.
double tree_diversity(std::span<const int> labels, const HierarchyTree& tree);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  void restart() { start_ = std::chrono::steady_clock::now(); }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace divhash
