#include "divhash/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "divhash/error.hpp"

namespace divhash {

double precision_at_k(std::span<const PointId> retrieved, const std::function<bool(PointId)>& relevant,
                      std::size_t k) {
  if (k == 0) throw InvalidArgument("precision_at_k: k must be >= 1");
  const std::size_t top = std::min(k, retrieved.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += relevant(retrieved[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double subtopic_recall(std::span<const PointId> retrieved, const Dataset& data, int category, std::size_t k) {
  const auto m = data.subtopic_count(category);
  if (!m) throw InvalidArgument("subtopic_recall: unknown category " + std::to_string(category));
  if (*m < 1) throw InvalidArgument("subtopic_recall: category has no subtopics");
  std::set<int> covered;
  const std::size_t top = std::min(k, retrieved.size());
  for (std::size_t i = 0; i < top; ++i) {
    const auto& p = data[retrieved[i]];
    if (p.category == category && p.subtopic) covered.insert(*p.subtopic);
  }
  return static_cast<double>(covered.size()) / static_cast<double>(*m);
}

double normalized_entropy(std::span<const std::size_t> counts, std::size_t m) {
  if (m < 2) throw InvalidArgument("entropy needs at least two buckets");
  double total = 0.0;
  for (const auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double s = static_cast<double>(c) / total;
    h -= s * std::log(s);
  }
  // Rounding can leave a uniform split a hair above 1.
  return std::clamp(h / std::log(static_cast<double>(m)), 0.0, 1.0);
}

double entropy_diversity(std::span<const PointId> retrieved, const Dataset& data, int category) {
  const auto m = data.subtopic_count(category);
  if (!m) throw InvalidArgument("entropy_diversity: unknown category " + std::to_string(category));
  std::map<int, std::size_t> counts;
  for (const auto id : retrieved) {
    const auto& p = data[id];
    if (p.category == category && p.subtopic) ++counts[*p.subtopic];
  }
  std::vector<std::size_t> flat;
  for (const auto& [s, c] : counts) flat.push_back(c);
  return normalized_entropy(flat, static_cast<std::size_t>(*m));
}

double pairwise_diversity(std::span<const PointId> retrieved, const Dataset& data) {
  if (retrieved.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < retrieved.size(); ++i) {
    for (std::size_t j = i + 1; j < retrieved.size(); ++j) {
      sum += std::sqrt(squared_distance(data[retrieved[i]].vector, data[retrieved[j]].vector));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double h_score(double accuracy, double diversity) {
  // Reciprocal form: exact when both inputs are equal.
  if (accuracy <= 0.0 || diversity <= 0.0) return 0.0;
  return 2.0 / (1.0 / accuracy + 1.0 / diversity);
}

double f_score(double precision, double recall) { return h_score(precision, recall); }

int HierarchyTree::top_level_ancestor(int node) const {
  if (!contains(node)) throw InvalidArgument("label " + std::to_string(node) + " is not in the hierarchy");
  if (node == root) throw InvalidArgument("label " + std::to_string(node) + " is the hierarchy root");
  while (depth.at(node) > 1) node = parent.at(node);
  return node;
}

std::vector<int> HierarchyTree::top_level() const {
  std::vector<int> out;
  for (const auto& [node, d] : depth) {
    if (d == 1) out.push_back(node);
  }
  return out;
}

PruneResult bfs_prune(std::span<const std::pair<int, int>> edges, int root) {
  std::map<int, std::vector<int>> children;
  std::set<int> all{root};
  for (const auto& [child, par] : edges) {
    all.insert(child);
    all.insert(par);
    if (child != par) children[par].push_back(child);
  }
  for (auto& [p, c] : children) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  PruneResult out;
  auto& tree = out.tree;
  tree.root = root;
  tree.depth[root] = 0;
  std::vector<int> frontier{root};
  for (int level = 1; !frontier.empty(); ++level) {
    std::vector<int> next;
    for (const int u : frontier) {
      const auto it = children.find(u);
      if (it == children.end()) continue;
      for (const int c : it->second) {
        if (tree.depth.contains(c)) continue;
        tree.depth[c] = level;
        tree.parent[c] = u;
        next.push_back(c);
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  for (const int node : all) {
    if (tree.contains(node)) {
      tree.nodes.push_back(node);
    } else {
      out.warnings.push_back("node " + std::to_string(node) + " is unreachable from root " + std::to_string(root));
    }
  }
  return out;
}

std::vector<std::pair<int, int>> parse_edges(std::string_view text) {
  std::vector<std::pair<int, int>> edges;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long child = 0, parent = 0;
    std::string rest;
    if (!(fields >> child >> parent) || (fields >> rest)) {
      throw ParseError(lineno, "expected \"child parent\"");
    }
    edges.emplace_back(static_cast<int>(child), static_cast<int>(parent));
  }
  return edges;
}

std::vector<std::pair<int, int>> load_edges(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_edges(buf.str());
}

int infer_root(std::span<const std::pair<int, int>> edges) {
  std::set<int> children, parents;
  for (const auto& [c, p] : edges) {
    children.insert(c);
    parents.insert(p);
  }
  std::vector<int> roots;
  for (const int p : parents) {
    if (!children.contains(p)) roots.push_back(p);
  }
  if (roots.size() != 1) {
    throw InvalidArgument("hierarchy must have exactly one root, found " + std::to_string(roots.size()));
  }
  return roots.front();
}

double tree_diversity(std::span<const int> labels, const HierarchyTree& tree) {
  const auto tops = tree.top_level();
  std::map<int, std::size_t> counts;
  for (const int label : labels) ++counts[tree.top_level_ancestor(label)];
  if (tops.size() < 2 || labels.empty()) return 0.0;
  std::vector<std::size_t> flat;
  for (const auto& [t, c] : counts) flat.push_back(c);
  return normalized_entropy(flat, tops.size());
}

}  // namespace divhash
