#include "divhash/index.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "divhash/error.hpp"
#include "divhash/random.hpp"

namespace divhash {
namespace {

constexpr std::string_view kIndexMagic = "DVHIDX01";

struct Scored {
  double dist;
  PointId id;
  bool operator<(const Scored& o) const { return dist < o.dist || (dist == o.dist && id < o.id); }
};

std::vector<LshIndex::Table> hash_into_tables(const Dataset& data, const HashFamily& family) {
  if (data.dim() != family.dim()) {
    throw InvalidArgument("build: dataset dimension " + std::to_string(data.dim()) +
                          " != family dimension " + std::to_string(family.dim()));
  }
  std::vector<LshIndex::Table> tables(family.table_count());
  std::vector<HashKey> keys(family.table_count());
  for (const auto& p : data) {
    family.hash_all(p.vector, keys);
    for (std::size_t t = 0; t < keys.size(); ++t) tables[t][keys[t]].push_back(p.id);
  }
  return tables;
}

// Deduplicates bucket contents into ascending order. Small unions are sorted;
// larger ones go through a bitmap over the id range, which avoids the sort.
void dedup_ascending(std::vector<PointId>& ids, std::size_t id_range) {
  const std::size_t words = (id_range + 63) / 64;
  if (ids.size() * 8 < words) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return;
  }
  std::vector<std::uint64_t> seen(words, 0);
  for (const PointId id : ids) seen[id >> 6] |= std::uint64_t{1} << (id & 63);
  ids.clear();
  for (std::size_t w = 0; w < words; ++w) {
    for (std::uint64_t bits = seen[w]; bits != 0; bits &= bits - 1) {
      ids.push_back(static_cast<PointId>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
    }
  }
}

}  // namespace

LshIndex::LshIndex(std::shared_ptr<const Dataset> data, HashFamily family, std::vector<Table> tables)
    : data_(std::move(data)), family_(std::move(family)), tables_(std::move(tables)) {
  if (!data_) throw InvalidArgument("index needs a dataset");
  if (tables_.size() != family_.table_count()) throw InvalidArgument("index: table count mismatch");
}

CandidateSet LshIndex::query(const FeatureVector& q, const QueryOptions& options) const {
  const std::size_t probe = std::min(options.tables.value_or(tables_.size()), tables_.size());
  CandidateSet out;
  out.probed_tables = probe;
  const auto keys = family_.hash_all(q);
  for (std::size_t t = 0; t < probe; ++t) {
    const auto it = tables_[t].find(keys[t]);
    if (it == tables_[t].end()) continue;
    out.touched += it->second.size();
    out.ids.insert(out.ids.end(), it->second.begin(), it->second.end());
  }
  dedup_ascending(out.ids, data_->size());
  out.union_size = out.ids.size();

  const bool truncate = options.max_candidates && out.ids.size() > *options.max_candidates;
  if (!options.radius && !truncate) return out;

  std::vector<Scored> scored;
  scored.reserve(out.ids.size());
  const double r2 = options.radius ? *options.radius * *options.radius : 0.0;
  for (const PointId id : out.ids) {
    const double d = squared_distance(q, (*data_)[id].vector);
    if (options.radius && d > r2) continue;
    scored.push_back({d, id});
  }
  if (options.max_candidates && scored.size() > *options.max_candidates) {
    const auto keep = static_cast<std::ptrdiff_t>(*options.max_candidates);
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end());
    scored.resize(*options.max_candidates);
  }
  out.ids.clear();
  for (const auto& s : scored) out.ids.push_back(s.id);
  std::sort(out.ids.begin(), out.ids.end());
  return out;
}

LshIndex build(std::shared_ptr<const Dataset> data, const HashFamily& family) {
  if (!data || data->empty()) throw InvalidArgument("build: dataset must be non-empty");
  auto tables = hash_into_tables(*data, family);
  return LshIndex(std::move(data), family, std::move(tables));
}

CandidateSet query(const LshIndex& index, const FeatureVector& q, const QueryOptions& options) {
  return index.query(q, options);
}

void save_index(const LshIndex& index, const std::filesystem::path& path) {
  using detail::write_pod;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  detail::write_magic(out, kIndexMagic);
  write_family(out, index.family());
  write_pod<std::uint64_t>(out, index.size());
  for (const auto& table : index.tables()) {
    std::vector<HashKey> keys;
    keys.reserve(table.size());
    for (const auto& [key, ids] : table) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    write_pod<std::uint64_t>(out, keys.size());
    for (const auto& key : keys) {
      const auto& ids = table.at(key);
      write_pod<std::uint64_t>(out, key.bits);
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ids.size()));
      for (const PointId id : ids) write_pod<std::uint32_t>(out, id);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

LshIndex load_index(const std::filesystem::path& path, std::shared_ptr<const Dataset> data) {
  using detail::read_pod;
  if (!data) throw InvalidArgument("load_index needs the indexed dataset");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::expect_magic(in, kIndexMagic);
  HashFamily family = read_family(in);
  const auto n = read_pod<std::uint64_t>(in);
  if (n != data->size() || family.dim() != data->dim()) {
    throw IoError("index was built over a different dataset (n or d mismatch)");
  }
  std::vector<LshIndex::Table> tables(family.table_count());
  for (auto& table : tables) {
    const auto buckets = read_pod<std::uint64_t>(in);
    for (std::uint64_t b = 0; b < buckets; ++b) {
      const HashKey key{read_pod<std::uint64_t>(in)};
      const auto count = read_pod<std::uint32_t>(in);
      auto& ids = table[key];
      ids.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        const auto id = read_pod<std::uint32_t>(in);
        if (id >= n) throw IoError("index references point id out of range");
        ids.push_back(id);
      }
    }
  }
  return LshIndex(std::move(data), std::move(family), std::move(tables));
}

std::vector<PointId> exact_knn(const Dataset& data, const FeatureVector& q, std::size_t k) {
  std::vector<Scored> scored;
  scored.reserve(data.size());
  for (const auto& p : data) scored.push_back({squared_distance(q, p.vector), p.id});
  const std::size_t keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
  std::vector<PointId> ids(keep);
  for (std::size_t i = 0; i < keep; ++i) ids[i] = scored[i].id;
  return ids;
}

double recall_at_k(const LshIndex& index, const Dataset& queries, std::size_t k, const QueryOptions& options) {
  if (queries.empty()) return 0.0;
  double total = 0.0;
  for (const auto& q : queries) {
    const auto truth = exact_knn(index.dataset(), q.vector, k);
    const auto cand = index.query(q.vector, options);
    std::size_t hit = 0;
    for (const PointId id : truth) hit += std::binary_search(cand.ids.begin(), cand.ids.end(), id) ? 1 : 0;
    total += truth.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
  }
  return total / static_cast<double>(queries.size());
}

TuneResult tune(const Dataset& data, double target_recall, double epsilon, const TuneOptions& opt) {
  if (!(target_recall > 0.0 && target_recall < 1.0)) {
    throw InvalidArgument("tune: target_recall must lie in (0, 1)");
  }
  if (!(epsilon >= 0.0)) throw InvalidArgument("tune: epsilon must be >= 0");
  if (data.size() < 2) throw InvalidArgument("tune: need at least two points");
  if (opt.min_bits < 1 || opt.max_bits > kMaxBitsPerTable || opt.min_bits > opt.max_bits || opt.bit_step < 1 ||
      opt.max_tables < 1) {
    throw InvalidArgument("tune: invalid grid");
  }

  // Deterministic held-out split.
  std::vector<PointId> order(data.size());
  std::iota(order.begin(), order.end(), PointId{0});
  std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
    const auto ka = counter_rng::bits(opt.seed, 0x7475e, a);
    const auto kb = counter_rng::bits(opt.seed, 0x7475e, b);
    return ka < kb || (ka == kb && a < b);
  });
  const std::size_t sample = std::clamp<std::size_t>(std::min(opt.sample_queries, data.size() / 5), 1,
                                                     data.size() - 1);
  const std::vector<PointId> query_ids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sample));
  std::vector<PointId> rest_ids(order.begin() + static_cast<std::ptrdiff_t>(sample), order.end());
  std::sort(rest_ids.begin(), rest_ids.end());
  const Dataset rest = subset(data, rest_ids);
  const std::size_t n = rest.size();
  const std::size_t k = std::min(opt.neighbors, n);

  // Per query: which indexed points count as good answers.
  std::vector<std::vector<char>> good(sample, std::vector<char>(n, 0));
  for (std::size_t qi = 0; qi < sample; ++qi) {
    const auto& q = data[query_ids[qi]].vector;
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(q, rest[i].vector);
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
    const double rk = std::sqrt(sorted[k - 1]) * (1.0 + epsilon);
    for (std::size_t i = 0; i < n; ++i) good[qi][i] = std::sqrt(dist[i]) <= rk ? 1 : 0;
  }

  std::optional<TruncatedBasis> basis;
  if (opt.kind != HashKind::PlainRandom) {
    if (opt.projected_dim == 0) throw InvalidArgument("tune: PCA kinds need projected_dim");
    SvdOptions so;
    so.seed = opt.seed;
    basis = truncated_svd(rest, opt.projected_dim, so);
  }

  TuneResult best;
  bool have_best = false;
  auto better = [&](const TuneResult& c) {
    if (!have_best) return true;
    if (c.feasible != best.feasible) return c.feasible;
    if (!c.feasible && c.recall != best.recall) return c.recall > best.recall;
    if (c.mean_touched != best.mean_touched) return c.mean_touched < best.mean_touched;
    const auto cost_c = c.bits_per_table * c.table_count;
    const auto cost_b = best.bits_per_table * best.table_count;
    if (cost_c != cost_b) return cost_c < cost_b;
    return c.bits_per_table < best.bits_per_table;
  };

  const auto shared_rest = std::make_shared<const Dataset>(rest);
  std::vector<std::uint32_t> stamp(n, 0);
  std::uint32_t current = 0;
  for (std::size_t l = opt.min_bits; l <= opt.max_bits; l += opt.bit_step) {
    FamilyParams fp;
    fp.kind = opt.kind;
    fp.bits_per_table = l;
    fp.table_count = opt.max_tables;
    fp.dim = data.dim();
    fp.projected_dim = opt.projected_dim;
    fp.seed = opt.seed;
    const LshIndex index = build(shared_rest, HashFamily(fp, basis));

    std::vector<double> sum_recall(opt.max_tables, 0.0), sum_touched(opt.max_tables, 0.0),
        sum_cand(opt.max_tables, 0.0);
    for (std::size_t qi = 0; qi < sample; ++qi) {
      const auto keys = index.family().hash_all(data[query_ids[qi]].vector);
      ++current;
      std::size_t touched = 0, cand = 0, hits = 0;
      for (std::size_t t = 0; t < opt.max_tables; ++t) {
        const auto it = index.tables()[t].find(keys[t]);
        if (it != index.tables()[t].end()) {
          touched += it->second.size();
          for (const PointId id : it->second) {
            if (stamp[id] == current) continue;
            stamp[id] = current;
            ++cand;
            hits += good[qi][id] ? 1 : 0;
          }
        }
        sum_recall[t] += static_cast<double>(std::min(hits, k)) / static_cast<double>(k);
        sum_touched[t] += static_cast<double>(touched);
        sum_cand[t] += static_cast<double>(cand);
      }
    }
    for (std::size_t t = 0; t < opt.max_tables; ++t) {
      TuneResult c;
      c.bits_per_table = l;
      c.table_count = t + 1;
      c.recall = sum_recall[t] / static_cast<double>(sample);
      c.mean_touched = sum_touched[t] / static_cast<double>(sample);
      c.mean_candidates = sum_cand[t] / static_cast<double>(sample);
      c.feasible = c.recall >= target_recall;
      if (better(c)) {
        best = c;
        have_best = true;
      }
    }
  }
  return best;
}

}  // namespace divhash
