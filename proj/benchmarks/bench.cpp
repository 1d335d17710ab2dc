#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "divhash/hash.hpp"
#include "divhash/index.hpp"
#include "divhash/linalg.hpp"
#include "divhash/select.hpp"

using namespace divhash;

namespace {

std::shared_ptr<const Dataset> random_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  std::vector<DataPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = g(gen);
    pts[i].id = static_cast<PointId>(i);
    pts[i].vector = FeatureVector::dense(std::move(x));
    normalize_in_place(pts[i].vector);
  }
  return std::make_shared<const Dataset>(d, std::move(pts));
}

HashFamily plain_family(std::size_t d, std::size_t l, std::size_t tables) {
  FamilyParams fp;
  fp.bits_per_table = l;
  fp.table_count = tables;
  fp.dim = d;
  return new_family(fp);
}

void BM_HashPoint(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto data = random_data(1, d, 1);
  const auto family = plain_family(d, 16, 8);
  std::vector<HashKey> keys(8);
  for (auto _ : state) {
    family.hash_all((*data)[0].vector, keys);
    benchmark::DoNotOptimize(keys.data());
  }
}
BENCHMARK(BM_HashPoint)->Arg(32)->Arg(128)->Arg(512);

void BM_IndexQuery(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = random_data(n, 64, 2);
  const auto index = build(data, plain_family(64, 12, 8));
  const auto queries = random_data(64, 64, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    auto c = index.query((*queries)[i++ % queries->size()].vector);
    benchmark::DoNotOptimize(c.ids.data());
  }
}
BENCHMARK(BM_IndexQuery)->Arg(1 << 12)->Arg(1 << 15);

template <typename Select>
void run_selector(benchmark::State& state, Select select) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = random_data(n, 64, 4);
  const auto queries = random_data(1, 64, 5);
  std::vector<PointId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<PointId>(i);
  const auto problem = make_problem(*data, ids, (*queries)[0].vector, 10, 0.5);
  for (auto _ : state) {
    auto r = select(problem);
    benchmark::DoNotOptimize(r.ids.data());
  }
}

void BM_SelectNn(benchmark::State& s) { run_selector(s, [](const auto& p) { return select_nn(p); }); }
void BM_SelectGreedy(benchmark::State& s) { run_selector(s, [](const auto& p) { return select_greedy_div(p); }); }
void BM_SelectMmr(benchmark::State& s) { run_selector(s, [](const auto& p) { return select_mmr(p); }); }
void BM_SelectRerank(benchmark::State& s) { run_selector(s, [](const auto& p) { return select_rerank(p, 3.0); }); }
void BM_SelectQpRel(benchmark::State& s) { run_selector(s, [](const auto& p) { return select_qp_rel(p); }); }
BENCHMARK(BM_SelectNn)->Arg(500)->Arg(5000);
BENCHMARK(BM_SelectGreedy)->Arg(500)->Arg(5000);
BENCHMARK(BM_SelectMmr)->Arg(500)->Arg(5000);
BENCHMARK(BM_SelectRerank)->Arg(500)->Arg(5000);
BENCHMARK(BM_SelectQpRel)->Arg(100)->Arg(500);

void BM_ProjectCappedSimplex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(6);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(gen);
  for (auto _ : state) {
    auto a = project_capped_simplex(v, 10);
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_ProjectCappedSimplex)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
