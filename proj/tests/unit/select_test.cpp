#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "divhash/error.hpp"
#include "divhash/select.hpp"
#include "fixtures.hpp"

using namespace divhash;

namespace {

// Owns the vectors a SelectionProblem points into.
struct Instance {
  FeatureVector q;
  std::vector<FeatureVector> xs;
  std::vector<PointId> ids;
  oracle::Vec qv;
  std::vector<oracle::Vec> xv;

  Instance(oracle::Vec query, std::vector<oracle::Vec> points, std::vector<PointId> id_list = {})
      : qv(std::move(query)), xv(std::move(points)) {
    q = FeatureVector::dense(qv);
    for (const auto& x : xv) xs.push_back(FeatureVector::dense(x));
    ids = id_list;
    if (ids.empty()) {
      for (std::size_t i = 0; i < xv.size(); ++i) ids.push_back(static_cast<PointId>(i));
    }
  }

  SelectionProblem problem(std::size_t k, double lambda) const {
    SelectionProblem p;
    p.query = &q;
    p.k = k;
    p.lambda = lambda;
    for (std::size_t i = 0; i < xs.size(); ++i) p.candidates.push_back({ids[i], &xs[i]});
    return p;
  }

  std::vector<PointId> to_ids(const std::vector<std::size_t>& pos) const {
    std::vector<PointId> out;
    for (const auto i : pos) out.push_back(ids[i]);
    return out;
  }
};

Instance random_instance(std::size_t n, std::size_t d, std::uint64_t seed) {
  auto xs = fixtures::random_units(n, d, seed);
  std::vector<PointId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<PointId>(3 * i + 1);
  std::mt19937_64 gen(seed);
  std::shuffle(ids.begin(), ids.end(), gen);
  return Instance(oracle::random_unit(d, seed + 99), std::move(xs), ids);
}

std::vector<PointId> sorted(std::vector<PointId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Problem, Validation) {
  Instance inst({1, 0}, {{1, 0}, {0, 1}});
  auto p = inst.problem(0, 0.5);
  EXPECT_THROW(select_nn(p), InvalidArgument);
  p = inst.problem(1, 1.5);
  EXPECT_THROW(select_nn(p), InvalidArgument);
  Instance dup({1, 0}, {{1, 0}, {0, 1}}, {4, 4});
  EXPECT_THROW(select_nn(dup.problem(1, 0.5)), InvalidArgument);
}

TEST(SelectNn, PicksDuplicateOfQuery) {
  Instance inst({0.6, 0.8}, {{0.8, -0.6}, {0.6, 0.8}});
  EXPECT_EQ(select_nn(inst.problem(1, 0.5)).ids, (std::vector<PointId>{1}));
}

TEST(SelectNn, UnderfilledWhenShort) {
  Instance inst({1, 0}, {{1, 0}, {0, 1}});
  const auto r = select_nn(inst.problem(5, 0.5));
  EXPECT_EQ(r.ids.size(), 2u);
  EXPECT_TRUE(r.underfilled);
  EXPECT_FALSE(select_nn(inst.problem(2, 0.5)).underfilled);
}

TEST(SelectNn, MatchesSortOracle) {
  const auto inst = random_instance(10, 5, 1);
  const auto r = select_nn(inst.problem(3, 0.5));
  EXPECT_EQ(r.ids, inst.to_ids(oracle::nn(inst.qv, inst.xv, inst.ids, 3)));
}

TEST(SelectGreedy, FirstPickIsNearest) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = random_instance(9, 4, s);
    for (const double lambda : {0.3, 1.0}) {
      EXPECT_EQ(select_greedy_div(inst.problem(1, lambda)).ids, select_nn(inst.problem(1, lambda)).ids);
    }
    // λ = 0 scores every candidate 0 on the first pick, so the smallest id wins.
    EXPECT_EQ(select_greedy_div(inst.problem(1, 0.0)).ids, std::vector<PointId>{*std::min_element(inst.ids.begin(), inst.ids.end())});
  }
}

TEST(SelectGreedy, CollinearWorkedExample) {
  // q = e0; candidates at distances 0.1, 0.2, 1.0 from q along one line.
  Instance inst({0, 0}, {{0.1, 0}, {0.2, 0}, {1.0, 0}});
  const auto r = select_greedy_div(inst.problem(2, 0.5));
  ASSERT_EQ(r.ids.size(), 2u);
  EXPECT_EQ(r.ids[0], 0u);
  // i = 2: score(r) = 0.5·‖q − r‖² − ½‖r − x0‖²
  const double s1 = 0.5 * 0.04 - 0.5 * 0.01;
  const double s2 = 0.5 * 1.0 - 0.5 * 0.81;
  EXPECT_EQ(r.ids[1], s1 < s2 ? 1u : 2u);
}

TEST(SelectGreedy, MatchesLiteralLoop) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto inst = random_instance(4 + s % 20, 3 + s % 5, s + 10);
    for (const double lambda : {0.0, 0.5, 1.0}) {
      const std::size_t k = 1 + s % 6;
      EXPECT_EQ(select_greedy_div(inst.problem(k, lambda)).ids,
                inst.to_ids(oracle::greedy(inst.qv, inst.xv, inst.ids, k, lambda)));
    }
  }
}

TEST(SelectMmr, LambdaOneIsNn) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto inst = random_instance(12, 6, s + 200);
    EXPECT_EQ(select_mmr(inst.problem(5, 1.0)).ids, select_nn(inst.problem(5, 1.0)).ids);
  }
}

TEST(SelectMmr, PureNoveltyAvoidsDuplicate) {
  Instance inst({1, 0}, {{1, 0}, {1, 0}, {0, 1}});
  const auto r = select_mmr(inst.problem(2, 0.0));
  EXPECT_EQ(r.ids, (std::vector<PointId>{0, 2}));
}

TEST(SelectMmr, MatchesReferenceLoop) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto inst = random_instance(12, 5, s + 300);
    EXPECT_EQ(select_mmr(inst.problem(4, 0.6)).ids, inst.to_ids(oracle::mmr(inst.qv, inst.xv, inst.ids, 4, 0.6)));
  }
}

TEST(SelectRerank, UnitPoolIsNnSet) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto inst = random_instance(15, 5, s + 400);
    EXPECT_EQ(sorted(select_rerank(inst.problem(4, 0.5), 1.0).ids), sorted(select_nn(inst.problem(4, 0.5)).ids));
  }
}

TEST(SelectRerank, FarPointChosenSecond) {
  Instance inst({1, 0}, {{1, 0}, {0.99, 0.141}, {0.0, 1.0}});
  const auto r = select_rerank(inst.problem(2, 0.5), 1.5);
  EXPECT_EQ(r.ids, (std::vector<PointId>{0, 2}));
}

TEST(SelectRerank, MatchesReference) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto inst = random_instance(20, 5, s + 500);
    EXPECT_EQ(select_rerank(inst.problem(3, 0.5), 3.0).ids,
              inst.to_ids(oracle::rerank(inst.qv, inst.xv, inst.ids, 3, 3.0)));
  }
  EXPECT_THROW(select_rerank(random_instance(5, 3, 1).problem(2, 0.5), 0.5), InvalidArgument);
}

TEST(Selectors, ReturnMinKDistinctIds) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto inst = random_instance(1 + s % 9, 4, s + 600);
    const std::size_t k = 1 + s % 7;
    const auto p = inst.problem(k, 0.4);
    for (const auto& r : {select_nn(p), select_greedy_div(p), select_mmr(p), select_rerank(p, 2.0), select_qp_rel(p)}) {
      EXPECT_EQ(r.ids.size(), std::min(k, inst.xs.size()));
      auto ids = sorted(r.ids);
      EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
      for (const auto id : ids) EXPECT_NE(std::find(inst.ids.begin(), inst.ids.end(), id), inst.ids.end());
    }
  }
}

TEST(Objective, Examples) {
  const auto q = FeatureVector::dense({1.0, 0.0});
  const auto same = FeatureVector::dense({1.0, 0.0});
  const FeatureVector* one[] = {&same};
  EXPECT_DOUBLE_EQ(evaluate_objective(q, one, 0.3), 0.0);

  const auto a = FeatureVector::dense({0.0, 1.0});
  const auto b = FeatureVector::dense({0.0, -1.0});
  const FeatureVector* pair[] = {&a, &b};
  // Ordered pairs: (a, b) and (b, a), each at squared distance 4.
  EXPECT_DOUBLE_EQ(evaluate_objective(q, pair, 0.0), -8.0);
}

TEST(Objective, MatchesDoubleLoop) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto inst = random_instance(6, 4, s + 700);
    std::vector<const FeatureVector*> ptrs;
    for (const auto& x : inst.xs) ptrs.push_back(&x);
    EXPECT_NEAR(evaluate_objective(inst.q, ptrs, 0.35), oracle::set_objective(inst.qv, inst.xv, 0.35), 1e-12);
  }
}

TEST(QpRelax, AllChosenWhenKEqualsN) {
  const auto inst = random_instance(5, 3, 1);
  const auto rep = qp_relax_solve(inst.problem(5, 0.5));
  for (const double a : rep.alpha) EXPECT_NEAR(a, 1.0, 1e-12);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(sorted(select_qp_rel(inst.problem(5, 0.5)).ids), sorted(inst.ids));
}

TEST(QpRelax, TwoPointKkt) {
  Instance inst({1, 0}, {{1, 0}, {0, 1}});
  const auto rep = qp_relax_solve(inst.problem(1, 1.0));
  EXPECT_GT(rep.alpha[0], rep.alpha[1]);
  // Stationary point of −a + a² + (1 − a)² on [0, 1]: a = 3/4.
  EXPECT_NEAR(rep.alpha[0], 0.75, 1e-6);
}

TEST(QpRelax, BelowExhaustiveOptimumAndMonotone) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto inst = random_instance(12, 6, s + 800);
    QpOptions o;
    o.record_history = true;
    const auto rep = qp_relax_solve(inst.problem(3, 0.5), o);
    const auto opt = oracle::qp_integer_optimum(inst.qv, inst.xv, 3, 0.5);
    EXPECT_LE(rep.relaxed_objective, opt.best + 1e-9);
    for (std::size_t i = 1; i < rep.objective_history.size(); ++i) {
      EXPECT_LE(rep.objective_history[i], rep.objective_history[i - 1] + 1e-12);
    }
    double sum = 0.0;
    for (const double a : rep.alpha) {
      EXPECT_GE(a, -1e-12);
      EXPECT_LE(a, 1.0 + 1e-12);
      sum += a;
    }
    EXPECT_NEAR(sum, 3.0, 1e-6);
  }
}

TEST(QpRelax, Errors) {
  const auto inst = random_instance(3, 3, 2);
  EXPECT_THROW(qp_relax_solve(inst.problem(4, 0.5)), InvalidArgument);
  Instance empty({1, 0}, {});
  EXPECT_THROW(qp_relax_solve(empty.problem(1, 0.5)), InvalidArgument);
}

TEST(RoundTopK, IntegralAlphaKeepsIds) {
  const auto inst = random_instance(6, 3, 3);
  const std::vector<double> alpha{0, 1, 0, 1, 1, 0};
  const auto r = round_top_k(inst.problem(3, 0.5), alpha);
  EXPECT_EQ(sorted(r.ids), sorted({inst.ids[1], inst.ids[3], inst.ids[4]}));
}
