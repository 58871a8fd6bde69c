// Copyright 2026 The ALVC Workbench Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alvc/error.hpp"
#include "alvc/metrics.hpp"
#include "alvc/rng.hpp"

namespace alvc {
namespace {

/// 100-candidate ranking whose correct candidates sit at the given ranks.
ScoredRanking with_correct_at(const std::vector<std::size_t>& ranks, std::size_t n = 100) {
  ScoredRanking r;
  r.sample_id = "s";
  for (std::size_t i = 0; i < n; ++i) {
    r.scores.push_back(static_cast<double>(i));
    r.ranks.push_back(i + 1);
    r.categories.push_back(Category::kRandom);
  }
  for (std::size_t k : ranks) r.categories[k - 1] = Category::kCorrect;
  return r;
}

ScoredRanking random_ranking(Rng& rng) {
  std::vector<std::size_t> perm(100);
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  rng.shuffle(perm);
  return with_correct_at({perm.begin(), perm.begin() + 5});
}

double choose(double n, double k) {
  return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

TEST(Metrics, PerfectRankings) {
  const std::vector<ScoredRanking> r = {with_correct_at({1, 2}), with_correct_at({1})};
  for (auto mode : {RecallMode::kHit, RecallMode::kPooled}) {
    EXPECT_DOUBLE_EQ(recall_at_k(r, 1, RecallMode::kHit), 1.0);
    EXPECT_DOUBLE_EQ(recall_at_k(r, 5, mode), 1.0);
  }
  EXPECT_DOUBLE_EQ(mean_rank(r), 1.0);
  EXPECT_DOUBLE_EQ(mrr(r), 1.0);
}

TEST(Metrics, HandPlacedFixture) {
  const std::vector<ScoredRanking> r = {with_correct_at({3, 12}), with_correct_at({7})};
  EXPECT_DOUBLE_EQ(recall_at_k(r, 5, RecallMode::kHit), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(r, 10, RecallMode::kHit), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(r, 10, RecallMode::kPooled), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(mean_rank(r, RankMode::kBest), 5.0);
  EXPECT_DOUBLE_EQ(mean_rank(r, RankMode::kAll), 22.0 / 3.0);
  const std::vector<ScoredRanking> q = {with_correct_at({2}), with_correct_at({4})};
  EXPECT_DOUBLE_EQ(mrr(q), 0.375);
  EXPECT_THROW(recall_at_k(r, 0), RangeError);
  EXPECT_THROW(mrr(std::vector<ScoredRanking>{with_correct_at({})}), PreconditionError);
}

TEST(Metrics, RecallMonotoneAndOrderInvariant) {
  Rng rng(3);
  std::vector<ScoredRanking> r;
  for (int i = 0; i < 200; ++i) r.push_back(random_ranking(rng));
  for (auto mode : {RecallMode::kHit, RecallMode::kPooled}) {
    double prev = 0.0;
    for (std::size_t k = 1; k <= 100; ++k) {
      const double v = recall_at_k(r, k, mode);
      EXPECT_GE(v, prev);
      prev = v;
    }
    EXPECT_DOUBLE_EQ(prev, 1.0);
  }
  auto shuffled = r;
  rng.shuffle(shuffled);
  EXPECT_DOUBLE_EQ(mean_rank(r), mean_rank(shuffled));
  EXPECT_NEAR(mrr(r), mrr(shuffled), 1e-15);
  EXPECT_DOUBLE_EQ(recall_at_k(r, 5), recall_at_k(shuffled, 5));
}

TEST(Metrics, UniformRandomMatchesHypergeometricOracle) {
  Rng rng(17);
  std::vector<ScoredRanking> r;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) r.push_back(random_ranking(rng));
  const double total = choose(100, 5);
  double exp_mrr = 0.0;
  for (int k = 1; k <= 96; ++k) exp_mrr += choose(100 - k, 4) / total / k;
  const double r1 = 0.05, r5 = 1 - choose(95, 5) / total, r10 = 1 - choose(90, 5) / total;
  EXPECT_NEAR(r5, 0.2304, 1e-4);
  EXPECT_NEAR(r10, 0.4162, 1e-4);
  auto tol = [&](double p) { return 4 * std::sqrt(p * (1 - p) / trials); };
  EXPECT_NEAR(recall_at_k(r, 1), r1, tol(r1));
  EXPECT_NEAR(recall_at_k(r, 5), r5, tol(r5));
  EXPECT_NEAR(recall_at_k(r, 10), r10, tol(r10));
  // Best rank of 5 among 100 has mean (N+1)/(g+1) and sd about 14.
  EXPECT_NEAR(mean_rank(r), 101.0 / 6.0, 4 * 14.5 / std::sqrt(trials));
  EXPECT_NEAR(mrr(r), exp_mrr, 4 * 0.3 / std::sqrt(trials));
}

TEST(ProportionCi, Examples) {
  EXPECT_NEAR(proportion_ci(0.5, 100).half_width, 0.0980, 1e-4);
  EXPECT_NEAR(proportion_ci(0.155, 10000).half_width, 0.0071, 1e-4);
  const auto zero = proportion_ci(0.0, 50);
  EXPECT_EQ(zero.low, 0.0);
  EXPECT_EQ(zero.high, 0.0);
  EXPECT_TRUE(zero.degenerate);
  const auto clamp = proportion_ci(0.99, 5);
  EXPECT_EQ(clamp.high, 1.0);
  EXPECT_GT(clamp.half_width, 0.01);
  EXPECT_THROW(proportion_ci(0.5, 0), RangeError);
  EXPECT_THROW(proportion_ci(1.5, 10), RangeError);
}

TEST(MeanCi, Examples) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const auto ci = mean_ci(v);
  EXPECT_NEAR(ci.half_width, 1.386, 1e-3);
  EXPECT_NEAR((ci.low + ci.high) / 2, 3.0, 1e-12);
  const std::vector<double> doubled = {2, 4, 6, 8, 10};
  const auto ci2 = mean_ci(doubled);
  EXPECT_NEAR(ci2.half_width, 2 * ci.half_width, 1e-12);
  EXPECT_NEAR((ci2.low + ci2.high) / 2, 6.0, 1e-12);
  const std::vector<double> constant(4, 7.0);
  EXPECT_EQ(mean_ci(constant).half_width, 0.0);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(mean_ci(one), RangeError);
}

TEST(Evaluate, ReportAndTsv) {
  const std::vector<ScoredRanking> r = {with_correct_at({3}), with_correct_at({7})};
  const auto rep = evaluate(r);
  EXPECT_EQ(rep.n_samples, 2u);
  EXPECT_DOUBLE_EQ(rep.recall_at[0].value, 0.0);
  EXPECT_DOUBLE_EQ(rep.recall_at[1].value, 0.5);
  EXPECT_DOUBLE_EQ(rep.recall_at[2].value, 1.0);
  EXPECT_DOUBLE_EQ(rep.mr.value, 5.0);
  EXPECT_EQ(metric_tsv_header(), "Recall@1\tRecall@5\tRecall@10\tMR\tMRR");
  const std::string cells = metric_tsv_cells(rep);
  EXPECT_EQ(cells.substr(0, cells.find('\t')), "0.00 ± 0.00");
  EXPECT_NE(cells.find("5.00 ± "), std::string::npos);
  // A single sample gets a degenerate interval rather than an error.
  const auto single = evaluate(std::vector<ScoredRanking>{with_correct_at({4})});
  EXPECT_TRUE(single.mr.ci.degenerate);
  EXPECT_THROW(evaluate(std::vector<ScoredRanking>{}), PreconditionError);
}

}  // namespace
}  // namespace alvc
