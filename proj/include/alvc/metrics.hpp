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

#pragma once

// Recall@k, mean rank and mean reciprocal rank over ranked candidate sets,
// with normal-approximation 95% intervals.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alvc/scoring.hpp"

namespace alvc {

/// hit: a sample counts when its best correct candidate is within k.
/// pooled: correct candidates within k over all correct candidates.
enum class RecallMode { kHit, kPooled };
/// best: the best-ranked correct candidate per sample. all: every correct one.
enum class RankMode { kBest, kAll };

std::string_view to_string(RecallMode m);
std::string_view to_string(RankMode m);
RecallMode recall_mode_from_string(std::string_view s);
RankMode rank_mode_from_string(std::string_view s);

inline constexpr double kZ95 = 1.959964;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  /// Before clamping.
  double half_width = 0.0;
  /// Zero-width interval at a boundary (p = 0 or 1), or n too small.
  bool degenerate = false;
};

/// p ± z·sqrt(p(1-p)/n), clamped to [0, 1]. Throws RangeError for n = 0 or
/// p outside [0, 1].
Interval proportion_ci(double p_hat, std::size_t n, double z = kZ95);

/// mean ± z·s/sqrt(n) with the sample standard deviation. Throws RangeError
/// for fewer than two values.
Interval mean_ci(std::span<const double> values, double z = kZ95);

/// Ranks of the correct candidates of one ranking.
std::vector<std::size_t> correct_ranks(const ScoredRanking& r);

/// Throws RangeError for k < 1 and PreconditionError when a ranking has no
/// correct candidate.
double recall_at_k(std::span<const ScoredRanking> rankings, std::size_t k,
                   RecallMode mode = RecallMode::kHit);
double mean_rank(std::span<const ScoredRanking> rankings, RankMode mode = RankMode::kBest);
double mrr(std::span<const ScoredRanking> rankings, RankMode mode = RankMode::kBest);

struct Estimate {
  double value = 0.0;
  Interval ci;
};

struct MetricReport {
  static constexpr std::array<std::size_t, 3> kRecallKs = {1, 5, 10};

  std::array<Estimate, 3> recall_at;  // aligned with kRecallKs
  Estimate mr;
  Estimate mrr;
  std::size_t n_samples = 0;
  RecallMode recall_mode = RecallMode::kHit;
  RankMode rank_mode = RankMode::kBest;
};

MetricReport evaluate(std::span<const ScoredRanking> rankings,
                      RecallMode recall_mode = RecallMode::kHit,
                      RankMode rank_mode = RankMode::kBest);

/// "Recall@1\tRecall@5\tRecall@10\tMR\tMRR" header; recalls are printed as
/// percentages, each cell "value ± half-width".
std::string metric_tsv_header();
std::string metric_tsv_cells(const MetricReport& r);

}  // namespace alvc
