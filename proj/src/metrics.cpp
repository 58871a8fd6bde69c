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

#include "alvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alvc/error.hpp"

namespace alvc {

std::string_view to_string(RecallMode m) { return m == RecallMode::kHit ? "hit" : "pooled"; }
std::string_view to_string(RankMode m) { return m == RankMode::kBest ? "best" : "all"; }

RecallMode recall_mode_from_string(std::string_view s) {
  if (s == "hit") return RecallMode::kHit;
  if (s == "pooled") return RecallMode::kPooled;
  throw PreconditionError("unknown recall mode '" + std::string(s) + "'");
}

RankMode rank_mode_from_string(std::string_view s) {
  if (s == "best") return RankMode::kBest;
  if (s == "all") return RankMode::kAll;
  throw PreconditionError("unknown rank mode '" + std::string(s) + "'");
}

Interval proportion_ci(double p_hat, std::size_t n, double z) {
  if (n == 0) throw RangeError("proportion_ci: n must be >= 1");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw RangeError("proportion_ci: p outside [0, 1]");
  const double hw = z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
  Interval ci{std::max(0.0, p_hat - hw), std::min(1.0, p_hat + hw), hw, false};
  ci.degenerate = hw == 0.0;
  return ci;
}

Interval mean_ci(std::span<const double> values, double z) {
  if (values.size() < 2) throw RangeError("mean_ci: need at least two values");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double hw = z * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return {mean - hw, mean + hw, hw, hw == 0.0};
}

std::vector<std::size_t> correct_ranks(const ScoredRanking& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.size() && i < r.categories.size(); ++i) {
    if (r.categories[i] == Category::kCorrect) out.push_back(r.ranks[i]);
  }
  if (out.empty()) {
    throw PreconditionError("ranking " + r.sample_id + " has no correct candidate");
  }
  return out;
}

namespace {

// One value per sample (best mode) or per correct candidate (all mode).
std::vector<double> rank_values(std::span<const ScoredRanking> rankings, RankMode mode,
                                bool reciprocal) {
  std::vector<double> out;
  for (const auto& r : rankings) {
    const auto ranks = correct_ranks(r);
    if (mode == RankMode::kBest) {
      const double best = static_cast<double>(*std::min_element(ranks.begin(), ranks.end()));
      out.push_back(reciprocal ? 1.0 / best : best);
    } else {
      for (std::size_t k : ranks) {
        const double v = static_cast<double>(k);
        out.push_back(reciprocal ? 1.0 / v : v);
      }
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw PreconditionError("no rankings to evaluate");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct RecallCounts {
  std::size_t hits = 0;
  std::size_t total = 0;
};

RecallCounts recall_counts(std::span<const ScoredRanking> rankings, std::size_t k,
                           RecallMode mode) {
  if (k < 1) throw RangeError("recall_at_k: k must be >= 1");
  RecallCounts c;
  for (const auto& r : rankings) {
    const auto ranks = correct_ranks(r);
    if (mode == RecallMode::kHit) {
      ++c.total;
      if (*std::min_element(ranks.begin(), ranks.end()) <= k) ++c.hits;
    } else {
      c.total += ranks.size();
      c.hits += static_cast<std::size_t>(
          std::count_if(ranks.begin(), ranks.end(), [k](std::size_t x) { return x <= k; }));
    }
  }
  if (c.total == 0) throw PreconditionError("no rankings to evaluate");
  return c;
}

Estimate mean_estimate(const std::vector<double>& values) {
  Estimate e;
  e.value = mean_of(values);
  if (values.size() >= 2) {
    e.ci = mean_ci(values);
  } else {
    e.ci = {e.value, e.value, 0.0, true};
  }
  return e;
}

std::string format_cell(double value, double half_width, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, value, precision, half_width);
  return buf;
}

}  // namespace

double recall_at_k(std::span<const ScoredRanking> rankings, std::size_t k, RecallMode mode) {
  const auto c = recall_counts(rankings, k, mode);
  return static_cast<double>(c.hits) / static_cast<double>(c.total);
}

double mean_rank(std::span<const ScoredRanking> rankings, RankMode mode) {
  return mean_of(rank_values(rankings, mode, false));
}

double mrr(std::span<const ScoredRanking> rankings, RankMode mode) {
  return mean_of(rank_values(rankings, mode, true));
}

MetricReport evaluate(std::span<const ScoredRanking> rankings, RecallMode recall_mode,
                      RankMode rank_mode) {
  if (rankings.empty()) throw PreconditionError("evaluate: no rankings");
  MetricReport r;
  r.n_samples = rankings.size();
  r.recall_mode = recall_mode;
  r.rank_mode = rank_mode;
  for (std::size_t i = 0; i < MetricReport::kRecallKs.size(); ++i) {
    const auto c = recall_counts(rankings, MetricReport::kRecallKs[i], recall_mode);
    const double p = static_cast<double>(c.hits) / static_cast<double>(c.total);
    r.recall_at[i] = {p, proportion_ci(p, c.total)};
  }
  r.mr = mean_estimate(rank_values(rankings, rank_mode, false));
  r.mrr = mean_estimate(rank_values(rankings, rank_mode, true));
  return r;
}

std::string metric_tsv_header() { return "Recall@1\tRecall@5\tRecall@10\tMR\tMRR"; }

std::string metric_tsv_cells(const MetricReport& r) {
  std::string out;
  for (const auto& e : r.recall_at) {
    out += format_cell(100.0 * e.value, 100.0 * e.ci.half_width, 2);
    out += '\t';
  }
  out += format_cell(r.mr.value, r.mr.ci.half_width, 2);
  out += '\t';
  out += format_cell(r.mrr.value, r.mrr.ci.half_width, 3);
  return out;
}

}  // namespace alvc
