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

// Candidate scoring: per-token losses from a scorer, sum or mean
// aggregation, and ranking in either direction.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "alvc/corpus.hpp"
#include "alvc/retrieval.hpp"
#include "alvc/text.hpp"

namespace alvc {

struct TokenLosses {
  std::vector<double> losses;     // nats
  std::vector<bool> valid_mask;   // false = padding / separator
  bool truncated = false;         // candidate exceeded the scorer's length limit

  std::size_t valid_count() const;
};

enum class Aggregation { kSum, kMean };
enum class Direction { kAscending, kDescending };

std::string_view to_string(Aggregation a);
std::string_view to_string(Direction d);
Aggregation aggregation_from_string(std::string_view s);
/// Accepts "ascending"/"asc" and "descending"/"desc".
Direction direction_from_string(std::string_view s);

/// Sum over valid tokens; with include_masked every position counts, which
/// reproduces summing up to the padded output length. Throws ScoringError
/// when there are no valid tokens.
double aggregate_sum(const TokenLosses& tl, bool include_masked = false);
/// Sum over valid tokens divided by their number.
double aggregate_mean(const TokenLosses& tl);
double aggregate(const TokenLosses& tl, Aggregation a, bool include_masked = false);

struct ScoredRanking {
  std::string sample_id;
  Aggregation aggregation = Aggregation::kMean;
  Direction direction = Direction::kAscending;
  /// All per-candidate vectors are in candidate insertion order.
  std::vector<double> scores;
  std::vector<std::size_t> ranks;  // 1-based
  std::vector<Category> categories;
  bool any_truncated = false;

  std::size_t size() const { return scores.size(); }
  bool operator==(const ScoredRanking&) const = default;
};

/// Stable sort by score in `direction`; ties keep insertion order.
/// Throws ScoringError naming the first non-finite candidate.
ScoredRanking rank_candidates(std::span<const double> scores, Direction direction);

/// Model inputs resolved for one sample.
struct SampleInputs {
  std::string sample_id;
  std::vector<std::vector<float>> frames;  // m x D
  std::vector<TokenId> context_ids;
};

/// Context comments in time order, token ids joined with EOS separators and
/// truncated to the last `max_context_tokens` ids (0 = unlimited).
SampleInputs resolve_inputs(const Video& video, const EvalSample& sample, const Vocab& vocab,
                            std::size_t max_context_tokens = 0);

/// Per-token loss provider. Implementations must be safe to call
/// concurrently on a const instance.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual TokenLosses per_token_losses(const SampleInputs& inputs,
                                       const Tokens& candidate) const = 0;

  /// Scores every candidate of one sample. The default loops over
  /// per_token_losses; models with shared encoder work override it.
  virtual std::vector<TokenLosses> score_batch(const SampleInputs& inputs,
                                               std::span<const Tokens> candidates) const;
};

/// Additive-smoothing bigram LM over BOS w1..wn EOS.
class NgramScorer final : public Scorer {
 public:
  NgramScorer(Vocab vocab, double alpha);

  const Vocab& vocab() const { return vocab_; }
  double alpha() const { return alpha_; }

  /// (count(prev, next) + alpha) / (count(prev) + alpha * V)
  double prob(TokenId prev, TokenId next) const;
  std::size_t bigram_count(TokenId prev, TokenId next) const;
  std::size_t history_count(TokenId prev) const;

  /// Losses for w1..wn and EOS; all valid. Context inputs are ignored.
  TokenLosses per_token_losses(const SampleInputs& inputs,
                               const Tokens& candidate) const override;

  void add_sequence(std::span<const TokenId> ids);

  void save(const std::filesystem::path& path) const;
  static NgramScorer load(const std::filesystem::path& path);

 private:
  static std::uint64_t key(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  Vocab vocab_;
  double alpha_;
  std::unordered_map<std::uint64_t, std::size_t> bigrams_;
  std::vector<std::size_t> history_;
};

/// Bigram model over every training comment. Throws PreconditionError on an
/// empty corpus, order != 2 or alpha <= 0.
NgramScorer train_ngram(const Corpus& train, const Vocab& vocab, int order = 2,
                        double alpha = 0.1);

/// Scorer -> aggregation -> ranking. Records provenance in the result.
ScoredRanking score_candidate_set(const Scorer& scorer, const SampleInputs& inputs,
                                  const CandidateSet& cs, Aggregation aggregation,
                                  Direction direction, bool include_masked = false);

/// Header then one row per candidate ordered by rank:
/// sample_id, candidate_rank, category, score, aggregation, direction.
void write_rankings_tsv_header(std::ostream& os);
void write_ranking_tsv(std::ostream& os, const ScoredRanking& r);

}  // namespace alvc
