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

#include "alvc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "alvc/error.hpp"
#include "json.hpp"

namespace alvc {

std::size_t TokenLosses::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_mask.begin(), valid_mask.end(), true));
}

std::string_view to_string(Aggregation a) { return a == Aggregation::kSum ? "sum" : "mean"; }

std::string_view to_string(Direction d) {
  return d == Direction::kAscending ? "ascending" : "descending";
}

Aggregation aggregation_from_string(std::string_view s) {
  if (s == "sum") return Aggregation::kSum;
  if (s == "mean") return Aggregation::kMean;
  throw PreconditionError("unknown aggregation '" + std::string(s) + "'");
}

Direction direction_from_string(std::string_view s) {
  if (s == "ascending" || s == "asc") return Direction::kAscending;
  if (s == "descending" || s == "desc") return Direction::kDescending;
  throw PreconditionError("unknown direction '" + std::string(s) + "'");
}

namespace {

void check_shape(const TokenLosses& tl) {
  if (tl.losses.size() != tl.valid_mask.size()) {
    throw ScoringError("token losses and valid mask differ in length");
  }
}

}  // namespace

double aggregate_sum(const TokenLosses& tl, bool include_masked) {
  check_shape(tl);
  if (tl.valid_count() == 0) throw ScoringError("score undefined: no valid tokens");
  double s = 0.0;
  for (std::size_t i = 0; i < tl.losses.size(); ++i) {
    if (include_masked || tl.valid_mask[i]) s += tl.losses[i];
  }
  return s;
}

double aggregate_mean(const TokenLosses& tl) {
  const double s = aggregate_sum(tl, false);
  return s / static_cast<double>(tl.valid_count());
}

double aggregate(const TokenLosses& tl, Aggregation a, bool include_masked) {
  return a == Aggregation::kSum ? aggregate_sum(tl, include_masked) : aggregate_mean(tl);
}

ScoredRanking rank_candidates(std::span<const double> scores, Direction direction) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw ScoringError("candidate " + std::to_string(i) + " has non-finite score");
    }
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (direction == Direction::kAscending) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  }
  ScoredRanking r;
  r.direction = direction;
  r.scores.assign(scores.begin(), scores.end());
  r.ranks.resize(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) r.ranks[order[pos]] = pos + 1;
  return r;
}

SampleInputs resolve_inputs(const Video& video, const EvalSample& sample, const Vocab& vocab,
                            std::size_t max_context_tokens) {
  SampleInputs in;
  in.sample_id = sample.id();
  for (std::size_t f : sample.frame_refs) in.frames.push_back(video.frames.at(f).vector);
  for (std::size_t i = 0; i < sample.context_refs.size(); ++i) {
    if (i > 0) in.context_ids.push_back(Specials::kEos);
    const auto ids = vocab.encode(video.comments.at(sample.context_refs[i]).tokens);
    in.context_ids.insert(in.context_ids.end(), ids.begin(), ids.end());
  }
  if (max_context_tokens > 0 && in.context_ids.size() > max_context_tokens) {
    in.context_ids.erase(in.context_ids.begin(),
                         in.context_ids.end() - static_cast<std::ptrdiff_t>(max_context_tokens));
  }
  return in;
}

std::vector<TokenLosses> Scorer::score_batch(const SampleInputs& inputs,
                                             std::span<const Tokens> candidates) const {
  std::vector<TokenLosses> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(per_token_losses(inputs, c));
  return out;
}

NgramScorer::NgramScorer(Vocab vocab, double alpha)
    : vocab_(std::move(vocab)), alpha_(alpha), history_(vocab_.size(), 0) {
  if (!(alpha > 0.0)) throw PreconditionError("ngram alpha must be > 0");
}

double NgramScorer::prob(TokenId prev, TokenId next) const {
  const double v = static_cast<double>(vocab_.size());
  return (static_cast<double>(bigram_count(prev, next)) + alpha_) /
         (static_cast<double>(history_count(prev)) + alpha_ * v);
}

std::size_t NgramScorer::bigram_count(TokenId prev, TokenId next) const {
  const auto it = bigrams_.find(key(prev, next));
  return it == bigrams_.end() ? 0 : it->second;
}

std::size_t NgramScorer::history_count(TokenId prev) const {
  return history_.at(static_cast<std::size_t>(prev));
}

void NgramScorer::add_sequence(std::span<const TokenId> ids) {
  TokenId prev = Specials::kBos;
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    const TokenId next = i < ids.size() ? ids[i] : Specials::kEos;
    ++bigrams_[key(prev, next)];
    ++history_.at(static_cast<std::size_t>(prev));
    prev = next;
  }
}

TokenLosses NgramScorer::per_token_losses(const SampleInputs&, const Tokens& candidate) const {
  const auto ids = vocab_.encode(candidate);
  TokenLosses tl;
  TokenId prev = Specials::kBos;
  for (std::size_t i = 0; i <= ids.size(); ++i) {
    const TokenId next = i < ids.size() ? ids[i] : Specials::kEos;
    tl.losses.push_back(-std::log(prob(prev, next)));
    tl.valid_mask.push_back(true);
    prev = next;
  }
  return tl;
}

void NgramScorer::save(const std::filesystem::path& path) const {
  std::vector<std::array<std::uint64_t, 3>> rows;
  rows.reserve(bigrams_.size());
  for (const auto& [k, c] : bigrams_) rows.push_back({k >> 32, k & 0xFFFFFFFFULL, c});
  std::sort(rows.begin(), rows.end());
  nlohmann::ordered_json j;
  j["format"] = "alvc-bigram-v1";
  j["alpha"] = alpha_;
  j["vocab"] = vocab_.tokens();
  j["bigrams"] = rows;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump() << '\n';
}

NgramScorer NgramScorer::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(is);
  if (j.at("format") != "alvc-bigram-v1") throw PreconditionError("not a bigram model file");
  auto tokens = j.at("vocab").get<std::vector<std::string>>();
  const std::size_t n = tokens.size();
  NgramScorer s(Vocab(std::move(tokens), n), j.at("alpha").get<double>());
  for (const auto& row : j.at("bigrams")) {
    const auto prev = row.at(0).get<TokenId>();
    const auto next = row.at(1).get<TokenId>();
    const auto c = row.at(2).get<std::size_t>();
    s.bigrams_[key(prev, next)] = c;
    s.history_.at(static_cast<std::size_t>(prev)) += c;
  }
  return s;
}

NgramScorer train_ngram(const Corpus& train, const Vocab& vocab, int order, double alpha) {
  if (order != 2) throw PreconditionError("only bigram (order 2) models are supported");
  if (train.comment_count() == 0) throw PreconditionError("cannot train ngram on empty corpus");
  NgramScorer s(vocab, alpha);
  for (const auto& v : train.videos) {
    for (const auto& c : v.comments) s.add_sequence(vocab.encode(c.tokens));
  }
  return s;
}

ScoredRanking score_candidate_set(const Scorer& scorer, const SampleInputs& inputs,
                                  const CandidateSet& cs, Aggregation aggregation,
                                  Direction direction, bool include_masked) {
  std::vector<Tokens> candidates;
  candidates.reserve(cs.entries.size());
  for (const auto& e : cs.entries) candidates.push_back(e.tokens);
  const auto losses = scorer.score_batch(inputs, candidates);

  std::vector<double> scores(losses.size());
  bool truncated = false;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    try {
      scores[i] = aggregate(losses[i], aggregation, include_masked);
    } catch (const ScoringError& e) {
      throw ScoringError(cs.sample_id + " candidate " + std::to_string(i) + " '" +
                         cs.entries[i].text + "': " + e.what());
    }
    truncated = truncated || losses[i].truncated;
  }
  ScoredRanking r;
  try {
    r = rank_candidates(scores, direction);
  } catch (const ScoringError& e) {
    throw ScoringError(cs.sample_id + ": " + e.what());
  }
  r.sample_id = cs.sample_id;
  r.aggregation = aggregation;
  r.any_truncated = truncated;
  r.categories.reserve(cs.entries.size());
  for (const auto& e : cs.entries) r.categories.push_back(e.category);
  return r;
}

void write_rankings_tsv_header(std::ostream& os) {
  os << "sample_id\tcandidate_rank\tcategory\tscore\taggregation\tdirection\n";
}

void write_ranking_tsv(std::ostream& os, const ScoredRanking& r) {
  std::vector<std::size_t> by_rank(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) by_rank[r.ranks[i] - 1] = i;
  char buf[40];
  for (std::size_t i : by_rank) {
    std::snprintf(buf, sizeof buf, "%.17g", r.scores[i]);
    os << r.sample_id << '\t' << r.ranks[i] << '\t'
       << (i < r.categories.size() ? to_string(r.categories[i]) : std::string_view("-")) << '\t'
       << buf << '\t' << to_string(r.aggregation) << '\t' << to_string(r.direction) << '\n';
  }
}

}  // namespace alvc
