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

// tf-idf retrieval and construction of the 100-comment candidate sets used
// for ranking evaluation.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "alvc/corpus.hpp"
#include "alvc/text.hpp"

namespace alvc {

struct Document {
  std::string text;
  Tokens tokens;
};

class TfIdfIndex {
 public:
  struct Hit {
    std::size_t doc_id;
    double similarity;
  };

  /// tf = raw count, idf = ln((1 + N) / (1 + df)) + 1, rows L2-normalized.
  explicit TfIdfIndex(std::vector<Document> docs);

  std::size_t size() const { return docs_.size(); }
  const Document& doc(std::size_t id) const { return docs_[id]; }
  /// 0 for unknown terms.
  double idf(std::string_view term) const;
  /// Sparse normalized weights of one document, sorted by term id.
  const std::vector<std::pair<std::size_t, double>>& doc_vector(std::size_t id) const {
    return vectors_[id];
  }
  /// Query vector under the same weighting; unknown terms are dropped.
  std::vector<std::pair<std::size_t, double>> vectorize(const Tokens& tokens) const;

  /// Cosine similarity, descending, ties by ascending doc id. Documents
  /// whose text is in `exclude` are skipped. Zero-similarity documents fill
  /// the tail when fewer than k share a term with the query.
  std::vector<Hit> query_similar(const Tokens& query, std::size_t k,
                                 const std::unordered_set<std::string>& exclude = {}) const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> term_ids_;
  std::vector<double> idf_;
  std::vector<std::vector<std::pair<std::size_t, double>>> vectors_;
  // term id -> (doc id, weight)
  std::vector<std::vector<std::pair<std::size_t, double>>> postings_;
};

/// Documents from token sequences; text is the space-joined tokens.
TfIdfIndex build_tfidf_index(const std::vector<Tokens>& docs);

/// Distinct whitespace-normalized comment texts of a corpus in first-seen
/// order, each with the tokens of its first occurrence.
std::vector<Document> distinct_comments(const Corpus& corpus);

struct PopularList {
  std::vector<std::string> texts;
  bool warning = false;  // fewer than k distinct strings existed
};

/// k most frequent normalized comment strings, ties by byte order.
PopularList popular_comments(const Corpus& train, std::size_t k = 20);

enum class Category { kCorrect, kPlausible, kPopular, kRandom };
std::string_view to_string(Category c);
Category category_from_string(std::string_view s);

enum class QuerySource { kTitle, kContext };
std::string_view to_string(QuerySource q);
QuerySource query_source_from_string(std::string_view s);

struct CandidateEntry {
  std::string text;
  Tokens tokens;
  Category category = Category::kRandom;

  bool operator==(const CandidateEntry&) const = default;
};

struct CandidateSet {
  static constexpr std::size_t kSize = 100;
  static constexpr std::size_t kMaxCorrect = 5;
  static constexpr std::size_t kPlausible = 30;
  static constexpr std::size_t kPopular = 20;

  std::string sample_id;
  std::vector<CandidateEntry> entries;

  std::size_t count(Category c) const;
  bool operator==(const CandidateSet&) const = default;
};

/// Shared, read-only inputs for candidate construction over one training
/// split.
struct CandidatePool {
  /// The popular list runs past `popular_k` so that slots lost to
  /// collisions with earlier categories are backfilled by the next most
  /// frequent strings.
  explicit CandidatePool(const Corpus& train, std::size_t popular_k = CandidateSet::kPopular);

  TfIdfIndex index;     // over distinct training comments
  std::size_t popular_k;
  PopularList popular;
  std::unordered_map<std::string, std::size_t> doc_of_text;
};

/// Builds the four categories in order: ground truths, tf-idf plausible
/// (query = title or context tokens), popular, then seeded random draws until
/// 100 unique texts. Throws ConstructionError if the pool is too small.
CandidateSet build_candidate_set(const EvalSample& sample, const Corpus& corpus,
                                 const CandidatePool& pool, QuerySource query_source,
                                 std::uint64_t seed);

/// {"sample": {...}, "candidates": [{"text": str, "cat": str}]}, one line.
std::string candidate_set_to_jsonl(const CandidateSet& cs, const EvalSample& sample);

}  // namespace alvc
