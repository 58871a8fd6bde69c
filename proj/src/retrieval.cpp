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

#include "alvc/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "alvc/error.hpp"
#include "alvc/rng.hpp"
#include "json.hpp"

namespace alvc {

TfIdfIndex::TfIdfIndex(std::vector<Document> docs) : docs_(std::move(docs)) {
  std::vector<std::size_t> df;
  std::vector<std::map<std::size_t, std::size_t>> tf(docs_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    for (const auto& term : docs_[d].tokens) {
      auto [it, inserted] = term_ids_.emplace(term, term_ids_.size());
      if (inserted) df.push_back(0);
      if (tf[d][it->second]++ == 0) ++df[it->second];
    }
  }
  const double n = static_cast<double>(docs_.size());
  idf_.resize(df.size());
  for (std::size_t t = 0; t < df.size(); ++t) {
    idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  vectors_.resize(docs_.size());
  postings_.resize(df.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    auto& vec = vectors_[d];
    double norm2 = 0.0;
    for (const auto& [term, count] : tf[d]) {
      const double w = static_cast<double>(count) * idf_[term];
      vec.emplace_back(term, w);
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& [term, w] : vec) {
        w *= inv;
        postings_[term].emplace_back(d, w);
      }
    }
  }
}

double TfIdfIndex::idf(std::string_view term) const {
  const auto it = term_ids_.find(std::string(term));
  return it == term_ids_.end() ? 0.0 : idf_[it->second];
}

std::vector<std::pair<std::size_t, double>> TfIdfIndex::vectorize(const Tokens& tokens) const {
  std::map<std::size_t, std::size_t> tf;
  for (const auto& t : tokens) {
    if (const auto it = term_ids_.find(t); it != term_ids_.end()) ++tf[it->second];
  }
  std::vector<std::pair<std::size_t, double>> vec;
  double norm2 = 0.0;
  for (const auto& [term, count] : tf) {
    const double w = static_cast<double>(count) * idf_[term];
    vec.emplace_back(term, w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [term, w] : vec) w *= inv;
  }
  return vec;
}

std::vector<TfIdfIndex::Hit> TfIdfIndex::query_similar(
    const Tokens& query, std::size_t k, const std::unordered_set<std::string>& exclude) const {
  std::vector<Hit> hits;
  if (k == 0) return hits;

  std::unordered_map<std::size_t, double> acc;
  for (const auto& [term, qw] : vectorize(query)) {
    for (const auto& [doc, dw] : postings_[term]) acc[doc] += qw * dw;
  }
  hits.reserve(acc.size());
  for (const auto& [doc, sim] : acc) {
    if (sim > 0.0 && !exclude.contains(docs_[doc].text)) {
      hits.push_back({doc, std::min(sim, 1.0)});
    }
  }
  auto order = [](const Hit& a, const Hit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.doc_id < b.doc_id;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                      order);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), order);
  }
  for (std::size_t d = 0; d < docs_.size() && hits.size() < k; ++d) {
    const auto it = acc.find(d);
    if (it != acc.end() && it->second > 0.0) continue;
    if (exclude.contains(docs_[d].text)) continue;
    hits.push_back({d, 0.0});
  }
  return hits;
}

TfIdfIndex build_tfidf_index(const std::vector<Tokens>& docs) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& tokens : docs) {
    std::string text;
    for (const auto& t : tokens) {
      if (!text.empty()) text.push_back(' ');
      text += t;
    }
    out.push_back({std::move(text), tokens});
  }
  return TfIdfIndex(std::move(out));
}

std::vector<Document> distinct_comments(const Corpus& corpus) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  for (const auto& v : corpus.videos) {
    for (const auto& c : v.comments) {
      auto text = normalize_whitespace(c.raw_text);
      if (seen.insert(text).second) docs.push_back({std::move(text), c.tokens});
    }
  }
  return docs;
}

PopularList popular_comments(const Corpus& train, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : train.videos) {
    for (const auto& c : v.comments) ++counts[normalize_whitespace(c.raw_text)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  PopularList out;
  out.warning = ranked.size() < k;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    out.texts.push_back(std::move(ranked[i].first));
  }
  return out;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kCorrect:
      return "correct";
    case Category::kPlausible:
      return "plausible";
    case Category::kPopular:
      return "popular";
    case Category::kRandom:
      return "random";
  }
  return "random";
}

Category category_from_string(std::string_view s) {
  if (s == "correct") return Category::kCorrect;
  if (s == "plausible") return Category::kPlausible;
  if (s == "popular") return Category::kPopular;
  if (s == "random") return Category::kRandom;
  throw PreconditionError("unknown candidate category '" + std::string(s) + "'");
}

std::string_view to_string(QuerySource q) {
  return q == QuerySource::kTitle ? "title" : "context";
}

QuerySource query_source_from_string(std::string_view s) {
  if (s == "title") return QuerySource::kTitle;
  if (s == "context") return QuerySource::kContext;
  throw PreconditionError("unknown query source '" + std::string(s) + "'");
}

std::size_t CandidateSet::count(Category c) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [c](const CandidateEntry& e) { return e.category == c; }));
}

CandidatePool::CandidatePool(const Corpus& train, std::size_t popular_k)
    : index(distinct_comments(train)),
      popular_k(popular_k),
      popular(popular_comments(train, popular_k + CandidateSet::kMaxCorrect +
                                          CandidateSet::kPlausible)) {
  for (std::size_t d = 0; d < index.size(); ++d) doc_of_text.emplace(index.doc(d).text, d);
}

CandidateSet build_candidate_set(const EvalSample& sample, const Corpus& corpus,
                                 const CandidatePool& pool, QuerySource query_source,
                                 std::uint64_t seed) {
  const Video* video = corpus.find(sample.video_id);
  if (video == nullptr) {
    throw PreconditionError("sample references unknown video '" + sample.video_id + "'");
  }
  if (sample.ground_truth_refs.empty()) {
    throw PreconditionError("sample " + sample.id() + " has no ground truth");
  }

  CandidateSet cs;
  cs.sample_id = sample.id();
  std::unordered_set<std::string> present;
  auto add = [&](std::string text, const Tokens& tokens, Category cat) {
    if (present.insert(text).second) {
      cs.entries.push_back({std::move(text), tokens, cat});
      return true;
    }
    return false;
  };

  for (std::size_t ref : sample.ground_truth_refs) {
    if (cs.entries.size() >= CandidateSet::kMaxCorrect) break;
    const auto& c = video->comments.at(ref);
    add(normalize_whitespace(c.raw_text), c.tokens, Category::kCorrect);
  }

  Tokens query;
  if (query_source == QuerySource::kTitle) {
    query = tokenize(video->title);
  } else {
    for (std::size_t ref : sample.context_refs) {
      const auto& t = video->comments.at(ref).tokens;
      query.insert(query.end(), t.begin(), t.end());
    }
  }
  for (const auto& hit : pool.index.query_similar(query, CandidateSet::kPlausible, present)) {
    const auto& d = pool.index.doc(hit.doc_id);
    add(d.text, d.tokens, Category::kPlausible);
  }

  std::size_t n_popular = 0;
  for (const auto& text : pool.popular.texts) {
    if (n_popular >= std::min(pool.popular_k, CandidateSet::kPopular)) break;
    if (present.contains(text)) continue;
    const auto it = pool.doc_of_text.find(text);
    const Tokens tokens =
        it == pool.doc_of_text.end() ? tokenize(text) : pool.index.doc(it->second).tokens;
    add(text, tokens, Category::kPopular);
    ++n_popular;
  }

  // Lazy Fisher-Yates over the distinct training texts.
  Rng rng(seed);
  const std::size_t n = pool.index.size();
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&](std::size_t i) {
    const auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  for (std::size_t i = 0; i < n && cs.entries.size() < CandidateSet::kSize; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    const std::size_t pick = at(j);
    swapped[j] = at(i);
    const auto& d = pool.index.doc(pick);
    add(d.text, d.tokens, Category::kRandom);
  }
  if (cs.entries.size() < CandidateSet::kSize) {
    const std::size_t deficit = CandidateSet::kSize - cs.entries.size();
    throw ConstructionError(deficit, "candidate set for " + cs.sample_id + " is short by " +
                                         std::to_string(deficit) +
                                         " unique comments; training pool too small");
  }
  return cs;
}

std::string candidate_set_to_jsonl(const CandidateSet& cs, const EvalSample& sample) {
  nlohmann::ordered_json s;
  s["id"] = cs.sample_id;
  s["video_id"] = sample.video_id;
  s["t"] = sample.t;
  s["frame_refs"] = sample.frame_refs;
  s["context_refs"] = sample.context_refs;
  s["ground_truth_refs"] = sample.ground_truth_refs;
  nlohmann::ordered_json cands = nlohmann::ordered_json::array();
  for (const auto& e : cs.entries) {
    nlohmann::ordered_json c;
    c["text"] = e.text;
    c["cat"] = std::string(to_string(e.category));
    cands.push_back(std::move(c));
  }
  nlohmann::ordered_json j;
  j["sample"] = std::move(s);
  j["candidates"] = std::move(cands);
  return j.dump();
}

}  // namespace alvc
