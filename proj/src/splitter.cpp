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

#include "alvc/splitter.hpp"

#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "alvc/error.hpp"
#include "alvc/rng.hpp"
#include "alvc/text.hpp"
#include "json.hpp"

namespace alvc {

std::string title_key(std::string_view title) { return normalize_whitespace(title); }

std::vector<DuplicateGroup> find_duplicate_videos(const Corpus& corpus) {
  std::map<std::string, std::vector<std::string>> by_key;
  for (const auto& v : corpus.videos) by_key[title_key(v.title)].push_back(v.video_id);
  std::vector<DuplicateGroup> groups;
  for (auto& [key, ids] : by_key) {
    if (ids.size() >= 2) groups.push_back({key, std::move(ids)});
  }
  return groups;
}

std::size_t redundant_video_count(const std::vector<DuplicateGroup>& groups) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.member_video_ids.size() - 1;
  return n;
}

Corpus dedup(const Corpus& corpus) {
  Corpus out;
  out.split_tag = corpus.split_tag;
  std::unordered_set<std::string> seen;
  for (const auto& v : corpus.videos) {
    if (seen.insert(title_key(v.title)).second) out.videos.push_back(v);
  }
  return out;
}

SplitAssignment split(const Corpus& corpus, std::size_t n_train, std::size_t n_dev,
                      std::size_t n_test, std::uint64_t seed) {
  if (n_train + n_dev + n_test != corpus.videos.size()) {
    throw SizeError("split sizes " + std::to_string(n_train) + "+" + std::to_string(n_dev) +
                    "+" + std::to_string(n_test) + " do not sum to " +
                    std::to_string(corpus.videos.size()) + " videos");
  }
  if (const auto groups = find_duplicate_videos(corpus); !groups.empty()) {
    throw PreconditionError("corpus has " + std::to_string(groups.size()) +
                            " duplicate-title groups; run dedup before split");
  }
  std::vector<std::string> ids;
  ids.reserve(corpus.videos.size());
  for (const auto& v : corpus.videos) ids.push_back(v.video_id);
  Rng rng(seed);
  rng.shuffle(ids);

  SplitAssignment a;
  a.seed = seed;
  const auto b0 = ids.begin();
  const auto b1 = b0 + static_cast<std::ptrdiff_t>(n_train);
  const auto b2 = b1 + static_cast<std::ptrdiff_t>(n_dev);
  a.train.assign(b0, b1);
  a.dev.assign(b1, b2);
  a.test.assign(b2, ids.end());
  return a;
}

Corpus select(const Corpus& corpus, const std::vector<std::string>& ids, SplitTag tag) {
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  Corpus out;
  out.split_tag = tag;
  for (const auto& v : corpus.videos) {
    if (wanted.contains(v.video_id)) out.videos.push_back(v);
  }
  if (out.videos.size() != wanted.size()) {
    throw IntegrityError("split references video ids missing from the corpus");
  }
  return out;
}

std::string split_to_json(const SplitAssignment& a) {
  nlohmann::ordered_json j;
  j["seed"] = a.seed;
  j["train"] = a.train;
  j["dev"] = a.dev;
  j["test"] = a.test;
  return j.dump();
}

SplitAssignment split_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SplitAssignment a;
  a.seed = j.at("seed").get<std::uint64_t>();
  a.train = j.at("train").get<std::vector<std::string>>();
  a.dev = j.at("dev").get<std::vector<std::string>>();
  a.test = j.at("test").get<std::vector<std::string>>();
  return a;
}

OverlapReport cross_split_overlap(const Corpus& train, const Corpus& test,
                                  std::size_t max_examples) {
  std::unordered_set<std::string> train_texts;
  for (const auto& v : train.videos) {
    for (const auto& c : v.comments) train_texts.insert(normalize_whitespace(c.raw_text));
  }
  OverlapReport r;
  std::unordered_set<std::string> sampled;
  for (const auto& v : test.videos) {
    for (const auto& c : v.comments) {
      ++r.n_test_comments;
      auto text = normalize_whitespace(c.raw_text);
      if (!train_texts.contains(text)) continue;
      ++r.n_overlapping;
      if (r.examples.size() < max_examples && sampled.insert(text).second) {
        r.examples.push_back(std::move(text));
      }
    }
  }
  return r;
}

void write_overlap_tsv(std::ostream& os, const OverlapReport& r) {
  os << "n_test_comments\tn_overlapping\tfraction\n";
  const double frac = r.n_test_comments == 0
                          ? 0.0
                          : static_cast<double>(r.n_overlapping) /
                                static_cast<double>(r.n_test_comments);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", frac);
  os << r.n_test_comments << '\t' << r.n_overlapping << '\t' << buf << '\n';
  for (const auto& e : r.examples) os << "# example\t" << e << '\n';
}

}  // namespace alvc
