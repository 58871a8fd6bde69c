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

// Duplicate-video detection by title, keep-first deduplication, seeded
// train/dev/test splitting and cross-split comment overlap.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "alvc/corpus.hpp"

namespace alvc {

struct DuplicateGroup {
  std::string key;                              // normalized title
  std::vector<std::string> member_video_ids;    // corpus order, size >= 2

  bool operator==(const DuplicateGroup&) const = default;
};

/// Title key: trimmed, whitespace runs collapsed, case preserved.
std::string title_key(std::string_view title);

/// Groups with at least two members, ordered by key bytes.
std::vector<DuplicateGroup> find_duplicate_videos(const Corpus& corpus);

/// Number of videos dedup() would drop (sum of group sizes minus groups).
std::size_t redundant_video_count(const std::vector<DuplicateGroup>& groups);

/// Keeps the first member of each title group.
Corpus dedup(const Corpus& corpus);

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;

  bool operator==(const SplitAssignment&) const = default;
};

/// Seeded shuffle of video ids then partition train/dev/test in that order.
/// Throws SizeError if the counts do not sum to the corpus size and
/// PreconditionError if titles are not unique.
SplitAssignment split(const Corpus& corpus, std::size_t n_train, std::size_t n_dev,
                      std::size_t n_test, std::uint64_t seed);

/// Sub-corpus holding `ids` in corpus order, tagged with `tag`.
Corpus select(const Corpus& corpus, const std::vector<std::string>& ids, SplitTag tag);

std::string split_to_json(const SplitAssignment& a);
SplitAssignment split_from_json(const std::string& text);

struct OverlapReport {
  std::size_t n_test_comments = 0;
  std::size_t n_overlapping = 0;
  std::vector<std::string> examples;
};

/// Counts test comments (as a multiset) whose whitespace-normalized text
/// occurs in the training set. Up to `max_examples` distinct overlapping
/// strings are kept, in test order.
OverlapReport cross_split_overlap(const Corpus& train, const Corpus& test,
                                  std::size_t max_examples = 10);

void write_overlap_tsv(std::ostream& os, const OverlapReport& r);

}  // namespace alvc
