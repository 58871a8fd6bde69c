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

#include <set>
#include <sstream>

#include "alvc/error.hpp"
#include "alvc/splitter.hpp"
#include "alvc/synthetic.hpp"

namespace alvc {
namespace {

TEST(Synthetic, ShapeAndValidity) {
  SyntheticParams p;
  p.n_videos = 12;
  p.comments_per_video = 9;
  p.feature_dim = 5;
  p.duration_s = 7;
  const Corpus c = make_synthetic_corpus(p);
  EXPECT_NO_THROW(validate(c));
  ASSERT_EQ(c.videos.size(), 12u);
  std::set<std::string> ids;
  for (const auto& v : c.videos) {
    ids.insert(v.video_id);
    EXPECT_EQ(v.comments.size(), 9u);
    EXPECT_EQ(v.frames.size(), 8u);
    for (const auto& f : v.frames) EXPECT_EQ(f.vector.size(), 5u);
    for (const auto& cm : v.comments) {
      EXPECT_GE(cm.time_s, 0.0);
      EXPECT_LE(cm.time_s, 7.0);
      EXPECT_FALSE(cm.tokens.empty());
    }
  }
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_TRUE(find_duplicate_videos(c).empty());
}

TEST(Synthetic, PlantedDuplicates) {
  SyntheticParams p;
  p.n_videos = 20;
  p.comments_per_video = 3;
  p.duplicate_groups = 6;
  p.triplicate_groups = 2;
  const Corpus c = make_synthetic_corpus(p);
  EXPECT_EQ(c.videos.size(), 20u + 6u + 2u);
  const auto groups = find_duplicate_videos(c);
  EXPECT_EQ(groups.size(), 6u);
  EXPECT_EQ(redundant_video_count(groups), 8u);
  EXPECT_EQ(dedup(c).videos.size(), 20u);
}

TEST(Synthetic, Deterministic) {
  SyntheticParams p;
  p.n_videos = 5;
  std::ostringstream a, b, d;
  write_corpus(make_synthetic_corpus(p), a);
  write_corpus(make_synthetic_corpus(p), b);
  p.seed = 2;
  write_corpus(make_synthetic_corpus(p), d);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), d.str());
}

TEST(Synthetic, Errors) {
  SyntheticParams p;
  p.n_videos = 3;
  p.duplicate_groups = 4;
  EXPECT_THROW(make_synthetic_corpus(p), PreconditionError);
  p.duplicate_groups = 1;
  p.triplicate_groups = 2;
  EXPECT_THROW(make_synthetic_corpus(p), PreconditionError);
}

}  // namespace
}  // namespace alvc
