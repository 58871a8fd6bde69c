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

#include "alvc/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "alvc/error.hpp"
#include "alvc/rng.hpp"

namespace alvc {
namespace {

constexpr std::array kTopics = {"cat",    "guitar", "rocket", "dragon", "pizza", "soccer",
                                "piano",  "robot",  "castle", "ocean",  "train", "forest",
                                "dance",  "chess",  "anime",  "boxing", "baking", "volcano"};
constexpr std::array kSubjects = {"this", "that", "the", "my", "our", "his", "her", "their"};
constexpr std::array kVerbs = {"is", "looks", "seems", "feels", "sounds", "was", "became", "stays"};
constexpr std::array kAdjectives = {"amazing", "cute",  "scary",  "funny",  "huge",
                                    "tiny",    "fast",  "slow",   "loud",   "quiet",
                                    "shiny",   "weird", "lovely", "insane", "perfect"};
constexpr std::array kNoise = {"qz", "blorp", "xx", "wub", "zzk", "frob", "plix", "grum", "vex",
                               "yup", "nah", "hmm", "ooh", "meh", "ack", "zap"};
constexpr std::array kReactions = {"lol", "2333", "哈哈哈哈", "前方高能", "awesome", "wow"};

template <typename A>
const char* pick(Rng& rng, const A& items) {
  return items[rng.below(items.size())];
}

std::string video_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%04zu", i);
  return buf;
}

std::string comment_text(Rng& rng, const std::string& topic, double noise_fraction) {
  const double u = rng.uniform();
  if (u < 0.1) return pick(rng, kReactions);
  if (u < 0.1 + noise_fraction) {
    std::string s;
    const std::size_t n = 4 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) s += ' ';
      s += pick(rng, kNoise);
    }
    return s;
  }
  std::string s = std::string(pick(rng, kSubjects)) + ' ' + topic + ' ' + pick(rng, kVerbs) +
                   ' ' + pick(rng, kAdjectives);
  if (rng.uniform() < 0.3) s += " !";
  return s;
}

Video make_video(Rng& rng, std::size_t index, const SyntheticParams& p) {
  Video v;
  v.video_id = video_id(index);
  // Round-robin topics so every split sees every topic once the corpus is
  // a few times larger than the topic list.
  const std::string topic = kTopics[index % kTopics.size()];
  v.title = "the " + topic + " video part " + std::to_string(index);
  v.duration_s = p.duration_s;
  for (double t = 0.0; t <= p.duration_s + 1e-9; t += p.frame_interval_s) {
    const double tt = std::round(t * 1000.0) / 1000.0;
    v.frames.push_back({tt, stub_features(v.video_id, tt, p.feature_dim)});
  }
  for (std::size_t k = 0; k < p.comments_per_video; ++k) {
    Comment c;
    c.comment_id = v.video_id + "-c" + std::to_string(k);
    c.video_id = v.video_id;
    c.time_s = std::round(rng.uniform(0.0, p.duration_s) * 100.0) / 100.0;
    c.raw_text = comment_text(rng, topic, p.noise_fraction);
    c.tokens = tokenize(c.raw_text);
    v.comments.push_back(std::move(c));
  }
  std::stable_sort(v.comments.begin(), v.comments.end(),
                   [](const Comment& a, const Comment& b) { return a.time_s < b.time_s; });
  return v;
}

Video copy_video(const Video& original, std::size_t index) {
  Video v = original;
  v.video_id = video_id(index);
  for (std::size_t k = 0; k < v.comments.size(); ++k) {
    v.comments[k].comment_id = v.video_id + "-c" + std::to_string(k);
    v.comments[k].video_id = v.video_id;
  }
  return v;
}

}  // namespace

Corpus make_synthetic_corpus(const SyntheticParams& p) {
  if (p.triplicate_groups > p.duplicate_groups) {
    throw PreconditionError("triplicate_groups exceeds duplicate_groups");
  }
  if (p.duplicate_groups > p.n_videos) {
    throw PreconditionError("duplicate_groups exceeds n_videos");
  }
  if (!(p.duration_s > 0.0) || !(p.frame_interval_s > 0.0)) {
    throw PreconditionError("duration_s and frame_interval_s must be positive");
  }
  Rng rng(p.seed);
  Corpus corpus;
  for (std::size_t i = 0; i < p.n_videos; ++i) corpus.videos.push_back(make_video(rng, i, p));
  std::size_t next = p.n_videos;
  for (std::size_t g = 0; g < p.duplicate_groups; ++g) {
    const std::size_t copies = g < p.triplicate_groups ? 2 : 1;
    for (std::size_t c = 0; c < copies; ++c) {
      corpus.videos.push_back(copy_video(corpus.videos[g], next++));
    }
  }
  return corpus;
}

}  // namespace alvc
