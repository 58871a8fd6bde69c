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

// Small hand-built corpora shared by the test binaries.

#include <string>
#include <vector>

#include "alvc/corpus.hpp"
#include "alvc/text.hpp"

namespace alvc::testing {

inline Comment make_comment(const std::string& video_id, const std::string& id, double t,
                            const std::string& text) {
  return {id, video_id, t, tokenize(text), text};
}

/// Video with frames every second over [0, duration] and the given comments.
inline Video make_video(const std::string& id, const std::string& title, double duration,
                        const std::vector<std::pair<double, std::string>>& comments,
                        std::size_t feature_dim = 4) {
  Video v;
  v.video_id = id;
  v.title = title;
  v.duration_s = duration;
  for (double t = 0.0; t <= duration; t += 1.0) {
    v.frames.push_back({t, stub_features(id, t, feature_dim)});
  }
  for (std::size_t i = 0; i < comments.size(); ++i) {
    v.comments.push_back(make_comment(id, id + "-" + std::to_string(i), comments[i].first,
                                      comments[i].second));
  }
  return v;
}

/// Training corpus with n distinct two-token comments.
inline Corpus numbered_corpus(std::size_t n, const std::string& prefix = "w") {
  Corpus c;
  const double duration = static_cast<double>(n);
  std::vector<std::pair<double, std::string>> comments;
  for (std::size_t i = 0; i < n; ++i) {
    comments.emplace_back(static_cast<double>(i), prefix + " " + prefix + std::to_string(i));
  }
  c.videos.push_back(make_video("train0", "training video", duration, comments));
  return c;
}

}  // namespace alvc::testing
