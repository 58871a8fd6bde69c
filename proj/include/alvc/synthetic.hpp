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

// Seeded toy corpora for tests and demos. Videos get a topic; most comments
// are short topical sentences, the rest are noise strings and a few stock
// reactions that dominate the frequency list.

#include <cstddef>
#include <cstdint>

#include "alvc/corpus.hpp"

namespace alvc {

struct SyntheticParams {
  std::size_t n_videos = 40;  // distinct videos, before planted copies
  double duration_s = 20.0;
  std::size_t comments_per_video = 30;
  std::size_t feature_dim = 16;
  double frame_interval_s = 1.0;
  /// Titles shared by two or more videos. The first `triplicate_groups` of
  /// them get two copies, the rest one. Copies repeat the original content.
  std::size_t duplicate_groups = 0;
  std::size_t triplicate_groups = 0;
  double noise_fraction = 0.3;
  std::uint64_t seed = 1;
};

/// Deterministic in `params`. Throws PreconditionError when the duplicate
/// groups need more originals than `n_videos`.
Corpus make_synthetic_corpus(const SyntheticParams& params);

}  // namespace alvc
