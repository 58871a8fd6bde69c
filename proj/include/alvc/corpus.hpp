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

// Data model for videos, time-tagged comments and frame features, plus the
// evaluation-sample construction around a time-stamp.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alvc/text.hpp"

namespace alvc {

struct Comment {
  std::string comment_id;
  std::string video_id;
  double time_s = 0.0;
  Tokens tokens;
  std::string raw_text;

  bool operator==(const Comment&) const = default;
};

struct FrameFeature {
  double time_s = 0.0;
  std::vector<float> vector;

  bool operator==(const FrameFeature&) const = default;
};

struct Video {
  std::string video_id;
  std::string title;
  double duration_s = 0.0;
  std::vector<FrameFeature> frames;
  std::vector<Comment> comments;

  bool operator==(const Video&) const = default;
};

enum class SplitTag { kTrain, kDev, kTest };

std::string_view to_string(SplitTag tag);
SplitTag split_tag_from_string(std::string_view s);

struct Corpus {
  std::vector<Video> videos;
  std::optional<SplitTag> split_tag;

  std::size_t comment_count() const;
  const Video* find(std::string_view video_id) const;

  bool operator==(const Corpus&) const = default;
};

inline constexpr std::string_view kSchemaV1 = "v1";

/// Reads one video per JSONL line. Blank lines are skipped. Comments are
/// stably sorted by time; frames must already be strictly increasing.
/// Throws ParseError (with line number) or IntegrityError.
Corpus load_corpus(const std::filesystem::path& path,
                   std::string_view schema_version = kSchemaV1);
Corpus read_corpus(std::istream& is, std::string_view schema_version = kSchemaV1);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& os);

/// Checks every type invariant; throws IntegrityError on the first violation.
void validate(const Corpus& corpus);

struct CorpusStats {
  std::size_t n_videos = 0;
  std::size_t n_comments = 0;
  std::size_t n_words = 0;
  /// Unrounded total, kept so that stats add across disjoint corpora.
  double total_duration_s = 0.0;
  /// Set when there are no comments and avg_words is reported as 0.
  bool empty_warning = false;

  /// n_words / n_comments rounded to 2 decimals.
  double avg_words() const;
  /// Sum of durations in hours rounded to 2 decimals.
  double total_duration_hrs() const;

  CorpusStats& operator+=(const CorpusStats& other);
};

CorpusStats corpus_stats(const Corpus& corpus);

/// Named columns, e.g. {"Train", stats}, ... A "Total" column is appended.
/// Row names follow the Livebot statistics table.
void write_stats_tsv(
    std::ostream& os,
    const std::vector<std::pair<std::string, CorpusStats>>& columns);

struct EvalSample {
  std::string video_id;
  double t = 0.0;
  /// Indices into Video::frames, ascending.
  std::vector<std::size_t> frame_refs;
  /// Indices into Video::comments, ascending.
  std::vector<std::size_t> context_refs;
  /// Indices into Video::comments, ascending.
  std::vector<std::size_t> ground_truth_refs;

  /// "<video_id>@<t>" with t printed to millisecond precision.
  std::string id() const;

  bool operator==(const EvalSample&) const = default;
};

struct SampleParams {
  std::size_t m = 5;  // frames
  std::size_t n = 5;  // context comments
  std::size_t g = 5;  // ground truths
  double gt_window_s = 1.0;
  double stride_s = 1.0;

  bool operator==(const SampleParams&) const = default;
};

/// One sample per grid time t = k * stride_s (0 <= t <= duration) that has at
/// least one comment within gt_window_s. Nearness ties go to the earlier
/// time, then the lower comment_id.
std::vector<EvalSample> build_samples(const Corpus& corpus,
                                      const SampleParams& params);
std::vector<EvalSample> build_samples(const Video& video,
                                      const SampleParams& params);

/// Deterministic placeholder for CNN features: values in [0, 1) seeded by
/// hash(video_id, time).
std::vector<float> stub_features(std::string_view video_id, double time_s,
                                 std::size_t dim);

inline constexpr std::size_t kDefaultFeatureDim = 512;

}  // namespace alvc
