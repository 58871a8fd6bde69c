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

#include "alvc/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "alvc/error.hpp"
#include "alvc/rng.hpp"
#include "json.hpp"

namespace alvc {

using nlohmann::json;

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain:
      return "train";
    case SplitTag::kDev:
      return "dev";
    case SplitTag::kTest:
      return "test";
  }
  return "train";
}

SplitTag split_tag_from_string(std::string_view s) {
  if (s == "train") return SplitTag::kTrain;
  if (s == "dev") return SplitTag::kDev;
  if (s == "test") return SplitTag::kTest;
  throw PreconditionError("unknown split tag '" + std::string(s) + "'");
}

std::size_t Corpus::comment_count() const {
  std::size_t n = 0;
  for (const auto& v : videos) n += v.comments.size();
  return n;
}

const Video* Corpus::find(std::string_view video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return &v;
  }
  return nullptr;
}

namespace {

void validate_video(const Video& v) {
  const std::string where = "video '" + v.video_id + "': ";
  if (v.video_id.empty()) throw IntegrityError("empty video_id");
  if (!(v.duration_s > 0.0) || !std::isfinite(v.duration_s)) {
    throw IntegrityError(where + "duration_s must be positive");
  }
  for (std::size_t i = 0; i < v.frames.size(); ++i) {
    const auto& f = v.frames[i];
    if (i > 0 && !(f.time_s > v.frames[i - 1].time_s)) {
      throw IntegrityError(where + "frame times not strictly increasing at frame " +
                           std::to_string(i));
    }
    if (f.vector.size() != v.frames.front().vector.size()) {
      throw IntegrityError(where + "frame " + std::to_string(i) +
                           " has feature length " + std::to_string(f.vector.size()) +
                           ", expected " +
                           std::to_string(v.frames.front().vector.size()));
    }
  }
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < v.comments.size(); ++i) {
    const auto& c = v.comments[i];
    if (!ids.insert(c.comment_id).second) {
      throw IntegrityError(where + "duplicate comment id '" + c.comment_id + "'");
    }
    if (c.video_id != v.video_id) {
      throw IntegrityError(where + "comment '" + c.comment_id +
                           "' references another video");
    }
    if (c.time_s < 0.0 || c.time_s > v.duration_s) {
      throw IntegrityError(where + "comment '" + c.comment_id +
                           "' time outside [0, duration]");
    }
    if (i > 0 && c.time_s < v.comments[i - 1].time_s) {
      throw IntegrityError(where + "comments not sorted by time");
    }
    if (c.raw_text.empty()) {
      throw IntegrityError(where + "comment '" + c.comment_id + "' has empty text");
    }
    if (c.tokens.empty()) {
      throw IntegrityError(where + "comment '" + c.comment_id + "' has no tokens");
    }
  }
}

Video parse_video(const json& j) {
  Video v;
  v.video_id = j.at("video_id").get<std::string>();
  v.title = j.at("title").get<std::string>();
  v.duration_s = j.at("duration_s").get<double>();
  if (const auto it = j.find("frames"); it != j.end()) {
    for (const auto& f : *it) {
      FrameFeature frame;
      frame.time_s = f.at("t").get<double>();
      const auto& feat = f.at("feat");
      frame.vector.reserve(feat.size());
      for (const auto& x : feat) frame.vector.push_back(static_cast<float>(x.get<double>()));
      v.frames.push_back(std::move(frame));
    }
  }
  if (const auto it = j.find("comments"); it != j.end()) {
    for (const auto& c : *it) {
      Comment comment;
      comment.comment_id = c.at("id").get<std::string>();
      comment.video_id = v.video_id;
      comment.time_s = c.at("t").get<double>();
      comment.raw_text = c.at("text").get<std::string>();
      if (const auto tok = c.find("tokens"); tok != c.end()) {
        comment.tokens = tok->get<Tokens>();
      } else {
        comment.tokens = tokenize(comment.raw_text);
      }
      v.comments.push_back(std::move(comment));
    }
  }
  std::stable_sort(v.comments.begin(), v.comments.end(),
                   [](const Comment& a, const Comment& b) { return a.time_s < b.time_s; });
  return v;
}

json video_to_json(const Video& v) {
  json frames = json::array();
  for (const auto& f : v.frames) {
    json feat = json::array();
    for (float x : f.vector) feat.push_back(static_cast<double>(x));
    frames.push_back({{"t", f.time_s}, {"feat", std::move(feat)}});
  }
  json comments = json::array();
  for (const auto& c : v.comments) {
    comments.push_back(
        {{"id", c.comment_id}, {"t", c.time_s}, {"text", c.raw_text}, {"tokens", c.tokens}});
  }
  return {{"video_id", v.video_id},
          {"title", v.title},
          {"duration_s", v.duration_s},
          {"frames", std::move(frames)},
          {"comments", std::move(comments)}};
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

void validate(const Corpus& corpus) {
  std::unordered_set<std::string> ids;
  for (const auto& v : corpus.videos) {
    if (!ids.insert(v.video_id).second) {
      throw IntegrityError("duplicate video_id '" + v.video_id + "'");
    }
    validate_video(v);
  }
}

Corpus read_corpus(std::istream& is, std::string_view schema_version) {
  if (schema_version != kSchemaV1) {
    throw PreconditionError("unsupported corpus schema '" + std::string(schema_version) +
                            "'");
  }
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Video v;
    try {
      v = parse_video(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (!ids.insert(v.video_id).second) {
      throw IntegrityError("line " + std::to_string(line_no) + ": duplicate video_id '" +
                           v.video_id + "'");
    }
    try {
      validate_video(v);
    } catch (const IntegrityError& e) {
      throw IntegrityError("line " + std::to_string(line_no) + ": " + e.what());
    }
    corpus.videos.push_back(std::move(v));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, std::string_view schema_version) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open corpus " + path.string());
  return read_corpus(is, schema_version);
}

void write_corpus(const Corpus& corpus, std::ostream& os) {
  for (const auto& v : corpus.videos) os << video_to_json(v).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_corpus(corpus, os);
}

double CorpusStats::avg_words() const {
  if (n_comments == 0) return 0.0;
  return round2(static_cast<double>(n_words) / static_cast<double>(n_comments));
}

double CorpusStats::total_duration_hrs() const { return round2(total_duration_s / 3600.0); }

CorpusStats& CorpusStats::operator+=(const CorpusStats& other) {
  n_videos += other.n_videos;
  n_comments += other.n_comments;
  n_words += other.n_words;
  total_duration_s += other.total_duration_s;
  empty_warning = n_comments == 0;
  return *this;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.n_videos = corpus.videos.size();
  for (const auto& v : corpus.videos) {
    s.total_duration_s += v.duration_s;
    s.n_comments += v.comments.size();
    for (const auto& c : v.comments) s.n_words += c.tokens.size();
  }
  s.empty_warning = s.n_comments == 0;
  return s;
}

void write_stats_tsv(std::ostream& os,
                     const std::vector<std::pair<std::string, CorpusStats>>& columns) {
  auto cols = columns;
  CorpusStats total;
  for (const auto& [name, s] : columns) total += s;
  cols.emplace_back("Total", total);

  auto fixed2 = [](double x) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << x;
    return ss.str();
  };
  os << "Statistic";
  for (const auto& [name, s] : cols) os << '\t' << name;
  os << '\n';
  os << "#Video";
  for (const auto& [name, s] : cols) os << '\t' << s.n_videos;
  os << "\n#Comment";
  for (const auto& [name, s] : cols) os << '\t' << s.n_comments;
  os << "\n#Word";
  for (const auto& [name, s] : cols) os << '\t' << s.n_words;
  os << "\nAvg. Words";
  for (const auto& [name, s] : cols) os << '\t' << fixed2(s.avg_words());
  os << "\nTotal Duration (hrs)";
  for (const auto& [name, s] : cols) os << '\t' << fixed2(s.total_duration_hrs());
  os << '\n';
}

std::string EvalSample::id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "@%.3f", t);
  return video_id + buf;
}

std::vector<EvalSample> build_samples(const Video& video, const SampleParams& p) {
  if (p.m < 1 || p.n < 1 || p.g < 1) {
    throw PreconditionError("build_samples: m, n and g must be >= 1");
  }
  if (!(p.stride_s > 0.0)) throw PreconditionError("build_samples: stride_s must be > 0");

  std::vector<EvalSample> samples;
  if (video.comments.empty()) return samples;

  const auto& comments = video.comments;
  std::vector<std::size_t> by_near(comments.size());
  std::vector<std::size_t> frames_near(video.frames.size());

  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * p.stride_s;
    if (t > video.duration_s) break;

    std::iota(by_near.begin(), by_near.end(), std::size_t{0});
    std::sort(by_near.begin(), by_near.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(comments[a].time_s - t);
      const double db = std::abs(comments[b].time_s - t);
      if (da != db) return da < db;
      if (comments[a].time_s != comments[b].time_s) {
        return comments[a].time_s < comments[b].time_s;
      }
      return comments[a].comment_id < comments[b].comment_id;
    });

    EvalSample s;
    s.video_id = video.video_id;
    s.t = t;
    std::size_t i = 0;
    for (; i < by_near.size() && s.ground_truth_refs.size() < p.g; ++i) {
      if (std::abs(comments[by_near[i]].time_s - t) > p.gt_window_s) break;
      s.ground_truth_refs.push_back(by_near[i]);
    }
    if (s.ground_truth_refs.empty()) continue;
    for (; i < by_near.size() && s.context_refs.size() < p.n; ++i) {
      s.context_refs.push_back(by_near[i]);
    }

    std::iota(frames_near.begin(), frames_near.end(), std::size_t{0});
    std::sort(frames_near.begin(), frames_near.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(video.frames[a].time_s - t);
      const double db = std::abs(video.frames[b].time_s - t);
      if (da != db) return da < db;
      return a < b;
    });
    s.frame_refs.assign(frames_near.begin(),
                        frames_near.begin() + static_cast<std::ptrdiff_t>(
                                                  std::min(p.m, frames_near.size())));

    std::sort(s.frame_refs.begin(), s.frame_refs.end());
    std::sort(s.context_refs.begin(), s.context_refs.end());
    std::sort(s.ground_truth_refs.begin(), s.ground_truth_refs.end());
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<EvalSample> build_samples(const Corpus& corpus, const SampleParams& params) {
  std::vector<EvalSample> out;
  for (const auto& v : corpus.videos) {
    auto s = build_samples(v, params);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

std::vector<float> stub_features(std::string_view video_id, double time_s, std::size_t dim) {
  Rng rng(derive_seed(hash_string(video_id), std::bit_cast<std::uint64_t>(time_s)));
  std::vector<float> v(dim);
  for (auto& x : v) {
    // 24 bits keeps the float strictly below 1.
    x = static_cast<float>(rng.next() >> 40) * 0x1.0p-24f;
  }
  return v;
}

}  // namespace alvc
