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

#include "alvc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_set>

#include "alvc/error.hpp"
#include "alvc/rng.hpp"
#include "alvc/splitter.hpp"

namespace alvc {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(InputMask m) {
  switch (m) {
    case InputMask::kTextOnly:
      return "text_only";
    case InputMask::kVisualOnly:
      return "visual_only";
    case InputMask::kTextVisual:
      return "text_visual";
  }
  return "text_visual";
}

InputMask input_mask_from_string(std::string_view s) {
  if (s == "text_only") return InputMask::kTextOnly;
  if (s == "visual_only") return InputMask::kVisualOnly;
  if (s == "text_visual") return InputMask::kTextVisual;
  throw PreconditionError("unknown input mask '" + std::string(s) + "'");
}

std::string_view to_string(DatasetMode m) { return m == DatasetMode::kDedup ? "dedup" : "provided"; }

DatasetMode dataset_mode_from_string(std::string_view s) {
  if (s == "provided") return DatasetMode::kProvided;
  if (s == "dedup") return DatasetMode::kDedup;
  throw PreconditionError("unknown dataset mode '" + std::string(s) + "'");
}

std::string_view to_string(ScorerKind k) {
  return k == ScorerKind::kTransformer ? "transformer" : "ngram";
}

ScorerKind scorer_kind_from_string(std::string_view s) {
  if (s == "ngram") return ScorerKind::kNgram;
  if (s == "transformer") return ScorerKind::kTransformer;
  throw PreconditionError("unknown scorer '" + std::string(s) + "'");
}

namespace {

template <typename E>
std::vector<std::string> names(const std::vector<E>& values) {
  std::vector<std::string> out;
  for (E v : values) out.emplace_back(to_string(v));
  return out;
}

template <typename E, typename F>
std::vector<E> parse_list(const json& j, F from_string) {
  std::vector<E> out;
  for (const auto& s : j) out.push_back(from_string(s.template get<std::string>()));
  return out;
}

void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw PreconditionError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw PreconditionError("unknown config key '" + std::string(where) + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ordered_json interval_json(const Estimate& e) {
  ordered_json j;
  j["value"] = e.value;
  j["low"] = e.ci.low;
  j["high"] = e.ci.high;
  j["half_width"] = e.ci.half_width;
  j["degenerate"] = e.ci.degenerate;
  return j;
}

template <typename T>
std::vector<T> unique_in_order(const std::vector<T>& v) {
  std::vector<T> out;
  for (const T& x : v) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

}  // namespace

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["raw_path"] = c.raw_path;
  j["train_path"] = c.train_path;
  j["dev_path"] = c.dev_path;
  j["test_path"] = c.test_path;
  j["dataset"] = to_string(c.dataset);
  j["split"] = {{"train", c.split_train}, {"dev", c.split_dev}, {"test", c.split_test}};
  j["samples"] = {{"m", c.samples.m},
                  {"n", c.samples.n},
                  {"g", c.samples.g},
                  {"gt_window_s", c.samples.gt_window_s},
                  {"stride_s", c.samples.stride_s}};
  j["max_samples"] = c.max_samples;
  j["vocab_size"] = c.vocab_size;
  j["max_context_tokens"] = c.max_context_tokens;
  j["scorer"] = to_string(c.scorer);
  j["model_path"] = c.model_path;
  j["ngram_alpha"] = c.ngram_alpha;
  j["model"] = {{"d_model", c.model.d_model},     {"n_heads", c.model.n_heads},
                {"n_layers", c.model.n_layers},   {"d_ff", c.model.d_ff},
                {"dropout", c.model.dropout},     {"max_target", c.model.max_target}};
  j["optimizer"] = {{"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon},
                    {"learning_rate", c.optimizer.learning_rate},
                    {"batch_size", c.optimizer.batch_size}};
  j["epochs"] = c.epochs;
  j["aggregation"] = to_string(c.aggregation);
  j["direction"] = to_string(c.direction);
  j["query_source"] = to_string(c.query_source);
  j["mask"] = to_string(c.mask);
  j["include_masked"] = c.include_masked;
  j["recall_mode"] = to_string(c.recall_mode);
  j["rank_mode"] = to_string(c.rank_mode);
  j["seed"] = c.seed;
  j["matrix"] = {{"aggregations", names(c.matrix_aggregations)},
                 {"directions", names(c.matrix_directions)},
                 {"query_sources", names(c.matrix_query_sources)},
                 {"masks", names(c.matrix_masks)},
                 {"datasets", names(c.matrix_datasets)}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, "",
             {"raw_path", "train_path", "dev_path", "test_path", "dataset", "split", "samples",
              "max_samples", "vocab_size", "max_context_tokens", "scorer", "model_path",
              "ngram_alpha", "model", "optimizer", "epochs", "aggregation", "direction",
              "query_source", "mask", "include_masked", "recall_mode", "rank_mode", "seed",
              "matrix"});
  ExperimentConfig c;
  try {
    read(j, "raw_path", c.raw_path);
    read(j, "train_path", c.train_path);
    read(j, "dev_path", c.dev_path);
    read(j, "test_path", c.test_path);
    if (j.contains("dataset")) c.dataset = dataset_mode_from_string(j["dataset"].get<std::string>());
    if (j.contains("split")) {
      const auto& s = j["split"];
      check_keys(s, "split.", {"train", "dev", "test"});
      read(s, "train", c.split_train);
      read(s, "dev", c.split_dev);
      read(s, "test", c.split_test);
    }
    if (j.contains("samples")) {
      const auto& s = j["samples"];
      check_keys(s, "samples.", {"m", "n", "g", "gt_window_s", "stride_s"});
      read(s, "m", c.samples.m);
      read(s, "n", c.samples.n);
      read(s, "g", c.samples.g);
      read(s, "gt_window_s", c.samples.gt_window_s);
      read(s, "stride_s", c.samples.stride_s);
    }
    read(j, "max_samples", c.max_samples);
    read(j, "vocab_size", c.vocab_size);
    read(j, "max_context_tokens", c.max_context_tokens);
    if (j.contains("scorer")) c.scorer = scorer_kind_from_string(j["scorer"].get<std::string>());
    read(j, "model_path", c.model_path);
    read(j, "ngram_alpha", c.ngram_alpha);
    if (j.contains("model")) {
      const auto& m = j["model"];
      check_keys(m, "model.", {"d_model", "n_heads", "n_layers", "d_ff", "dropout", "max_target"});
      read(m, "d_model", c.model.d_model);
      read(m, "n_heads", c.model.n_heads);
      read(m, "n_layers", c.model.n_layers);
      read(m, "d_ff", c.model.d_ff);
      read(m, "dropout", c.model.dropout);
      read(m, "max_target", c.model.max_target);
    }
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      check_keys(o, "optimizer.", {"beta1", "beta2", "epsilon", "learning_rate", "batch_size"});
      read(o, "beta1", c.optimizer.beta1);
      read(o, "beta2", c.optimizer.beta2);
      read(o, "epsilon", c.optimizer.epsilon);
      read(o, "learning_rate", c.optimizer.learning_rate);
      read(o, "batch_size", c.optimizer.batch_size);
    }
    read(j, "epochs", c.epochs);
    if (j.contains("aggregation")) {
      c.aggregation = aggregation_from_string(j["aggregation"].get<std::string>());
    }
    if (j.contains("direction")) {
      c.direction = direction_from_string(j["direction"].get<std::string>());
    }
    if (j.contains("query_source")) {
      c.query_source = query_source_from_string(j["query_source"].get<std::string>());
    }
    if (j.contains("mask")) c.mask = input_mask_from_string(j["mask"].get<std::string>());
    read(j, "include_masked", c.include_masked);
    if (j.contains("recall_mode")) {
      c.recall_mode = recall_mode_from_string(j["recall_mode"].get<std::string>());
    }
    if (j.contains("rank_mode")) c.rank_mode = rank_mode_from_string(j["rank_mode"].get<std::string>());
    read(j, "seed", c.seed);
    if (j.contains("matrix")) {
      const auto& m = j["matrix"];
      check_keys(m, "matrix.", {"aggregations", "directions", "query_sources", "masks", "datasets"});
      if (m.contains("aggregations")) {
        c.matrix_aggregations = parse_list<Aggregation>(
            m["aggregations"], [](const std::string& s) { return aggregation_from_string(s); });
      }
      if (m.contains("directions")) {
        c.matrix_directions = parse_list<Direction>(
            m["directions"], [](const std::string& s) { return direction_from_string(s); });
      }
      if (m.contains("query_sources")) {
        c.matrix_query_sources = parse_list<QuerySource>(
            m["query_sources"], [](const std::string& s) { return query_source_from_string(s); });
      }
      if (m.contains("masks")) {
        c.matrix_masks = parse_list<InputMask>(
            m["masks"], [](const std::string& s) { return input_mask_from_string(s); });
      }
      if (m.contains("datasets")) {
        c.matrix_datasets = parse_list<DatasetMode>(
            m["datasets"], [](const std::string& s) { return dataset_mode_from_string(s); });
      }
    }
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw PreconditionError(path.string() + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // Relative data paths are taken relative to the config file.
  const auto base = path.parent_path();
  for (std::string* p : {&c.raw_path, &c.train_path, &c.dev_path, &c.test_path, &c.model_path}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
  }
  return c;
}

SampleInputs mask_inputs(SampleInputs inputs, InputMask mode) {
  if (mode == InputMask::kTextOnly) {
    for (auto& f : inputs.frames) std::fill(f.begin(), f.end(), 0.0f);
  } else if (mode == InputMask::kVisualOnly) {
    std::fill(inputs.context_ids.begin(), inputs.context_ids.end(), Specials::kPad);
  }
  return inputs;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("ALVC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

DataSplits apply_dataset_mode(DataSplits splits, DatasetMode mode) {
  if (mode == DatasetMode::kProvided) return splits;
  const auto train_tag = splits.train.split_tag;
  splits.train = dedup(splits.train);
  splits.train.split_tag = train_tag;
  std::unordered_set<std::string> train_titles;
  for (const auto& v : splits.train.videos) train_titles.insert(title_key(v.title));
  for (Corpus* held_out : {&splits.dev, &splits.test}) {
    const auto tag = held_out->split_tag;
    Corpus kept = dedup(*held_out);
    std::erase_if(kept.videos,
                  [&](const Video& v) { return train_titles.count(title_key(v.title)) > 0; });
    kept.split_tag = tag;
    *held_out = std::move(kept);
  }
  return splits;
}

DataSplits load_splits(const ExperimentConfig& c, DatasetMode mode) {
  if (c.train_path.empty() || c.test_path.empty()) {
    throw PreconditionError("config needs train_path and test_path");
  }
  DataSplits d;
  d.train = load_corpus(c.train_path);
  d.train.split_tag = SplitTag::kTrain;
  if (!c.dev_path.empty()) {
    d.dev = load_corpus(c.dev_path);
    d.dev.split_tag = SplitTag::kDev;
  }
  d.test = load_corpus(c.test_path);
  d.test.split_tag = SplitTag::kTest;
  return apply_dataset_mode(std::move(d), mode);
}

ScoredSamples score_samples(const Scorer& scorer, const Vocab& vocab, const DataSplits& data,
                            const ExperimentConfig& c, QuerySource query_source, InputMask mask,
                            std::size_t threads) {
  const CandidatePool pool(data.train);
  ScoredSamples out;
  out.samples = build_samples(data.test, c.samples);
  if (c.max_samples > 0 && out.samples.size() > c.max_samples) out.samples.resize(c.max_samples);
  if (out.samples.empty()) throw PreconditionError("test split yields no evaluation samples");
  const std::size_t n = out.samples.size();
  out.candidates.resize(n);
  out.losses.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& s = out.samples[i];
    const Video* video = data.test.find(s.video_id);
    auto cs = build_candidate_set(s, data.test, pool, query_source, derive_seed(c.seed, i));
    const auto inputs = mask_inputs(resolve_inputs(*video, s, vocab, c.max_context_tokens), mask);
    std::vector<Tokens> texts;
    texts.reserve(cs.entries.size());
    for (const auto& e : cs.entries) texts.push_back(e.tokens);
    out.losses[i] = scorer.score_batch(inputs, texts);
    out.candidates[i] = std::move(cs);
  });
  return out;
}

std::vector<ScoredRanking> rank_samples(const ScoredSamples& s, Aggregation aggregation,
                                        Direction direction, bool include_masked) {
  std::vector<ScoredRanking> out;
  out.reserve(s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    const auto& cs = s.candidates[i];
    const auto& losses = s.losses[i];
    std::vector<double> scores(losses.size());
    bool truncated = false;
    for (std::size_t k = 0; k < losses.size(); ++k) {
      try {
        scores[k] = aggregate(losses[k], aggregation, include_masked);
      } catch (const ScoringError& e) {
        throw ScoringError(cs.sample_id + " candidate " + std::to_string(k) + ": " + e.what());
      }
      truncated = truncated || losses[k].truncated;
    }
    ScoredRanking r = rank_candidates(scores, direction);
    r.sample_id = cs.sample_id;
    r.aggregation = aggregation;
    r.any_truncated = truncated;
    for (const auto& e : cs.entries) r.categories.push_back(e.category);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::size_t feature_dim_of(const Corpus& corpus) {
  for (const auto& v : corpus.videos) {
    if (!v.frames.empty()) return v.frames.front().vector.size();
  }
  throw PreconditionError("training corpus has no frame features");
}

std::string file_format(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open model " + path);
  const auto j = json::parse(is);
  return j.value("format", "");
}

}  // namespace

TrainedScorer make_scorer(const ExperimentConfig& c, const Corpus& train) {
  TrainedScorer out;
  if (!c.model_path.empty()) {
    const auto format = file_format(c.model_path);
    if (c.scorer == ScorerKind::kNgram) {
      if (format != "alvc-bigram-v1") throw PreconditionError(c.model_path + " is not a bigram model");
      auto s = std::make_unique<NgramScorer>(NgramScorer::load(c.model_path));
      out.vocab = s->vocab();
      out.scorer = std::move(s);
    } else {
      auto ck = load_checkpoint(c.model_path);
      out.vocab = ck.vocab;
      out.scorer = std::make_unique<TransformerScorer>(std::move(ck.model), std::move(ck.vocab));
    }
    return out;
  }
  out.vocab = build_vocab(train, c.vocab_size);
  if (c.scorer == ScorerKind::kNgram) {
    out.scorer = std::make_unique<NgramScorer>(train_ngram(train, out.vocab, 2, c.ngram_alpha));
    return out;
  }
  const ModelConfig mc = resolve_model_config(c, train, out.vocab);
  const auto examples = make_training_examples(train, out.vocab, c.samples, mc);
  auto result = alvc::train(init_model(mc, derive_seed(c.seed, 1)), examples, c.optimizer, c.epochs,
                            derive_seed(c.seed, 2));
  out.scorer = std::make_unique<TransformerScorer>(std::move(result.model), out.vocab);
  return out;
}

ModelConfig resolve_model_config(const ExperimentConfig& c, const Corpus& train,
                                 const Vocab& vocab) {
  ModelConfig mc = c.model;
  mc.vocab_size = vocab.size();
  mc.feature_dim = feature_dim_of(train);
  mc.max_frames = c.samples.m;
  mc.max_context = c.max_context_tokens;
  return mc;
}

EvaluationOutput run_evaluation(const ExperimentConfig& c, std::size_t threads) {
  const auto data = load_splits(c, c.dataset);
  const auto ts = make_scorer(c, data.train);
  const auto scored = score_samples(*ts.scorer, ts.vocab, data, c, c.query_source, c.mask, threads);
  EvaluationOutput out;
  out.rankings = rank_samples(scored, c.aggregation, c.direction, c.include_masked);
  out.report = evaluate(out.rankings, c.recall_mode, c.rank_mode);
  return out;
}

std::vector<MatrixRow> run_matrix(const ExperimentConfig& c, std::size_t threads) {
  std::vector<MatrixRow> rows;
  for (DatasetMode dataset : unique_in_order(c.matrix_datasets)) {
    const auto data = load_splits(c, dataset);
    const auto ts = make_scorer(c, data.train);
    for (QuerySource qs : unique_in_order(c.matrix_query_sources)) {
      for (InputMask mask : unique_in_order(c.matrix_masks)) {
        const auto scored = score_samples(*ts.scorer, ts.vocab, data, c, qs, mask, threads);
        for (Aggregation agg : unique_in_order(c.matrix_aggregations)) {
          for (Direction dir : unique_in_order(c.matrix_directions)) {
            const auto rankings = rank_samples(scored, agg, dir, c.include_masked);
            rows.push_back({dataset, qs, mask, agg, dir, evaluate(rankings, c.recall_mode, c.rank_mode)});
          }
        }
      }
    }
  }
  return rows;
}

ordered_json report_to_json(const MetricReport& r) {
  ordered_json j;
  j["n_samples"] = r.n_samples;
  j["recall_mode"] = to_string(r.recall_mode);
  j["rank_mode"] = to_string(r.rank_mode);
  ordered_json recall;
  for (std::size_t i = 0; i < MetricReport::kRecallKs.size(); ++i) {
    recall[std::to_string(MetricReport::kRecallKs[i])] = interval_json(r.recall_at[i]);
  }
  j["recall"] = std::move(recall);
  j["mr"] = interval_json(r.mr);
  j["mrr"] = interval_json(r.mrr);
  return j;
}

void write_report_tsv(std::ostream& os, const ExperimentConfig& c, const MetricReport& r) {
  os << "# config: " << config_to_json(c).dump() << '\n';
  os << metric_tsv_header() << '\n' << metric_tsv_cells(r) << '\n';
}

void write_matrix_tsv(std::ostream& os, const ExperimentConfig& c,
                      const std::vector<MatrixRow>& rows) {
  os << "# config: " << config_to_json(c).dump() << '\n';
  os << "dataset\tquery_source\tmask\taggregation\tdirection\t" << metric_tsv_header() << '\n';
  for (const auto& row : rows) {
    os << to_string(row.dataset) << '\t' << to_string(row.query_source) << '\t'
       << to_string(row.mask) << '\t' << to_string(row.aggregation) << '\t'
       << to_string(row.direction) << '\t' << metric_tsv_cells(row.report) << '\n';
  }
}

ordered_json matrix_to_json(const ExperimentConfig& c, const std::vector<MatrixRow>& rows) {
  ordered_json j;
  j["config"] = config_to_json(c);
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["dataset"] = to_string(row.dataset);
    r["query_source"] = to_string(row.query_source);
    r["mask"] = to_string(row.mask);
    r["aggregation"] = to_string(row.aggregation);
    r["direction"] = to_string(row.direction);
    r["report"] = report_to_json(row.report);
    out.push_back(std::move(r));
  }
  j["rows"] = std::move(out);
  return j;
}

}  // namespace alvc
