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

// Pipeline plumbing shared by the command-line tool and the tests: the
// resolved experiment configuration, input masking, and evaluation runs
// over one or many mode combinations.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "alvc/corpus.hpp"
#include "alvc/metrics.hpp"
#include "alvc/neural.hpp"
#include "alvc/retrieval.hpp"
#include "alvc/scoring.hpp"
#include "json.hpp"

namespace alvc {

enum class InputMask { kTextOnly, kVisualOnly, kTextVisual };
std::string_view to_string(InputMask m);
InputMask input_mask_from_string(std::string_view s);

enum class DatasetMode { kProvided, kDedup };
std::string_view to_string(DatasetMode m);
DatasetMode dataset_mode_from_string(std::string_view s);

enum class ScorerKind { kNgram, kTransformer };
std::string_view to_string(ScorerKind k);
ScorerKind scorer_kind_from_string(std::string_view s);

struct ExperimentConfig {
  // Data. raw feeds stats/dedup/split; train/dev/test feed everything else.
  std::string raw_path;
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  DatasetMode dataset = DatasetMode::kProvided;
  std::size_t split_train = 0;
  std::size_t split_dev = 0;
  std::size_t split_test = 0;

  SampleParams samples;
  std::size_t max_samples = 0;  // 0 keeps every test sample
  std::size_t vocab_size = Vocab::kDefaultMaxSize;
  std::size_t max_context_tokens = 64;

  ScorerKind scorer = ScorerKind::kNgram;
  std::string model_path;  // empty: train in-process
  double ngram_alpha = 0.1;
  ModelConfig model;
  OptimizerConfig optimizer;
  std::size_t epochs = 10;

  Aggregation aggregation = Aggregation::kMean;
  Direction direction = Direction::kAscending;
  QuerySource query_source = QuerySource::kTitle;
  InputMask mask = InputMask::kTextVisual;
  bool include_masked = false;
  RecallMode recall_mode = RecallMode::kHit;
  RankMode rank_mode = RankMode::kBest;
  std::uint64_t seed = 0;

  // Axes for the matrix subcommand.
  std::vector<Aggregation> matrix_aggregations = {Aggregation::kSum, Aggregation::kMean};
  std::vector<Direction> matrix_directions = {Direction::kDescending, Direction::kAscending};
  std::vector<QuerySource> matrix_query_sources = {QuerySource::kTitle};
  std::vector<InputMask> matrix_masks = {InputMask::kTextVisual};
  std::vector<DatasetMode> matrix_datasets = {DatasetMode::kProvided};

  bool operator==(const ExperimentConfig&) const = default;
};

/// Every field, defaults included.
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys and bad enum strings throw
/// PreconditionError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// text_only zeroes frame features, visual_only replaces every context id
/// with PAD, text_visual is the identity.
SampleInputs mask_inputs(SampleInputs inputs, InputMask mode);

/// Worker count: ALVC_THREADS when set and positive, else the hardware
/// concurrency, never below 1.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct DataSplits {
  Corpus train;
  Corpus dev;
  Corpus test;
};

/// Loads train/dev/test. Under dedup mode duplicate titles are collapsed
/// within train, and test or dev videos whose title also occurs in train
/// are dropped.
DataSplits load_splits(const ExperimentConfig& c, DatasetMode mode);
DataSplits apply_dataset_mode(DataSplits splits, DatasetMode mode);

/// Candidate sets and raw per-token losses for one (dataset, query source,
/// mask) cell. Rankings for any aggregation/direction derive from it.
struct ScoredSamples {
  std::vector<EvalSample> samples;
  std::vector<CandidateSet> candidates;
  std::vector<std::vector<TokenLosses>> losses;
};

/// Candidate set i uses derive_seed(seed, i), so results do not depend on
/// the thread count.
ScoredSamples score_samples(const Scorer& scorer, const Vocab& vocab, const DataSplits& data,
                            const ExperimentConfig& c, QuerySource query_source, InputMask mask,
                            std::size_t threads);

std::vector<ScoredRanking> rank_samples(const ScoredSamples& s, Aggregation aggregation,
                                        Direction direction, bool include_masked);

struct TrainedScorer {
  std::unique_ptr<Scorer> scorer;
  Vocab vocab;
};

/// Transformer shape for this run: vocab, feature and input sizes come
/// from the data, the rest from `c.model`.
ModelConfig resolve_model_config(const ExperimentConfig& c, const Corpus& train,
                                 const Vocab& vocab);

/// Loads `model_path` when set, otherwise trains on `train`.
TrainedScorer make_scorer(const ExperimentConfig& c, const Corpus& train);

struct EvaluationOutput {
  std::vector<ScoredRanking> rankings;
  MetricReport report;
};

EvaluationOutput run_evaluation(const ExperimentConfig& c, std::size_t threads);

struct MatrixRow {
  DatasetMode dataset;
  QuerySource query_source;
  InputMask mask;
  Aggregation aggregation;
  Direction direction;
  MetricReport report;
};

/// One row per element of the Cartesian product of the matrix axes, in
/// nested order dataset, query source, mask, aggregation, direction.
/// Repeated axis values are dropped.
std::vector<MatrixRow> run_matrix(const ExperimentConfig& c, std::size_t threads);

nlohmann::ordered_json report_to_json(const MetricReport& r);

/// "# config: {...}" line, then the metric header and rows.
void write_report_tsv(std::ostream& os, const ExperimentConfig& c, const MetricReport& r);
void write_matrix_tsv(std::ostream& os, const ExperimentConfig& c,
                      const std::vector<MatrixRow>& rows);
nlohmann::ordered_json matrix_to_json(const ExperimentConfig& c,
                                      const std::vector<MatrixRow>& rows);

}  // namespace alvc
