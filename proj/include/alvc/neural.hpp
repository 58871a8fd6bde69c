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

// Unified transformer for live comments: a video encoder over frame
// features, a text encoder over context comments that also attends to the
// video, and a comment decoder that attends to both encoders.
//
// Post-norm layers, fixed sinusoidal positions (frames use their index),
// shared token embedding between the text encoder and the decoder. All
// arithmetic is double precision.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "alvc/error.hpp"
#include "alvc/scoring.hpp"
#include "alvc/text.hpp"

namespace alvc {

struct ModelConfig {
  std::size_t d_model = 32;
  std::size_t n_heads = 2;
  std::size_t n_layers = 1;
  std::size_t d_ff = 0;  // 0 means 4 * d_model
  double dropout = 0.2;
  std::size_t vocab_size = 0;
  std::size_t max_frames = 5;    // m
  std::size_t max_context = 64;  // context tokens
  std::size_t max_target = 20;   // k, comment tokens before EOS
  std::size_t feature_dim = 512;

  std::size_t ffn_dim() const { return d_ff == 0 ? 4 * d_model : d_ff; }
  /// Throws PreconditionError.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.998;
  double epsilon = 1e-9;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

enum class ParamKind { kWeight, kBias, kGain };

struct ParamSpec {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  ParamKind kind;
};

class ModelState {
 public:
  ModelState(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t tensor_count() const { return values_.size(); }
  const ParamSpec& spec(std::size_t i) const { return specs_[i]; }
  const std::vector<ParamSpec>& specs() const { return specs_; }
  Eigen::MatrixXd& param(std::size_t i) { return values_[i]; }
  const Eigen::MatrixXd& param(std::size_t i) const { return values_[i]; }
  std::vector<Eigen::MatrixXd>& params() { return values_; }
  const std::vector<Eigen::MatrixXd>& params() const { return values_; }
  /// Throws RangeError for unknown names.
  std::size_t index_of(const std::string& name) const;
  Eigen::MatrixXd& param(const std::string& name) { return values_[index_of(name)]; }

  std::size_t parameter_count() const;
  bool all_finite() const;

  bool operator==(const ModelState& other) const;

  struct Layout;
  const Layout& layout() const { return *layout_; }

 private:
  ModelConfig config_;
  std::uint64_t seed_;
  std::vector<ParamSpec> specs_;
  std::vector<Eigen::MatrixXd> values_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::shared_ptr<const Layout> layout_;
};

/// Weights ~ U(-s, s), s = sqrt(6 / (fan_in + fan_out)); biases 0; norm
/// gains 1.
ModelState init_model(const ModelConfig& config, std::uint64_t seed);

/// Frame features as an m x D matrix.
Eigen::MatrixXd frames_matrix(const std::vector<std::vector<float>>& frames,
                              std::size_t feature_dim);

/// Log-probability rows, one per decoder input position. `decoder_input`
/// normally starts with BOS. Dropout is applied only when `train_mode`.
/// Throws ShapeError when an input exceeds the configured limits.
Eigen::MatrixXd forward_logprobs(const ModelState& model, const Eigen::MatrixXd& frames,
                                 std::span<const TokenId> context_ids,
                                 std::span<const TokenId> decoder_input, bool train_mode,
                                 std::uint64_t dropout_seed = 0);

struct TrainingExample {
  Eigen::MatrixXd frames;
  std::vector<TokenId> context_ids;
  std::vector<TokenId> target_ids;  // comment tokens, no BOS/EOS
};

/// One example per (sample, ground-truth comment).
std::vector<TrainingExample> make_training_examples(const Corpus& corpus, const Vocab& vocab,
                                                    const SampleParams& params,
                                                    const ModelConfig& config);

struct LossAndGrads {
  double loss = 0.0;  // mean CE over valid target tokens
  std::size_t n_valid = 0;
  std::vector<Eigen::MatrixXd> grads;  // aligned with ModelState::params()
};

/// Teacher-forced CE over BOS-prefixed, EOS-terminated targets. Throws
/// NumericError (naming batch_id) on a non-finite loss.
LossAndGrads loss_and_grads(const ModelState& model, std::span<const TrainingExample> batch,
                            bool train_mode = false, std::uint64_t dropout_seed = 0,
                            std::size_t batch_id = 0);

/// Same loss without gradients.
double mean_loss(const ModelState& model, std::span<const TrainingExample> batch);

/// Raised when training produced a non-finite loss. Carries the parameters
/// from before the failing step.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, ModelState last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const ModelState& last_good() const { return last_good_; }

 private:
  ModelState last_good_;
};

struct TrainResult {
  ModelState model;
  std::vector<double> epoch_losses;  // mean batch loss per epoch, train mode
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Adam with bias correction. Batches are reshuffled each epoch from
/// derive_seed(seed, epoch); dropout masks are seeded per step.
TrainResult train(ModelState model, std::span<const TrainingExample> examples,
                  const OptimizerConfig& opt, std::size_t epochs, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

/// Per-position CE of BOS c1..cn -> c1..cn EOS, padded with masked PAD
/// positions up to max_target + 1. Candidates longer than max_target are
/// truncated and flagged.
TokenLosses per_token_ce(const ModelState& model, const Eigen::MatrixXd& frames,
                         std::span<const TokenId> context_ids,
                         std::span<const TokenId> candidate_ids);

/// Appends argmax tokens until EOS or max_len tokens. EOS is not returned.
std::vector<TokenId> generate_greedy(const ModelState& model, const Eigen::MatrixXd& frames,
                                     std::span<const TokenId> context_ids, std::size_t max_len);

/// ScorerContract adapter. Encodes the sample once per batch.
class TransformerScorer final : public Scorer {
 public:
  TransformerScorer(ModelState model, Vocab vocab);

  const ModelState& model() const { return model_; }
  const Vocab& vocab() const { return vocab_; }

  TokenLosses per_token_losses(const SampleInputs& inputs, const Tokens& candidate) const override;
  std::vector<TokenLosses> score_batch(const SampleInputs& inputs,
                                       std::span<const Tokens> candidates) const override;

 private:
  ModelState model_;
  Vocab vocab_;
};

/// JSON: {"format": "alvc-transformer-v1", "seed", "config", "vocab",
/// "params": [{"name", "rows", "cols", "data" (row-major)}]}.
void save_checkpoint(const ModelState& model, const Vocab& vocab,
                     const std::filesystem::path& path);
struct Checkpoint {
  ModelState model;
  Vocab vocab;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace alvc
