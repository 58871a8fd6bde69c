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

#include "alvc/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "alvc/autodiff.hpp"
#include "alvc/rng.hpp"
#include "json.hpp"

namespace alvc {

using ad::Matrix;
using ad::Tape;
using ad::Var;

void ModelConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    throw PreconditionError("d_model must be a positive multiple of n_heads");
  }
  if (n_layers == 0) throw PreconditionError("n_layers must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw PreconditionError("dropout must be in [0, 1)");
  if (vocab_size <= static_cast<std::size_t>(Specials::kCount)) {
    throw PreconditionError("vocab_size must exceed the 4 special tokens");
  }
  if (max_target == 0) throw PreconditionError("max_target must be >= 1");
  if (feature_dim == 0) throw PreconditionError("feature_dim must be >= 1");
}

void OptimizerConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw PreconditionError("Adam betas must lie in (0, 1)");
  }
  if (!(learning_rate >= 0.0)) throw PreconditionError("learning_rate must be >= 0");
  if (batch_size == 0) throw PreconditionError("batch_size must be >= 1");
}

// Parameter indices grouped by block.
struct ModelState::Layout {
  struct Attn {
    std::size_t q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
  };
  struct Norm {
    std::size_t gain, bias;
  };
  struct Ffn {
    std::size_t w1, b1, w2, b2;
  };
  struct VideoLayer {
    Attn self;
    Norm ln1;
    Ffn ffn;
    Norm ln2;
  };
  struct TextLayer {
    Attn self;
    Norm ln1;
    Attn cross_video;
    Norm ln2;
    Ffn ffn;
    Norm ln3;
  };
  struct DecoderLayer {
    Attn self;
    Norm ln1;
    Attn cross_video;
    Norm ln2;
    Attn cross_text;
    Norm ln3;
    Ffn ffn;
    Norm ln4;
  };

  std::size_t frame_w, frame_b, embed, out_w, out_b;
  std::vector<VideoLayer> video;
  std::vector<TextLayer> text;
  std::vector<DecoderLayer> decoder;
};

namespace {

using Layout = ModelState::Layout;

class LayoutBuilder {
 public:
  explicit LayoutBuilder(std::vector<ParamSpec>& specs) : specs_(specs) {}

  std::size_t add(std::string name, std::size_t rows, std::size_t cols, ParamKind kind) {
    specs_.push_back({std::move(name), static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(cols), kind});
    return specs_.size() - 1;
  }
  Layout::Attn attn(const std::string& p, std::size_t d) {
    Layout::Attn a{};
    a.q_w = add(p + ".q.w", d, d, ParamKind::kWeight);
    a.q_b = add(p + ".q.b", 1, d, ParamKind::kBias);
    a.k_w = add(p + ".k.w", d, d, ParamKind::kWeight);
    a.k_b = add(p + ".k.b", 1, d, ParamKind::kBias);
    a.v_w = add(p + ".v.w", d, d, ParamKind::kWeight);
    a.v_b = add(p + ".v.b", 1, d, ParamKind::kBias);
    a.o_w = add(p + ".o.w", d, d, ParamKind::kWeight);
    a.o_b = add(p + ".o.b", 1, d, ParamKind::kBias);
    return a;
  }
  Layout::Norm norm(const std::string& p, std::size_t d) {
    return {add(p + ".gain", 1, d, ParamKind::kGain), add(p + ".bias", 1, d, ParamKind::kBias)};
  }
  Layout::Ffn ffn(const std::string& p, std::size_t d, std::size_t f) {
    Layout::Ffn x{};
    x.w1 = add(p + ".w1", d, f, ParamKind::kWeight);
    x.b1 = add(p + ".b1", 1, f, ParamKind::kBias);
    x.w2 = add(p + ".w2", f, d, ParamKind::kWeight);
    x.b2 = add(p + ".b2", 1, d, ParamKind::kBias);
    return x;
  }

 private:
  std::vector<ParamSpec>& specs_;
};

Layout build_layout(const ModelConfig& c, std::vector<ParamSpec>& specs) {
  LayoutBuilder b(specs);
  const std::size_t d = c.d_model;
  const std::size_t f = c.ffn_dim();
  Layout l{};
  l.frame_w = b.add("video.in.w", c.feature_dim, d, ParamKind::kWeight);
  l.frame_b = b.add("video.in.b", 1, d, ParamKind::kBias);
  l.embed = b.add("embed", c.vocab_size, d, ParamKind::kWeight);
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    const std::string p = "video." + std::to_string(i);
    Layout::VideoLayer v{};
    v.self = b.attn(p + ".self", d);
    v.ln1 = b.norm(p + ".ln1", d);
    v.ffn = b.ffn(p + ".ffn", d, f);
    v.ln2 = b.norm(p + ".ln2", d);
    l.video.push_back(v);
  }
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    const std::string p = "text." + std::to_string(i);
    Layout::TextLayer t{};
    t.self = b.attn(p + ".self", d);
    t.ln1 = b.norm(p + ".ln1", d);
    t.cross_video = b.attn(p + ".cross_video", d);
    t.ln2 = b.norm(p + ".ln2", d);
    t.ffn = b.ffn(p + ".ffn", d, f);
    t.ln3 = b.norm(p + ".ln3", d);
    l.text.push_back(t);
  }
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    const std::string p = "decoder." + std::to_string(i);
    Layout::DecoderLayer t{};
    t.self = b.attn(p + ".self", d);
    t.ln1 = b.norm(p + ".ln1", d);
    t.cross_video = b.attn(p + ".cross_video", d);
    t.ln2 = b.norm(p + ".ln2", d);
    t.cross_text = b.attn(p + ".cross_text", d);
    t.ln3 = b.norm(p + ".ln3", d);
    t.ffn = b.ffn(p + ".ffn", d, f);
    t.ln4 = b.norm(p + ".ln4", d);
    l.decoder.push_back(t);
  }
  l.out_w = b.add("out.w", d, c.vocab_size, ParamKind::kWeight);
  l.out_b = b.add("out.b", 1, c.vocab_size, ParamKind::kBias);
  return l;
}

Matrix positional_encoding(Eigen::Index rows, Eigen::Index d) {
  Matrix pe(rows, d);
  for (Eigen::Index pos = 0; pos < rows; ++pos) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) /
                                                 static_cast<double>(d));
      const double angle = static_cast<double>(pos) * rate;
      pe(pos, i) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

// Forward graph over one example on a tape.
class Network {
 public:
  Network(Tape& tape, const ModelState& model, std::vector<Matrix>* grads, bool train,
          std::uint64_t dropout_seed)
      : tape_(tape),
        layout_(model.layout()),
        config_(model.config()),
        train_(train && model.config().dropout > 0.0),
        rng_(dropout_seed) {
    params_.reserve(model.tensor_count());
    for (std::size_t i = 0; i < model.tensor_count(); ++i) {
      params_.push_back(tape.parameter(model.param(i), grads ? &(*grads)[i] : nullptr));
    }
  }

  Var video_encoder(const Matrix& frames) {
    check_frames(frames);
    Var x = tape_.add_row(tape_.matmul(tape_.constant(frames), p(layout_.frame_w)),
                          p(layout_.frame_b));
    x = tape_.add(x, tape_.constant(positional_encoding(frames.rows(), d())));
    x = dropout(x);
    const Matrix all = Matrix::Ones(frames.rows(), frames.rows());
    for (const auto& l : layout_.video) {
      x = norm(l.ln1, tape_.add(x, dropout(attention(l.self, x, x, all))));
      x = norm(l.ln2, tape_.add(x, dropout(ffn(l.ffn, x))));
    }
    return x;
  }

  Var text_encoder(std::span<const TokenId> ctx, Var video) {
    if (ctx.size() > config_.max_context) {
      throw ShapeError("context has " + std::to_string(ctx.size()) + " tokens, max_context is " +
                       std::to_string(config_.max_context));
    }
    check_ids(ctx);
    const auto n = static_cast<Eigen::Index>(ctx.size());
    const Eigen::Index m = tape_.value(video).rows();
    Var x = embed(ctx);
    const Matrix self_allowed = key_mask(n, ctx);
    const Matrix video_allowed = Matrix::Ones(n, m);
    for (const auto& l : layout_.text) {
      x = norm(l.ln1, tape_.add(x, dropout(attention(l.self, x, x, self_allowed))));
      x = norm(l.ln2, tape_.add(x, dropout(attention(l.cross_video, x, video, video_allowed))));
      x = norm(l.ln3, tape_.add(x, dropout(ffn(l.ffn, x))));
    }
    return x;
  }

  Var decoder(std::span<const TokenId> input, Var video, Var text,
              std::span<const TokenId> ctx) {
    if (input.empty() || input.size() > config_.max_target + 1) {
      throw ShapeError("decoder input length " + std::to_string(input.size()) +
                       " outside [1, max_target + 1 = " + std::to_string(config_.max_target + 1) +
                       "]");
    }
    check_ids(input);
    const auto t = static_cast<Eigen::Index>(input.size());
    Matrix causal = Matrix::Zero(t, t);
    for (Eigen::Index i = 0; i < t; ++i) causal.row(i).head(i + 1).setOnes();
    const Matrix video_allowed = Matrix::Ones(t, tape_.value(video).rows());
    const Matrix text_allowed = key_mask(t, ctx);
    Var x = embed(input);
    for (const auto& l : layout_.decoder) {
      x = norm(l.ln1, tape_.add(x, dropout(attention(l.self, x, x, causal))));
      x = norm(l.ln2, tape_.add(x, dropout(attention(l.cross_video, x, video, video_allowed))));
      x = norm(l.ln3, tape_.add(x, dropout(attention(l.cross_text, x, text, text_allowed))));
      x = norm(l.ln4, tape_.add(x, dropout(ffn(l.ffn, x))));
    }
    Var logits = tape_.add_row(tape_.matmul(x, p(layout_.out_w)), p(layout_.out_b));
    return tape_.log_softmax(logits);
  }

 private:
  Var p(std::size_t i) const { return params_[i]; }
  Eigen::Index d() const { return static_cast<Eigen::Index>(config_.d_model); }

  void check_frames(const Matrix& frames) const {
    if (static_cast<std::size_t>(frames.rows()) > config_.max_frames) {
      throw ShapeError(std::to_string(frames.rows()) + " frames exceed max_frames " +
                       std::to_string(config_.max_frames));
    }
    if (frames.rows() > 0 && static_cast<std::size_t>(frames.cols()) != config_.feature_dim) {
      throw ShapeError("frame feature length " + std::to_string(frames.cols()) +
                       " != feature_dim " + std::to_string(config_.feature_dim));
    }
  }

  void check_ids(std::span<const TokenId> ids) const {
    for (TokenId id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
        throw ShapeError("token id " + std::to_string(id) + " outside vocab_size " +
                         std::to_string(config_.vocab_size));
      }
    }
  }

  static Matrix key_mask(Eigen::Index rows, std::span<const TokenId> keys) {
    Matrix m(rows, static_cast<Eigen::Index>(keys.size()));
    for (std::size_t j = 0; j < keys.size(); ++j) {
      m.col(static_cast<Eigen::Index>(j)).setConstant(keys[j] == Specials::kPad ? 0.0 : 1.0);
    }
    return m;
  }

  Var embed(std::span<const TokenId> ids) {
    Var x = tape_.gather_rows(p(layout_.embed), ids);
    x = tape_.scale(x, std::sqrt(static_cast<double>(config_.d_model)));
    x = tape_.add(x, tape_.constant(positional_encoding(static_cast<Eigen::Index>(ids.size()), d())));
    return dropout(x);
  }

  Var dropout(Var x) {
    if (!train_) return x;
    const Matrix& v = tape_.value(x);
    const double keep = 1.0 - config_.dropout;
    Matrix mask(v.rows(), v.cols());
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      for (Eigen::Index r = 0; r < v.rows(); ++r) {
        mask(r, c) = rng_.uniform() < keep ? 1.0 / keep : 0.0;
      }
    }
    return tape_.hadamard_const(x, mask);
  }

  Var linear(Var x, std::size_t w, std::size_t b) {
    return tape_.add_row(tape_.matmul(x, p(w)), p(b));
  }

  Var attention(const Layout::Attn& a, Var query, Var memory, const Matrix& allowed) {
    const Var q = linear(query, a.q_w, a.q_b);
    const Var k = linear(memory, a.k_w, a.k_b);
    const Var v = linear(memory, a.v_w, a.v_b);
    const auto heads = static_cast<Eigen::Index>(config_.n_heads);
    const Eigen::Index dk = d() / heads;
    const double inv = 1.0 / std::sqrt(static_cast<double>(dk));
    std::vector<Var> outs;
    outs.reserve(static_cast<std::size_t>(heads));
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Var qh = tape_.slice_cols(q, h * dk, dk);
      const Var kh = tape_.slice_cols(k, h * dk, dk);
      const Var vh = tape_.slice_cols(v, h * dk, dk);
      const Var w = tape_.masked_softmax(tape_.scale(tape_.matmul_nt(qh, kh), inv), allowed);
      outs.push_back(tape_.matmul(w, vh));
    }
    return linear(tape_.concat_cols(outs), a.o_w, a.o_b);
  }

  Var ffn(const Layout::Ffn& f, Var x) {
    return linear(tape_.relu(linear(x, f.w1, f.b1)), f.w2, f.b2);
  }

  Var norm(const Layout::Norm& n, Var x) { return tape_.layer_norm(x, p(n.gain), p(n.bias)); }

  Tape& tape_;
  const Layout& layout_;
  const ModelConfig& config_;
  bool train_;
  Rng rng_;
  std::vector<Var> params_;
};

// Decoder input / target / weight rows for one target sequence.
struct TeacherForcing {
  std::vector<TokenId> input;
  std::vector<TokenId> target;
  std::vector<bool> valid;
  bool truncated = false;
};

TeacherForcing teacher_forcing(std::span<const TokenId> ids, std::size_t max_target,
                               bool pad_to_max) {
  TeacherForcing tf;
  std::size_t n = ids.size();
  if (n > max_target) {
    n = max_target;
    tf.truncated = true;
  }
  tf.input.push_back(Specials::kBos);
  for (std::size_t i = 0; i < n; ++i) {
    tf.input.push_back(ids[i]);
    tf.target.push_back(ids[i]);
  }
  tf.target.push_back(Specials::kEos);
  tf.valid.assign(tf.target.size(), true);
  if (pad_to_max) {
    while (tf.target.size() < max_target + 1) {
      tf.input.push_back(Specials::kPad);
      tf.target.push_back(Specials::kPad);
      tf.valid.push_back(false);
    }
  }
  return tf;
}

std::size_t valid_targets(const TrainingExample& ex, std::size_t max_target) {
  return std::min(ex.target_ids.size(), max_target) + 1;
}

LossAndGrads loss_and_grads_impl(const ModelState& model,
                                 std::span<const TrainingExample* const> batch, bool train_mode,
                                 std::uint64_t dropout_seed, std::size_t batch_id,
                                 bool with_grads) {
  if (batch.empty()) throw PreconditionError("loss_and_grads: empty batch");
  const std::size_t k = model.config().max_target;
  LossAndGrads out;
  for (const auto* ex : batch) out.n_valid += valid_targets(*ex, k);
  if (with_grads) {
    out.grads.reserve(model.tensor_count());
    for (const auto& p : model.params()) out.grads.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  const double w = 1.0 / static_cast<double>(out.n_valid);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = *batch[i];
    const auto tf = teacher_forcing(ex.target_ids, k, false);
    Tape tape;
    Network net(tape, model, with_grads ? &out.grads : nullptr, train_mode,
                derive_seed(dropout_seed, i));
    const Var video = net.video_encoder(ex.frames);
    const Var text = net.text_encoder(ex.context_ids, video);
    const Var logp = net.decoder(tf.input, video, text, ex.context_ids);
    const std::vector<double> weights(tf.target.size(), w);
    const Var loss = tape.weighted_nll(logp, tf.target, weights);
    out.loss += tape.value(loss)(0, 0);
    if (with_grads) tape.backward(loss);
  }
  if (!std::isfinite(out.loss)) {
    throw NumericError("batch " + std::to_string(batch_id) + ": non-finite loss");
  }
  return out;
}

std::vector<const TrainingExample*> pointers(std::span<const TrainingExample> batch) {
  std::vector<const TrainingExample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& ex : batch) ptrs.push_back(&ex);
  return ptrs;
}

struct EncodedSample {
  Matrix video;
  Matrix text;
};

EncodedSample encode_sample(const ModelState& model, const Matrix& frames,
                            std::span<const TokenId> context_ids) {
  Tape tape;
  Network net(tape, model, nullptr, false, 0);
  const Var video = net.video_encoder(frames);
  const Var text = net.text_encoder(context_ids, video);
  return {tape.value(video), tape.value(text)};
}

Matrix decode_logprobs(const ModelState& model, const EncodedSample& enc,
                       std::span<const TokenId> context_ids,
                       std::span<const TokenId> decoder_input) {
  Tape tape;
  Network net(tape, model, nullptr, false, 0);
  const Var video = tape.constant(enc.video);
  const Var text = tape.constant(enc.text);
  return tape.value(net.decoder(decoder_input, video, text, context_ids));
}

TokenLosses ce_from_encoded(const ModelState& model, const EncodedSample& enc,
                            std::span<const TokenId> context_ids,
                            std::span<const TokenId> candidate_ids) {
  const auto tf = teacher_forcing(candidate_ids, model.config().max_target, true);
  const Matrix logp = decode_logprobs(model, enc, context_ids, tf.input);
  TokenLosses tl;
  tl.truncated = tf.truncated;
  tl.valid_mask = tf.valid;
  tl.losses.reserve(tf.target.size());
  for (std::size_t i = 0; i < tf.target.size(); ++i) {
    tl.losses.push_back(-logp(static_cast<Eigen::Index>(i), tf.target[i]));
  }
  return tl;
}

}  // namespace

ModelState::ModelState(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed) {
  config_.validate();
  layout_ = std::make_shared<const Layout>(build_layout(config_, specs_));
  values_.reserve(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    values_.push_back(Matrix::Zero(specs_[i].rows, specs_[i].cols));
    by_name_.emplace(specs_[i].name, i);
  }
}

std::size_t ModelState::index_of(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) throw RangeError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ModelState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

bool ModelState::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](const Matrix& m) { return m.allFinite(); });
}

bool ModelState::operator==(const ModelState& other) const {
  if (!(config_ == other.config_) || seed_ != other.seed_) return false;
  if (values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != other.values_[i]) return false;
  }
  return true;
}

ModelState init_model(const ModelConfig& config, std::uint64_t seed) {
  ModelState m(config, seed);
  Rng rng(seed);
  for (std::size_t i = 0; i < m.tensor_count(); ++i) {
    const auto& spec = m.spec(i);
    auto& v = m.param(i);
    switch (spec.kind) {
      case ParamKind::kBias:
        v.setZero();
        break;
      case ParamKind::kGain:
        v.setOnes();
        break;
      case ParamKind::kWeight: {
        const double s = std::sqrt(6.0 / static_cast<double>(spec.rows + spec.cols));
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
          for (Eigen::Index c = 0; c < v.cols(); ++c) v(r, c) = rng.uniform(-s, s);
        }
        break;
      }
    }
  }
  return m;
}

Eigen::MatrixXd frames_matrix(const std::vector<std::vector<float>>& frames,
                              std::size_t feature_dim) {
  Matrix m(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(feature_dim));
  for (std::size_t r = 0; r < frames.size(); ++r) {
    if (frames[r].size() != feature_dim) {
      throw ShapeError("frame feature length " + std::to_string(frames[r].size()) +
                       " != feature_dim " + std::to_string(feature_dim));
    }
    for (std::size_t c = 0; c < feature_dim; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = frames[r][c];
    }
  }
  return m;
}

Eigen::MatrixXd forward_logprobs(const ModelState& model, const Eigen::MatrixXd& frames,
                                 std::span<const TokenId> context_ids,
                                 std::span<const TokenId> decoder_input, bool train_mode,
                                 std::uint64_t dropout_seed) {
  Tape tape;
  Network net(tape, model, nullptr, train_mode, dropout_seed);
  const Var video = net.video_encoder(frames);
  const Var text = net.text_encoder(context_ids, video);
  return tape.value(net.decoder(decoder_input, video, text, context_ids));
}

std::vector<TrainingExample> make_training_examples(const Corpus& corpus, const Vocab& vocab,
                                                    const SampleParams& params,
                                                    const ModelConfig& config) {
  std::vector<TrainingExample> out;
  for (const auto& video : corpus.videos) {
    for (const auto& s : build_samples(video, params)) {
      const auto in = resolve_inputs(video, s, vocab, config.max_context);
      const Matrix frames = frames_matrix(in.frames, config.feature_dim);
      for (std::size_t ref : s.ground_truth_refs) {
        auto ids = vocab.encode(video.comments[ref].tokens);
        if (ids.size() > config.max_target) ids.resize(config.max_target);
        out.push_back({frames, in.context_ids, std::move(ids)});
      }
    }
  }
  return out;
}

LossAndGrads loss_and_grads(const ModelState& model, std::span<const TrainingExample> batch,
                            bool train_mode, std::uint64_t dropout_seed, std::size_t batch_id) {
  const auto ptrs = pointers(batch);
  return loss_and_grads_impl(model, ptrs, train_mode, dropout_seed, batch_id, true);
}

double mean_loss(const ModelState& model, std::span<const TrainingExample> batch) {
  const auto ptrs = pointers(batch);
  return loss_and_grads_impl(model, ptrs, false, 0, 0, false).loss;
}

TrainResult train(ModelState model, std::span<const TrainingExample> examples,
                  const OptimizerConfig& opt, std::size_t epochs, std::uint64_t seed,
                  const EpochCallback& on_epoch) {
  opt.validate();
  if (examples.empty()) throw PreconditionError("train: no examples");
  std::vector<Matrix> m1;
  std::vector<Matrix> m2;
  for (const auto& p : model.params()) {
    m1.push_back(Matrix::Zero(p.rows(), p.cols()));
    m2.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  TrainResult result{model, {}};
  std::vector<std::size_t> order(examples.size());
  std::size_t step = 0;
  double pow1 = 1.0;
  double pow2 = 1.0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng(derive_seed(seed, epoch)).shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_valid = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      std::vector<const TrainingExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[order[i]]);

      LossAndGrads lg;
      try {
        lg = loss_and_grads_impl(model, batch, true, derive_seed(seed ^ 0xD0D0ULL, step), step,
                                 true);
      } catch (const NumericError& e) {
        throw TrainingDiverged(std::string("training diverged: ") + e.what(), model);
      }
      ++step;
      pow1 *= opt.beta1;
      pow2 *= opt.beta2;
      ModelState previous = model;
      for (std::size_t i = 0; i < model.tensor_count(); ++i) {
        const Matrix& g = lg.grads[i];
        m1[i] = opt.beta1 * m1[i] + (1.0 - opt.beta1) * g;
        m2[i] = opt.beta2 * m2[i] + (1.0 - opt.beta2) * g.cwiseProduct(g);
        const Matrix mhat = m1[i] / (1.0 - pow1);
        const Matrix vhat = m2[i] / (1.0 - pow2);
        model.param(i).array() -=
            opt.learning_rate * mhat.array() / (vhat.array().sqrt() + opt.epsilon);
      }
      if (!model.all_finite()) {
        throw TrainingDiverged("training diverged: non-finite parameters at step " +
                                   std::to_string(step),
                               std::move(previous));
      }
      epoch_loss += lg.loss * static_cast<double>(lg.n_valid);
      epoch_valid += lg.n_valid;
    }
    const double mean = epoch_loss / static_cast<double>(epoch_valid);
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  result.model = std::move(model);
  return result;
}

TokenLosses per_token_ce(const ModelState& model, const Eigen::MatrixXd& frames,
                         std::span<const TokenId> context_ids,
                         std::span<const TokenId> candidate_ids) {
  const auto enc = encode_sample(model, frames, context_ids);
  return ce_from_encoded(model, enc, context_ids, candidate_ids);
}

std::vector<TokenId> generate_greedy(const ModelState& model, const Eigen::MatrixXd& frames,
                                     std::span<const TokenId> context_ids, std::size_t max_len) {
  max_len = std::min(max_len, model.config().max_target);
  const auto enc = encode_sample(model, frames, context_ids);
  std::vector<TokenId> input{Specials::kBos};
  std::vector<TokenId> out;
  while (out.size() < max_len) {
    const Matrix logp = decode_logprobs(model, enc, context_ids, input);
    Eigen::Index best = 0;
    logp.row(logp.rows() - 1).maxCoeff(&best);
    const auto next = static_cast<TokenId>(best);
    if (next == Specials::kEos) break;
    out.push_back(next);
    input.push_back(next);
  }
  return out;
}

TransformerScorer::TransformerScorer(ModelState model, Vocab vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
  if (vocab_.size() != model_.config().vocab_size) {
    throw PreconditionError("vocab size " + std::to_string(vocab_.size()) +
                            " does not match model vocab_size " +
                            std::to_string(model_.config().vocab_size));
  }
}

TokenLosses TransformerScorer::per_token_losses(const SampleInputs& inputs,
                                                const Tokens& candidate) const {
  const Tokens one[] = {candidate};
  return score_batch(inputs, one).front();
}

std::vector<TokenLosses> TransformerScorer::score_batch(const SampleInputs& inputs,
                                                        std::span<const Tokens> candidates) const {
  const Matrix frames = frames_matrix(inputs.frames, model_.config().feature_dim);
  // Context longer than the model accepts keeps its most recent tokens.
  std::span<const TokenId> ctx(inputs.context_ids);
  if (ctx.size() > model_.config().max_context) {
    ctx = ctx.last(model_.config().max_context);
  }
  const auto enc = encode_sample(model_, frames, ctx);
  std::vector<TokenLosses> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.push_back(ce_from_encoded(model_, enc, ctx, vocab_.encode(c)));
  }
  return out;
}

namespace {

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["d_model"] = c.d_model;
  j["n_heads"] = c.n_heads;
  j["n_layers"] = c.n_layers;
  j["d_ff"] = c.ffn_dim();
  j["dropout"] = c.dropout;
  j["vocab_size"] = c.vocab_size;
  j["max_frames"] = c.max_frames;
  j["max_context"] = c.max_context;
  j["max_target"] = c.max_target;
  j["feature_dim"] = c.feature_dim;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.n_layers = j.at("n_layers").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_frames = j.at("max_frames").get<std::size_t>();
  c.max_context = j.at("max_context").get<std::size_t>();
  c.max_target = j.at("max_target").get<std::size_t>();
  c.feature_dim = j.at("feature_dim").get<std::size_t>();
  return c;
}

}  // namespace

void save_checkpoint(const ModelState& model, const Vocab& vocab,
                     const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = "alvc-transformer-v1";
  j["seed"] = model.seed();
  j["config"] = config_to_json(model.config());
  j["vocab"] = vocab.tokens();
  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.tensor_count(); ++i) {
    const auto& v = model.param(i);
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) data.push_back(v(r, c));
    }
    nlohmann::ordered_json p;
    p["name"] = model.spec(i).name;
    p["rows"] = v.rows();
    p["cols"] = v.cols();
    p["data"] = std::move(data);
    params.push_back(std::move(p));
  }
  j["params"] = std::move(params);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const auto j = nlohmann::json::parse(is);
  if (j.at("format") != "alvc-transformer-v1") {
    throw PreconditionError(path.string() + " is not a transformer checkpoint");
  }
  ModelState model(config_from_json(j.at("config")), j.at("seed").get<std::uint64_t>());
  for (const auto& p : j.at("params")) {
    const auto name = p.at("name").get<std::string>();
    auto& v = model.param(name);
    if (v.rows() != p.at("rows").get<Eigen::Index>() ||
        v.cols() != p.at("cols").get<Eigen::Index>()) {
      throw IntegrityError("checkpoint shape mismatch for " + name);
    }
    const auto& data = p.at("data");
    if (static_cast<Eigen::Index>(data.size()) != v.size()) {
      throw IntegrityError("checkpoint data length mismatch for " + name);
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) v(r, c) = data[k++].get<double>();
    }
  }
  auto tokens = j.at("vocab").get<std::vector<std::string>>();
  const std::size_t n = tokens.size();
  return {std::move(model), Vocab(std::move(tokens), n)};
}

}  // namespace alvc
