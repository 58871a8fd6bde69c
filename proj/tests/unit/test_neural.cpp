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

#include <cmath>
#include <filesystem>
#include <limits>

#include "alvc/error.hpp"
#include "alvc/neural.hpp"
#include "alvc/rng.hpp"
#include "fixtures.hpp"

namespace alvc {
namespace {

using Eigen::MatrixXd;

ModelConfig tiny_config() {
  ModelConfig c;
  c.d_model = 4;
  c.n_heads = 2;
  c.n_layers = 1;
  c.d_ff = 6;
  c.dropout = 0.0;
  c.vocab_size = 9;
  c.max_frames = 3;
  c.max_context = 6;
  c.max_target = 4;
  c.feature_dim = 3;
  return c;
}

MatrixXd random_frames(Rng& rng, Eigen::Index m, Eigen::Index d) {
  MatrixXd f(m, d);
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = rng.uniform(-1, 1);
  return f;
}

// Every tensor, biases and gains included, drawn at random.
ModelState randomized(const ModelConfig& c, std::uint64_t seed) {
  ModelState m = init_model(c, seed);
  Rng rng(seed + 100);
  for (auto& p : m.params()) {
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) += rng.uniform(-0.3, 0.3);
  }
  return m;
}

TrainingExample example(Rng& rng, const ModelConfig& c, std::vector<TokenId> ctx,
                        std::vector<TokenId> target) {
  return {random_frames(rng, static_cast<Eigen::Index>(c.max_frames),
                        static_cast<Eigen::Index>(c.feature_dim)),
          std::move(ctx), std::move(target)};
}

// ---- independent forward pass in plain Eigen ----

struct Oracle {
  const ModelState& m;
  const ModelConfig& c;

  const MatrixXd& P(const std::string& n) const { return m.param(m.index_of(n)); }

  MatrixXd lin(const MatrixXd& x, const std::string& p) const {
    MatrixXd y = x * P(p + ".w");
    y.rowwise() += P(p + ".b").row(0);
    return y;
  }

  MatrixXd ln(const MatrixXd& x, const std::string& p) const {
    MatrixXd y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double mu = x.row(r).mean();
      double var = 0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) var += (x(r, k) - mu) * (x(r, k) - mu);
      var /= static_cast<double>(x.cols());
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        y(r, k) = (x(r, k) - mu) / std::sqrt(var + 1e-5) * P(p + ".gain")(0, k) +
                  P(p + ".bias")(0, k);
      }
    }
    return y;
  }

  // allowed(i, j) says whether query i may look at key j.
  MatrixXd attn(const MatrixXd& q_in, const MatrixXd& kv, const std::string& p,
                const std::function<bool(Eigen::Index, Eigen::Index)>& allowed) const {
    const MatrixXd q = lin(q_in, p + ".q"), k = lin(kv, p + ".k"), v = lin(kv, p + ".v");
    const Eigen::Index h = static_cast<Eigen::Index>(c.n_heads);
    const Eigen::Index dk = q.cols() / h;
    MatrixXd cat = MatrixXd::Zero(q.rows(), q.cols());
    for (Eigen::Index head = 0; head < h; ++head) {
      for (Eigen::Index i = 0; i < q.rows(); ++i) {
        std::vector<double> s(static_cast<std::size_t>(kv.rows()));
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < kv.rows(); ++j) {
          if (!allowed(i, j)) continue;
          double dot = 0;
          for (Eigen::Index t = 0; t < dk; ++t) dot += q(i, head * dk + t) * k(j, head * dk + t);
          s[j] = dot / std::sqrt(static_cast<double>(dk));
          mx = std::max(mx, s[j]);
        }
        double z = 0;
        for (Eigen::Index j = 0; j < kv.rows(); ++j) {
          if (allowed(i, j)) z += std::exp(s[j] - mx);
        }
        for (Eigen::Index j = 0; j < kv.rows(); ++j) {
          if (!allowed(i, j)) continue;
          const double w = std::exp(s[j] - mx) / z;
          for (Eigen::Index t = 0; t < dk; ++t) cat(i, head * dk + t) += w * v(j, head * dk + t);
        }
      }
    }
    return lin(cat, p + ".o");
  }

  MatrixXd ffn(const MatrixXd& x, const std::string& p) const {
    MatrixXd hdn = x * P(p + ".w1");
    hdn.rowwise() += P(p + ".b1").row(0);
    hdn = hdn.cwiseMax(0.0);
    MatrixXd y = hdn * P(p + ".w2");
    y.rowwise() += P(p + ".b2").row(0);
    return y;
  }

  MatrixXd pe(Eigen::Index rows) const {
    const auto d = static_cast<Eigen::Index>(c.d_model);
    MatrixXd out(rows, d);
    for (Eigen::Index pos = 0; pos < rows; ++pos) {
      for (Eigen::Index i = 0; i < d; i += 2) {
        const double angle = pos / std::pow(10000.0, static_cast<double>(i) / d);
        out(pos, i) = std::sin(angle);
        if (i + 1 < d) out(pos, i + 1) = std::cos(angle);
      }
    }
    return out;
  }

  MatrixXd embed(const std::vector<TokenId>& ids) const {
    MatrixXd x(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(c.d_model));
    for (std::size_t i = 0; i < ids.size(); ++i) x.row(i) = P("embed").row(ids[i]);
    return x * std::sqrt(static_cast<double>(c.d_model)) + pe(x.rows());
  }

  MatrixXd forward(const MatrixXd& frames, const std::vector<TokenId>& ctx,
                   const std::vector<TokenId>& input) const {
    auto all = [](Eigen::Index, Eigen::Index) { return true; };
    auto not_pad = [&ctx](Eigen::Index, Eigen::Index j) { return ctx[j] != Specials::kPad; };
    MatrixXd v = lin(frames, "video.in") + pe(frames.rows());
    MatrixXd t = embed(ctx);
    MatrixXd y = embed(input);
    for (std::size_t l = 0; l < c.n_layers; ++l) {
      const std::string p = "video." + std::to_string(l);
      v = ln(v + attn(v, v, p + ".self", all), p + ".ln1");
      v = ln(v + ffn(v, p + ".ffn"), p + ".ln2");
    }
    for (std::size_t l = 0; l < c.n_layers; ++l) {
      const std::string p = "text." + std::to_string(l);
      t = ln(t + attn(t, t, p + ".self", not_pad), p + ".ln1");
      t = ln(t + attn(t, v, p + ".cross_video", all), p + ".ln2");
      t = ln(t + ffn(t, p + ".ffn"), p + ".ln3");
    }
    for (std::size_t l = 0; l < c.n_layers; ++l) {
      const std::string p = "decoder." + std::to_string(l);
      y = ln(y + attn(y, y, p + ".self", [](Eigen::Index i, Eigen::Index j) { return j <= i; }),
             p + ".ln1");
      y = ln(y + attn(y, v, p + ".cross_video", all), p + ".ln2");
      y = ln(y + attn(y, t, p + ".cross_text", not_pad), p + ".ln3");
      y = ln(y + ffn(y, p + ".ffn"), p + ".ln4");
    }
    MatrixXd logits = lin(y, "out");
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const double mx = logits.row(r).maxCoeff();
      const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
      logits.row(r).array() -= lse;
    }
    return logits;
  }
};

TEST(ModelConfig, Validation) {
  ModelConfig c = tiny_config();
  EXPECT_NO_THROW(c.validate());
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = tiny_config();
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), PreconditionError);
  OptimizerConfig o;
  o.beta2 = 1.0;
  EXPECT_THROW(o.validate(), PreconditionError);
}

TEST(ModelState, ParameterCountClosedForm) {
  for (const auto& [d, f, layers, V, D] :
       std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t>>{
           {4, 6, 1, 9, 3}, {8, 32, 2, 20, 5}, {32, 128, 1, 100, 16}}) {
    ModelConfig c = tiny_config();
    c.d_model = d;
    c.d_ff = f;
    c.n_layers = layers;
    c.vocab_size = V;
    c.feature_dim = D;
    const std::size_t ffn = 2 * d * f + f + d;
    const std::size_t attn = 4 * (d * d + d);
    const std::size_t video = D * d + d + layers * (attn + 4 * d + ffn);
    const std::size_t text = layers * (2 * attn + 6 * d + ffn);
    const std::size_t dec = layers * (3 * attn + 8 * d + ffn);
    EXPECT_EQ(init_model(c, 1).parameter_count(), video + text + dec + V * d + d * V + V);
  }
}

TEST(ModelState, InitRanges) {
  const ModelState m = init_model(tiny_config(), 3);
  for (std::size_t i = 0; i < m.tensor_count(); ++i) {
    const auto& s = m.spec(i);
    const auto& p = m.param(i);
    if (s.kind == ParamKind::kBias) EXPECT_TRUE(p.isZero());
    if (s.kind == ParamKind::kGain) EXPECT_TRUE(p.isOnes());
    if (s.kind == ParamKind::kWeight) {
      EXPECT_LE(p.cwiseAbs().maxCoeff(), std::sqrt(6.0 / static_cast<double>(s.rows + s.cols)));
    }
  }
  EXPECT_EQ(init_model(tiny_config(), 3), m);
  EXPECT_FALSE(init_model(tiny_config(), 4) == m);
  EXPECT_THROW(m.index_of("nope"), RangeError);
}

TEST(Forward, MatchesPlainEigenOracle) {
  for (std::size_t layers : {1u, 2u}) {
    ModelConfig c = tiny_config();
    c.n_layers = layers;
    const ModelState m = randomized(c, 21 + layers);
    Rng rng(5);
    const MatrixXd frames = random_frames(rng, 3, 3);
    const std::vector<TokenId> ctx = {5, 6, Specials::kEos, 7, Specials::kPad};
    const std::vector<TokenId> input = {Specials::kBos, 4, 8, 5};
    const MatrixXd got = forward_logprobs(m, frames, ctx, input, false);
    const MatrixXd want = Oracle{m, c}.forward(frames, ctx, input);
    ASSERT_EQ(got.rows(), 4);
    ASSERT_EQ(got.cols(), 9);
    EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Forward, RowsAreNormalized) {
  const ModelState m = randomized(tiny_config(), 2);
  Rng rng(1);
  const std::vector<TokenId> ctx = {4, 5};
  const std::vector<TokenId> input = {Specials::kBos, 6, 7};
  const MatrixXd lp = forward_logprobs(m, random_frames(rng, 2, 3), ctx, input, false);
  for (Eigen::Index r = 0; r < lp.rows(); ++r) {
    EXPECT_NEAR(lp.row(r).array().exp().sum(), 1.0, 1e-12);
  }
}

TEST(Forward, ZeroOutputProjectionIsUniform) {
  ModelState m = randomized(tiny_config(), 4);
  m.param("out.w").setZero();
  m.param("out.b").setZero();
  Rng rng(1);
  const std::vector<TokenId> ctx = {4};
  const std::vector<TokenId> input = {Specials::kBos, 6};
  const MatrixXd lp = forward_logprobs(m, random_frames(rng, 3, 3), ctx, input, false);
  EXPECT_LE((lp.array() + std::log(9.0)).abs().maxCoeff(), 1e-12);
}

TEST(Forward, CausalPrefixInvariance) {
  const ModelState m = randomized(tiny_config(), 6);
  Rng rng(2);
  const MatrixXd f = random_frames(rng, 3, 3);
  const std::vector<TokenId> ctx = {4, 5};
  const std::vector<TokenId> a = {Specials::kBos, 6, 7};
  const std::vector<TokenId> b = {Specials::kBos, 6, 8, 4};
  const MatrixXd la = forward_logprobs(m, f, ctx, a, false);
  const MatrixXd lb = forward_logprobs(m, f, ctx, b, false);
  EXPECT_LE((la.topRows(2) - lb.topRows(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, TrailingPadInContextIsInvisible) {
  const ModelState m = randomized(tiny_config(), 8);
  Rng rng(3);
  const MatrixXd f = random_frames(rng, 3, 3);
  const std::vector<TokenId> ctx = {4, 5, 6};
  const std::vector<TokenId> padded = {4, 5, 6, Specials::kPad, Specials::kPad};
  const std::vector<TokenId> input = {Specials::kBos, 7};
  const MatrixXd a = forward_logprobs(m, f, ctx, input, false);
  const MatrixXd b = forward_logprobs(m, f, padded, input, false);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, DropoutOnlyInTrainMode) {
  ModelConfig c = tiny_config();
  c.dropout = 0.3;
  const ModelState m = randomized(c, 9);
  Rng rng(4);
  const MatrixXd f = random_frames(rng, 3, 3);
  const std::vector<TokenId> ctx = {4, 5};
  const std::vector<TokenId> input = {Specials::kBos, 6};
  EXPECT_EQ(forward_logprobs(m, f, ctx, input, false, 1),
            forward_logprobs(m, f, ctx, input, false, 2));
  EXPECT_EQ(forward_logprobs(m, f, ctx, input, true, 1),
            forward_logprobs(m, f, ctx, input, true, 1));
  EXPECT_NE(forward_logprobs(m, f, ctx, input, true, 1),
            forward_logprobs(m, f, ctx, input, true, 2));
}

TEST(Forward, ShapeErrors) {
  const ModelState m = init_model(tiny_config(), 1);
  Rng rng(1);
  const std::vector<TokenId> ok = {4};
  const std::vector<TokenId> bos = {Specials::kBos};
  EXPECT_THROW(forward_logprobs(m, random_frames(rng, 4, 3), ok, bos, false), ShapeError);
  EXPECT_THROW(forward_logprobs(m, random_frames(rng, 2, 5), ok, bos, false), ShapeError);
  const std::vector<TokenId> long_ctx(7, 4);
  EXPECT_THROW(forward_logprobs(m, random_frames(rng, 2, 3), long_ctx, bos, false), ShapeError);
  const std::vector<TokenId> bad = {9};
  EXPECT_THROW(forward_logprobs(m, random_frames(rng, 2, 3), bad, bos, false), ShapeError);
  const std::vector<TokenId> long_in(6, 4);
  EXPECT_THROW(forward_logprobs(m, random_frames(rng, 2, 3), ok, long_in, false), ShapeError);
  const std::vector<TokenId> empty;
  EXPECT_THROW(forward_logprobs(m, random_frames(rng, 2, 3), ok, empty, false), ShapeError);
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  const ModelConfig c = tiny_config();
  ModelState m = randomized(c, 11);
  Rng rng(6);
  const std::vector<TrainingExample> batch = {
      example(rng, c, {4, 5, Specials::kEos, 6}, {7, 8}),
      example(rng, c, {8, Specials::kPad}, {4, 5, 6, 7, 8, 4})};
  const auto lg = loss_and_grads(m, batch);
  EXPECT_EQ(lg.n_valid, 3u + 5u);
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t i = 0; i < m.tensor_count(); ++i) {
    for (Eigen::Index k = 0; k < m.param(i).size(); ++k) {
      const double orig = m.param(i)(k);
      m.param(i)(k) = orig + h;
      const double up = mean_loss(m, batch);
      m.param(i)(k) = orig - h;
      const double down = mean_loss(m, batch);
      m.param(i)(k) = orig;
      const double numeric = (up - down) / (2 * h);
      const double analytic = lg.grads[i](k);
      const double rel = std::abs(analytic - numeric) /
                         std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
      worst = std::max(worst, rel);
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Loss, MatchesPerTokenCe) {
  const ModelConfig c = tiny_config();
  const ModelState m = randomized(c, 12);
  Rng rng(7);
  const auto ex = example(rng, c, {4, 5}, {6, 7, 8});
  const std::vector<TrainingExample> batch = {ex};
  const auto tl = per_token_ce(m, ex.frames, ex.context_ids, ex.target_ids);
  ASSERT_EQ(tl.losses.size(), c.max_target + 1);
  EXPECT_EQ(tl.valid_count(), 4u);
  EXPECT_FALSE(tl.valid_mask[4]);
  EXPECT_NEAR(aggregate_mean(tl), mean_loss(m, batch), 1e-12);
  const std::vector<TokenId> input = {Specials::kBos, 6, 7, 8};
  const MatrixXd lp = forward_logprobs(m, ex.frames, ex.context_ids, input, false);
  EXPECT_NEAR(tl.losses[0], -lp(0, 6), 1e-12);
  EXPECT_NEAR(tl.losses[3], -lp(3, Specials::kEos), 1e-12);
  // Candidates longer than max_target are truncated and flagged.
  const std::vector<TokenId> too_long = {4, 5, 6, 7, 8, 4};
  const auto tr = per_token_ce(m, ex.frames, ex.context_ids, too_long);
  EXPECT_TRUE(tr.truncated);
  EXPECT_EQ(tr.valid_count(), c.max_target + 1);
}

TEST(Loss, DuplicatedBatchIsInvariant) {
  const ModelConfig c = tiny_config();
  const ModelState m = randomized(c, 13);
  Rng rng(8);
  const std::vector<TrainingExample> one = {example(rng, c, {4}, {5, 6})};
  const std::vector<TrainingExample> two = {one[0], one[0]};
  const auto a = loss_and_grads(m, one);
  const auto b = loss_and_grads(m, two);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  for (std::size_t i = 0; i < a.grads.size(); ++i) {
    EXPECT_LE((a.grads[i] - b.grads[i]).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_THROW(loss_and_grads(m, std::span<const TrainingExample>{}), PreconditionError);
}

std::vector<TrainingExample> toy_examples(const ModelConfig& c, std::size_t n) {
  Rng rng(9);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const TokenId a = static_cast<TokenId>(4 + i % 5);
    out.push_back(example(rng, c, {a}, {a, static_cast<TokenId>(4 + (i + 1) % 5)}));
  }
  return out;
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const ModelConfig c = tiny_config();
  const ModelState m = init_model(c, 1);
  OptimizerConfig o;
  o.learning_rate = 0.0;
  o.batch_size = 3;
  const auto ex = toy_examples(c, 7);
  const auto r = train(m, ex, o, 2, 5);
  EXPECT_EQ(r.model, m);
  EXPECT_EQ(r.epoch_losses.size(), 2u);
}

TEST(Train, DeterministicAndLearns) {
  const ModelConfig c = tiny_config();
  OptimizerConfig o;
  o.learning_rate = 0.01;
  o.batch_size = 4;
  const auto ex = toy_examples(c, 10);
  std::vector<std::size_t> seen;
  const auto a = train(init_model(c, 1), ex, o, 30, 5,
                       [&](std::size_t e, double) { seen.push_back(e); });
  const auto b = train(init_model(c, 1), ex, o, 30, 5);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_LT(a.epoch_losses.back(), 0.7 * a.epoch_losses.front());
  const auto other = train(init_model(c, 1), ex, o, 1, 6);
  EXPECT_FALSE(other.model == a.model);
}

TEST(Train, DivergenceKeepsLastGoodModel) {
  const ModelConfig c = tiny_config();
  OptimizerConfig o;
  o.learning_rate = 1e300;
  o.batch_size = 2;
  const auto ex = toy_examples(c, 6);
  try {
    train(init_model(c, 1), ex, o, 3, 1);
    FAIL() << "expected TrainingDiverged";
  } catch (const TrainingDiverged& e) {
    EXPECT_TRUE(e.last_good().all_finite());
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
  }
}

TEST(Generate, GreedyRespectsLimits) {
  const ModelConfig c = tiny_config();
  ModelState m = randomized(c, 14);
  Rng rng(10);
  const MatrixXd f = random_frames(rng, 2, 3);
  const std::vector<TokenId> ctx = {4};
  m.param("out.b").setZero();
  m.param("out.b")(0, 6) = 100.0;  // token 6 dominates every step
  EXPECT_EQ(generate_greedy(m, f, ctx, 1), (std::vector<TokenId>{6}));
  EXPECT_EQ(generate_greedy(m, f, ctx, 99).size(), c.max_target);
  EXPECT_TRUE(generate_greedy(m, f, ctx, 0).empty());
  m.param("out.b")(0, Specials::kEos) = 200.0;
  EXPECT_TRUE(generate_greedy(m, f, ctx, 5).empty());
}

TEST(Scorer, BatchMatchesSingleAndTailTruncatesContext) {
  ModelConfig c = tiny_config();
  const Vocab vocab({"a", "b", "c", "d", "e"});
  c.vocab_size = vocab.size();
  const TransformerScorer s(randomized(c, 15), vocab);
  Rng rng(11);
  SampleInputs in;
  in.sample_id = "x";
  for (int i = 0; i < 2; ++i) {
    std::vector<float> row;
    for (int k = 0; k < 3; ++k) row.push_back(static_cast<float>(rng.uniform(-1, 1)));
    in.frames.push_back(row);
  }
  in.context_ids = {4, 5, 6, 7, 8, 4, 5, 6};  // longer than max_context
  const std::vector<Tokens> cands = {{"a", "b"}, {"c"}, {"zzz", "d", "e"}};
  const auto batch = s.score_batch(in, cands);
  const MatrixXd f = frames_matrix(in.frames, 3);
  const std::vector<TokenId> tail(in.context_ids.end() - 6, in.context_ids.end());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto one = s.per_token_losses(in, cands[i]);
    EXPECT_EQ(one.losses, batch[i].losses);
    const auto direct = per_token_ce(s.model(), f, tail, vocab.encode(cands[i]));
    EXPECT_EQ(direct.losses, batch[i].losses);
  }
  EXPECT_THROW(TransformerScorer(init_model(tiny_config(), 1), Vocab({"a"})), PreconditionError);
}

TEST(Checkpoint, RoundTrip) {
  ModelConfig c = tiny_config();
  const Vocab vocab({"a", "b", "c", "d", "e"});
  const ModelState m = randomized(c, 16);
  const auto path = std::filesystem::temp_directory_path() / "alvc_ckpt_test.json";
  save_checkpoint(m, vocab, path);
  const auto ck = load_checkpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(ck.model, m);
  EXPECT_EQ(ck.vocab.tokens(), vocab.tokens());
  EXPECT_THROW(load_checkpoint(path), Error);
}

TEST(Examples, OnePerGroundTruth) {
  Corpus corpus;
  corpus.videos.push_back(
      testing::make_video("v", "t", 4, {{1, "a b"}, {1, "c"}, {3, "a a a a a a a"}}, 3));
  const Vocab vocab({"a", "b", "c"});
  ModelConfig c = tiny_config();
  c.vocab_size = vocab.size();
  const auto ex = make_training_examples(corpus, vocab, {.m = 2, .n = 1, .g = 2, .gt_window_s = 0},
                                         c);
  std::size_t gts = 0;
  for (const auto& s : build_samples(corpus, {.m = 2, .n = 1, .g = 2, .gt_window_s = 0})) {
    gts += s.ground_truth_refs.size();
  }
  EXPECT_EQ(ex.size(), gts);
  for (const auto& e : ex) {
    EXPECT_LE(e.target_ids.size(), c.max_target);
    EXPECT_EQ(e.frames.cols(), 3);
  }
}

}  // namespace
}  // namespace alvc
