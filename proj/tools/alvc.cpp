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

// alvc: command-line front end for the retrieval evaluation workbench.
//
//   alvc <subcommand> --config <path> [overrides] [--out <dir>]
//
// Exit status: 0 on success, 1 when a pipeline stage fails, 2 on usage
// errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alvc/corpus.hpp"
#include "alvc/error.hpp"
#include "alvc/experiment.hpp"
#include "alvc/metrics.hpp"
#include "alvc/neural.hpp"
#include "alvc/retrieval.hpp"
#include "alvc/rng.hpp"
#include "alvc/scoring.hpp"
#include "alvc/splitter.hpp"
#include "alvc/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct StageFailure {
  std::string stage;
  std::string what;
};

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw StageFailure{name, e.what()};
  }
}

// Flags that override the config file.
struct Overrides {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> aggregation;
  std::optional<std::string> direction;
  std::optional<std::string> query_source;
  std::optional<std::string> mask;
  std::optional<std::string> dataset;
  std::optional<std::string> scorer;
  std::optional<std::string> model_path;
  std::optional<std::size_t> max_samples;
  std::optional<std::size_t> epochs;
};

// --mask names the modalities left on.
alvc::InputMask mask_from_flag(const std::string& s) {
  if (s == "text") return alvc::InputMask::kTextOnly;
  if (s == "visual") return alvc::InputMask::kVisualOnly;
  if (s == "both-on") return alvc::InputMask::kTextVisual;
  return alvc::input_mask_from_string(s);
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Experiment config (JSON)")->required();
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--aggregation", o.aggregation, "sum|mean")
      ->check(CLI::IsMember({"sum", "mean"}));
  cmd->add_option("--direction", o.direction, "asc|desc")
      ->check(CLI::IsMember({"asc", "desc", "ascending", "descending"}));
  cmd->add_option("--query-source", o.query_source, "title|context")
      ->check(CLI::IsMember({"title", "context"}));
  cmd->add_option("--mask", o.mask, "text|visual|both-on")
      ->check(CLI::IsMember({"text", "visual", "both-on", "text_only", "visual_only", "text_visual"}));
  cmd->add_option("--dataset", o.dataset, "provided|dedup")
      ->check(CLI::IsMember({"provided", "dedup"}));
  cmd->add_option("--scorer", o.scorer, "ngram|transformer")
      ->check(CLI::IsMember({"ngram", "transformer"}));
  cmd->add_option("--model", o.model_path, "Trained model file");
  cmd->add_option("--max-samples", o.max_samples, "Evaluate at most N test samples");
  cmd->add_option("--epochs", o.epochs, "Transformer training epochs");
}

alvc::ExperimentConfig resolve_config(const Overrides& o) {
  auto c = alvc::load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.aggregation) c.aggregation = alvc::aggregation_from_string(*o.aggregation);
  if (o.direction) c.direction = alvc::direction_from_string(*o.direction);
  if (o.query_source) c.query_source = alvc::query_source_from_string(*o.query_source);
  if (o.mask) c.mask = mask_from_flag(*o.mask);
  if (o.dataset) c.dataset = alvc::dataset_mode_from_string(*o.dataset);
  if (o.scorer) c.scorer = alvc::scorer_kind_from_string(*o.scorer);
  if (o.model_path) c.model_path = *o.model_path;
  if (o.max_samples) c.max_samples = *o.max_samples;
  if (o.epochs) c.epochs = *o.epochs;
  return c;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw alvc::Error("cannot write " + path.string());
  return os;
}

void write_json(const fs::path& path, const ordered_json& j) { open_out(path) << j.dump(2) << '\n'; }

void config_line(std::ostream& os, const alvc::ExperimentConfig& c) {
  os << "# config: " << alvc::config_to_json(c).dump() << '\n';
}

ordered_json stats_json(const alvc::CorpusStats& s) {
  ordered_json j;
  j["videos"] = s.n_videos;
  j["comments"] = s.n_comments;
  j["words"] = s.n_words;
  j["avg_words"] = s.avg_words();
  j["total_duration_hrs"] = s.total_duration_hrs();
  j["empty"] = s.empty_warning;
  return j;
}

int cmd_stats(const alvc::ExperimentConfig& c, const fs::path& out) {
  std::vector<std::pair<std::string, alvc::CorpusStats>> cols;
  stage("load data", [&] {
    if (!c.raw_path.empty()) cols.emplace_back("Raw", alvc::corpus_stats(alvc::load_corpus(c.raw_path)));
    if (!c.train_path.empty() && !c.test_path.empty()) {
      const auto d = alvc::load_splits(c, c.dataset);
      cols.emplace_back("Train", alvc::corpus_stats(d.train));
      if (!c.dev_path.empty()) cols.emplace_back("Dev", alvc::corpus_stats(d.dev));
      cols.emplace_back("Test", alvc::corpus_stats(d.test));
    }
    if (cols.empty()) throw alvc::PreconditionError("config names no corpus");
  });
  stage("write report", [&] {
    std::ostringstream table;
    alvc::write_stats_tsv(table, cols);
    auto os = open_out(out / "stats.tsv");
    config_line(os, c);
    os << table.str();
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    ordered_json columns;
    for (const auto& [name, s] : cols) columns[name] = stats_json(s);
    j["columns"] = std::move(columns);
    write_json(out / "stats.json", j);
    std::cout << table.str();
  });
  return 0;
}

int cmd_dedup(const alvc::ExperimentConfig& c, const fs::path& out) {
  if (c.raw_path.empty()) throw StageFailure{"load data", "config needs raw_path"};
  const auto raw = stage("load data", [&] { return alvc::load_corpus(c.raw_path); });
  const auto groups = stage("find duplicates", [&] { return alvc::find_duplicate_videos(raw); });
  const auto kept = stage("dedup", [&] { return alvc::dedup(raw); });
  stage("write report", [&] {
    alvc::save_corpus(kept, out / "dedup.jsonl");
    auto os = open_out(out / "duplicates.tsv");
    config_line(os, c);
    os << "title\tmembers\n";
    for (const auto& g : groups) {
      os << g.key << '\t';
      for (std::size_t i = 0; i < g.member_video_ids.size(); ++i) {
        os << (i ? "," : "") << g.member_video_ids[i];
      }
      os << '\n';
    }
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    j["videos_in"] = raw.videos.size();
    j["duplicate_groups"] = groups.size();
    j["removed"] = alvc::redundant_video_count(groups);
    j["videos_out"] = kept.videos.size();
    write_json(out / "dedup.json", j);
    std::printf("%zu duplicate groups, removed %zu of %zu videos\n", groups.size(),
                alvc::redundant_video_count(groups), raw.videos.size());
  });
  return 0;
}

std::size_t title_leakage(const alvc::Corpus& train, const alvc::Corpus& held_out) {
  std::set<std::string> titles;
  for (const auto& v : train.videos) titles.insert(alvc::title_key(v.title));
  std::size_t n = 0;
  for (const auto& v : held_out.videos) n += titles.count(alvc::title_key(v.title));
  return n;
}

int cmd_split(const alvc::ExperimentConfig& c, const fs::path& out) {
  if (c.raw_path.empty()) throw StageFailure{"load data", "config needs raw_path"};
  auto corpus = stage("load data", [&] { return alvc::load_corpus(c.raw_path); });
  if (c.dataset == alvc::DatasetMode::kDedup) corpus = stage("dedup", [&] { return alvc::dedup(corpus); });
  const auto a = stage("split", [&] {
    return alvc::split(corpus, c.split_train, c.split_dev, c.split_test, c.seed);
  });
  stage("write report", [&] {
    const auto train = alvc::select(corpus, a.train, alvc::SplitTag::kTrain);
    const auto dev = alvc::select(corpus, a.dev, alvc::SplitTag::kDev);
    const auto test = alvc::select(corpus, a.test, alvc::SplitTag::kTest);
    alvc::save_corpus(train, out / "train.jsonl");
    alvc::save_corpus(dev, out / "dev.jsonl");
    alvc::save_corpus(test, out / "test.jsonl");
    const auto overlap = alvc::cross_split_overlap(train, test);
    auto os = open_out(out / "overlap.tsv");
    config_line(os, c);
    alvc::write_overlap_tsv(os, overlap);
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    j["assignment"] = ordered_json::parse(alvc::split_to_json(a));
    j["test_comments"] = overlap.n_test_comments;
    j["test_comments_in_train"] = overlap.n_overlapping;
    j["duplicate_title_leakage"] = title_leakage(train, dev) + title_leakage(train, test);
    write_json(out / "split.json", j);
    std::printf("train %zu, dev %zu, test %zu videos; %zu of %zu test comments also in train\n",
                a.train.size(), a.dev.size(), a.test.size(), overlap.n_overlapping,
                overlap.n_test_comments);
  });
  return 0;
}

int cmd_build_candidates(const alvc::ExperimentConfig& c, const fs::path& out) {
  const auto data = stage("load data", [&] { return alvc::load_splits(c, c.dataset); });
  const auto pool = stage("index training comments", [&] { return alvc::CandidatePool(data.train); });
  auto samples = stage("build samples", [&] { return alvc::build_samples(data.test, c.samples); });
  if (c.max_samples > 0 && samples.size() > c.max_samples) samples.resize(c.max_samples);
  std::vector<std::string> lines(samples.size());
  stage("build candidates", [&] {
    alvc::parallel_for(samples.size(), alvc::worker_count(), [&](std::size_t i) {
      const auto cs = alvc::build_candidate_set(samples[i], data.test, pool, c.query_source,
                                                alvc::derive_seed(c.seed, i));
      lines[i] = alvc::candidate_set_to_jsonl(cs, samples[i]);
    });
  });
  stage("write report", [&] {
    auto os = open_out(out / "candidates.jsonl");
    for (const auto& l : lines) os << l << '\n';
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    j["samples"] = samples.size();
    j["popular_warning"] = pool.popular.texts.size() < pool.popular_k;
    write_json(out / "candidates.json", j);
    std::printf("%zu candidate sets\n", samples.size());
  });
  return 0;
}

int cmd_train_ngram(const alvc::ExperimentConfig& c, const fs::path& out) {
  const auto data = stage("load data", [&] { return alvc::load_splits(c, c.dataset); });
  const auto vocab = stage("build vocab", [&] { return alvc::build_vocab(data.train, c.vocab_size); });
  const auto model = stage("train", [&] { return alvc::train_ngram(data.train, vocab, 2, c.ngram_alpha); });
  stage("write report", [&] {
    fs::create_directories(out);
    model.save(out / "ngram.json");
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    j["vocab_size"] = vocab.size();
    j["model"] = (out / "ngram.json").string();
    write_json(out / "train_ngram.json", j);
    std::printf("bigram model over %zu tokens -> %s\n", vocab.size(), (out / "ngram.json").c_str());
  });
  return 0;
}

int cmd_train_transformer(const alvc::ExperimentConfig& c, const fs::path& out) {
  const auto data = stage("load data", [&] { return alvc::load_splits(c, c.dataset); });
  const auto vocab = stage("build vocab", [&] { return alvc::build_vocab(data.train, c.vocab_size); });
  const auto mc = stage("configure model", [&] {
    auto m = alvc::resolve_model_config(c, data.train, vocab);
    m.validate();
    return m;
  });
  const auto examples = stage("build examples", [&] {
    return alvc::make_training_examples(data.train, vocab, c.samples, mc);
  });
  std::vector<double> losses;
  const auto result = stage("train", [&] {
    try {
      return alvc::train(alvc::init_model(mc, alvc::derive_seed(c.seed, 1)), examples, c.optimizer,
                         c.epochs, alvc::derive_seed(c.seed, 2), [&](std::size_t e, double loss) {
                           std::fprintf(stderr, "epoch %zu loss %.6f\n", e + 1, loss);
                         });
    } catch (const alvc::TrainingDiverged& e) {
      fs::create_directories(out);
      alvc::save_checkpoint(e.last_good(), vocab, out / "transformer.last_good.json");
      throw;
    }
  });
  stage("write report", [&] {
    fs::create_directories(out);
    alvc::save_checkpoint(result.model, vocab, out / "transformer.json");
    auto os = open_out(out / "train_log.tsv");
    config_line(os, c);
    os << "epoch\ttrain_loss\n";
    char buf[64];
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", e + 1, result.epoch_losses[e]);
      os << buf;
    }
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    j["examples"] = examples.size();
    j["parameters"] = result.model.parameter_count();
    j["epoch_losses"] = result.epoch_losses;
    write_json(out / "train_transformer.json", j);
  });
  return 0;
}

int cmd_evaluate(const alvc::ExperimentConfig& c, const fs::path& out) {
  const auto data = stage("load data", [&] { return alvc::load_splits(c, c.dataset); });
  const auto ts = stage("prepare scorer", [&] { return alvc::make_scorer(c, data.train); });
  const auto scored = stage("score candidates", [&] {
    return alvc::score_samples(*ts.scorer, ts.vocab, data, c, c.query_source, c.mask,
                               alvc::worker_count());
  });
  const auto rankings = stage("rank", [&] {
    return alvc::rank_samples(scored, c.aggregation, c.direction, c.include_masked);
  });
  const auto report = stage("evaluate", [&] { return alvc::evaluate(rankings, c.recall_mode, c.rank_mode); });
  stage("write report", [&] {
    {
      auto os = open_out(out / "rankings.tsv");
      config_line(os, c);
      alvc::write_rankings_tsv_header(os);
      for (const auto& r : rankings) alvc::write_ranking_tsv(os, r);
    }
    auto os = open_out(out / "report.tsv");
    alvc::write_report_tsv(os, c, report);
    std::size_t truncated = 0;
    for (const auto& r : rankings) truncated += r.any_truncated ? 1 : 0;
    ordered_json j;
    j["config"] = alvc::config_to_json(c);
    j["report"] = alvc::report_to_json(report);
    j["samples_with_truncated_candidates"] = truncated;
    write_json(out / "report.json", j);
    std::cout << alvc::metric_tsv_header() << '\n' << alvc::metric_tsv_cells(report) << '\n';
  });
  return 0;
}

int cmd_matrix(const alvc::ExperimentConfig& c, const fs::path& out) {
  const auto rows = stage("matrix", [&] { return alvc::run_matrix(c, alvc::worker_count()); });
  stage("write report", [&] {
    std::ostringstream table;
    alvc::write_matrix_tsv(table, c, rows);
    open_out(out / "matrix.tsv") << table.str();
    write_json(out / "matrix.json", alvc::matrix_to_json(c, rows));
    std::cout << table.str().substr(table.str().find('\n') + 1);
  });
  return 0;
}

struct SynthOptions {
  std::string out_dir = "out";
  alvc::SyntheticParams params;
};

int cmd_synth(const SynthOptions& o) {
  const fs::path out = o.out_dir;
  const auto corpus = stage("generate", [&] { return alvc::make_synthetic_corpus(o.params); });
  stage("write report", [&] {
    alvc::save_corpus(corpus, out / "raw.jsonl");
    // A ready-to-run config: dedup, then an 80/10/10 split.
    const std::size_t unique = o.params.n_videos;
    alvc::ExperimentConfig c;
    c.raw_path = "raw.jsonl";
    c.train_path = "train.jsonl";
    c.dev_path = "dev.jsonl";
    c.test_path = "test.jsonl";
    c.dataset = alvc::DatasetMode::kDedup;
    c.split_dev = unique / 10;
    c.split_test = unique / 10;
    c.split_train = unique - c.split_dev - c.split_test;
    c.seed = o.params.seed;
    c.max_samples = 200;
    c.vocab_size = 1000;
    c.epochs = 3;
    c.matrix_query_sources = {alvc::QuerySource::kTitle, alvc::QuerySource::kContext};
    c.matrix_datasets = {alvc::DatasetMode::kProvided, alvc::DatasetMode::kDedup};
    write_json(out / "config.json", alvc::config_to_json(c));
    std::printf("%zu videos -> %s\n", corpus.videos.size(), (out / "raw.jsonl").c_str());
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ALVC retrieval evaluation workbench"};
  app.require_subcommand(1);
  Overrides o;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const alvc::ExperimentConfig&, const fs::path&);
  };
  const std::vector<Command> commands = {
      {"stats", "Corpus statistics per split", cmd_stats},
      {"dedup", "Collapse videos that share a title", cmd_dedup},
      {"split", "Seeded train/dev/test split with leakage audit", cmd_split},
      {"build-candidates", "Write the 100-candidate sets for test samples", cmd_build_candidates},
      {"train-ngram", "Train the bigram baseline", cmd_train_ngram},
      {"train-transformer", "Train the unified transformer", cmd_train_transformer},
      {"evaluate", "Rank candidates and report retrieval metrics", cmd_evaluate},
      {"matrix", "Evaluate every combination of the configured modes", cmd_matrix},
  };
  std::vector<CLI::App*> subs;
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub, o);
    subs.push_back(sub);
  }
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus and starter config");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory");
  synth_cmd->add_option("--videos", synth.params.n_videos, "Distinct videos");
  synth_cmd->add_option("--duration", synth.params.duration_s, "Seconds per video");
  synth_cmd->add_option("--comments", synth.params.comments_per_video, "Comments per video");
  synth_cmd->add_option("--feature-dim", synth.params.feature_dim, "Frame feature length");
  synth_cmd->add_option("--duplicates", synth.params.duplicate_groups, "Duplicate-title groups");
  synth_cmd->add_option("--triplicates", synth.params.triplicate_groups,
                        "Groups with three members");
  synth_cmd->add_option("--noise", synth.params.noise_fraction, "Share of noise comments");
  synth_cmd->add_option("--seed", synth.params.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string name;
  try {
    if (synth_cmd->parsed()) {
      name = "synth";
      stage("prepare output", [&] { fs::create_directories(synth.out_dir); });
      return cmd_synth(synth);
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      name = commands[i].name;
      const auto config = stage("load config", [&] { return resolve_config(o); });
      stage("prepare output", [&] { fs::create_directories(o.out_dir); });
      return commands[i].run(config, o.out_dir);
    }
  } catch (const StageFailure& f) {
    std::fprintf(stderr, "alvc %s: stage '%s' failed: %s\n", name.c_str(), f.stage.c_str(),
                 f.what.c_str());
    return 1;
  }
  return 2;
}
