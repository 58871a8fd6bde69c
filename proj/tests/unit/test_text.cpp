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

#include <filesystem>
#include <map>

#include "alvc/error.hpp"
#include "alvc/rng.hpp"
#include "alvc/text.hpp"

namespace alvc {
namespace {

TEST(Tokenize, EmptyAndWhitespace) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t\n").empty());
  EXPECT_EQ(tokenize("abc def"), (Tokens{"abc", "def"}));
  EXPECT_EQ(tokenize("  abc\t\tdef \n"), (Tokens{"abc", "def"}));
}

TEST(Tokenize, CjkRunsSplitPerCharacter) {
  EXPECT_EQ(tokenize("前方高"), (Tokens{"前", "方", "高"}));
  // Latin text glued to CJK keeps its own run.
  EXPECT_EQ(tokenize("ok哈哈 yes"), (Tokens{"ok", "哈", "哈", "yes"}));
  // Ideographic space separates tokens too.
  EXPECT_EQ(tokenize("好　看"), (Tokens{"好", "看"}));
  EXPECT_EQ(tokenize("カタ"), (Tokens{"カ", "タ"}));
}

TEST(Tokenize, Deterministic) {
  const std::string s = "2333 前方高能 lol 哈哈哈";
  EXPECT_EQ(tokenize(s), tokenize(s));
}

TEST(Cjk, Ranges) {
  EXPECT_TRUE(is_cjk(U'中'));
  EXPECT_TRUE(is_cjk(U'あ'));
  EXPECT_FALSE(is_cjk(U'a'));
  EXPECT_FALSE(is_cjk(U'é'));
}

TEST(NormalizeWhitespace, TrimsAndCollapses) {
  EXPECT_EQ(normalize_whitespace("  a   b\t c "), "a b c");
  EXPECT_EQ(normalize_whitespace(""), "");
}

TEST(BuildVocab, FrequencyThenLexicographic) {
  const std::vector<Tokens> docs = {{"b", "a", "c"}, {"a", "b"}, {"b", "a"}};
  const Vocab v = build_vocab(docs, 2);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(v.size(), 6u);
}

TEST(BuildVocab, MaxSizeZeroGivesSpecialsOnly) {
  const std::vector<Tokens> docs = {{"x", "y"}};
  const Vocab v = build_vocab(docs, 0);
  EXPECT_TRUE(v.tokens().empty());
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.id("x"), Specials::kUnk);
}

TEST(BuildVocab, MatchesCounterOracle) {
  Rng rng(5);
  std::vector<Tokens> docs(10);
  std::map<std::string, int> counts;
  for (auto& d : docs) {
    for (int i = 0; i < 10; ++i) {
      // Skewed draw so frequencies differ.
      const auto k = rng.below(1 + rng.below(30));
      d.push_back("t" + std::to_string(k));
      ++counts[d.back()];
    }
  }
  std::vector<std::pair<std::string, int>> oracle(counts.begin(), counts.end());
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const Vocab v = build_vocab(docs, 10);
  ASSERT_EQ(v.tokens().size(), std::min<std::size_t>(10, oracle.size()));
  for (std::size_t i = 0; i < v.tokens().size(); ++i) EXPECT_EQ(v.tokens()[i], oracle[i].first);
}

TEST(Vocab, EncodeDecode) {
  const Vocab v({"the", "cat", "sat", "on", "mat"});
  const Tokens in = {"the", "cat", "sat", "on", "the", "mat"};
  const auto ids = v.encode(in);
  EXPECT_EQ(ids, (std::vector<TokenId>{4, 5, 6, 7, 4, 8}));
  EXPECT_EQ(v.decode(ids), in);
  EXPECT_EQ(v.encode(Tokens{"the", "dog"}), (std::vector<TokenId>{4, Specials::kUnk}));
  EXPECT_EQ(v.token(Specials::kPad), "<pad>");
  EXPECT_THROW(v.token(9), RangeError);
  EXPECT_THROW(v.token(-1), RangeError);
}

TEST(Vocab, EncodeNeverEmitsStructuralIds) {
  const Vocab v({"a"});
  for (TokenId id : v.encode(Tokens{"a", "<pad>", "<s>", "</s>", "zzz"})) {
    EXPECT_NE(id, Specials::kPad);
    EXPECT_NE(id, Specials::kBos);
    EXPECT_NE(id, Specials::kEos);
  }
}

TEST(Vocab, RejectsDuplicatesAndOversize) {
  EXPECT_THROW(Vocab({"a", "a"}), IntegrityError);
  EXPECT_THROW(Vocab({"a", "b"}, 1), SizeError);
}

TEST(Vocab, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "alvc_vocab_test.txt";
  const Vocab v({"前", "lol", "b"});
  v.save(path);
  const Vocab w = Vocab::load(path);
  EXPECT_EQ(w.tokens(), v.tokens());
  EXPECT_EQ(w.id("lol"), v.id("lol"));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace alvc
