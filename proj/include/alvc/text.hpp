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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace alvc {

struct Corpus;

using Tokens = std::vector<std::string>;
using TokenId = int;

/// Splits on whitespace, then breaks every run of CJK characters into single
/// characters. Non-CJK runs inside a chunk stay whole: "ab中文cd" gives
/// ["ab", "中", "文", "cd"]. U+3000 counts as whitespace.
Tokens tokenize(std::string_view text);

/// Trims and collapses internal whitespace runs to one ASCII space.
std::string normalize_whitespace(std::string_view text);

/// True for code points treated as CJK by the tokenizer.
bool is_cjk(char32_t cp);

/// Fixed special ids.
struct Specials {
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr TokenId kCount = 4;
};

class Vocab {
 public:
  static constexpr std::size_t kDefaultMaxSize = 30000;

  Vocab() = default;

  /// `tokens` are the non-special entries in id order (first gets id 4).
  /// Throws IntegrityError on duplicates.
  explicit Vocab(std::vector<std::string> tokens,
                 std::size_t max_size = kDefaultMaxSize);

  /// Total size including the four specials.
  std::size_t size() const { return tokens_.size() + Specials::kCount; }
  std::size_t max_size() const { return max_size_; }

  /// Non-special entries in id order.
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  /// Throws RangeError for ids outside [0, size()).
  Tokens decode(std::span<const TokenId> ids) const;

  /// One token per line; line i holds id i + 4.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path,
                    std::size_t max_size = kDefaultMaxSize);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t max_size_ = kDefaultMaxSize;
};

/// Frequency-descending, byte-lexicographic tie-break, truncated to max_size.
Vocab build_vocab(std::span<const Tokens> documents, std::size_t max_size);

/// Builds from the token fields of every comment. Pass the training split
/// only.
Vocab build_vocab(const Corpus& train, std::size_t max_size);

}  // namespace alvc
