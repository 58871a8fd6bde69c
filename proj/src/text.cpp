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

#include "alvc/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "alvc/corpus.hpp"
#include "alvc/error.hpp"

namespace alvc {

namespace {

const std::string kSpecialNames[Specials::kCount] = {"<pad>", "<unk>", "<s>",
                                                     "</s>"};

// Decodes one UTF-8 sequence at `pos`. Invalid bytes decode as themselves
// with length 1 so the tokenizer never fails.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  int need = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    len = 1;
    return b0;
  }
  for (int i = 1; i <= need; ++i) {
    const int c = cont(static_cast<std::size_t>(i));
    if (c < 0) {
      len = 1;
      return b0;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  len = static_cast<std::size_t>(need) + 1;
  return cp;
}

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\v' || cp == U'\f' || cp == 0x3000;
}

}  // namespace

bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // unified ideographs
         (cp >= 0x3400 && cp <= 0x4DBF) ||    // extension A
         (cp >= 0x20000 && cp <= 0x2FA1F) ||  // extensions B-F, compat supp.
         (cp >= 0xF900 && cp <= 0xFAFF) ||    // compatibility ideographs
         (cp >= 0x3001 && cp <= 0x303F) ||    // CJK symbols and punctuation
         (cp >= 0x3040 && cp <= 0x30FF) ||    // kana
         (cp >= 0xFF00 && cp <= 0xFFEF);      // half/full width forms
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string run;
  auto flush = [&] {
    if (!run.empty()) {
      out.push_back(std::move(run));
      run.clear();
    }
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_utf8(text, pos, len);
    const std::string_view bytes = text.substr(pos, len);
    if (is_space(cp)) {
      flush();
    } else if (is_cjk(cp)) {
      flush();
      out.emplace_back(bytes);
    } else {
      run.append(bytes);
    }
    pos += len;
  }
  flush();
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_utf8(text, pos, len);
    if (is_space(cp)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.append(text.substr(pos, len));
    }
    pos += len;
  }
  return out;
}

Vocab::Vocab(std::vector<std::string> tokens, std::size_t max_size)
    : tokens_(std::move(tokens)), max_size_(max_size) {
  if (tokens_.size() > max_size_) {
    throw SizeError("vocab has " + std::to_string(tokens_.size()) +
                    " entries, max_size is " + std::to_string(max_size_));
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto id = static_cast<TokenId>(i) + Specials::kCount;
    if (!index_.emplace(tokens_[i], id).second) {
      throw IntegrityError("duplicate vocab entry '" + tokens_[i] + "'");
    }
  }
}

TokenId Vocab::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? Specials::kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw RangeError("token id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(size()) + ")");
  }
  if (id < Specials::kCount) return kSpecialNames[id];
  return tokens_[static_cast<std::size_t>(id - Specials::kCount)];
}

bool Vocab::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Tokens Vocab::decode(std::span<const TokenId> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId i : ids) out.push_back(token(i));
  return out;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& t : tokens_) {
    if (t.find('\n') != std::string::npos) {
      throw IntegrityError("vocab token contains a newline");
    }
    os << t << '\n';
  }
}

Vocab Vocab::load(const std::filesystem::path& path, std::size_t max_size) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) tokens.push_back(line);
  return Vocab(std::move(tokens), std::max(max_size, tokens.size()));
}

Vocab build_vocab(std::span<const Tokens> documents, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& t : doc) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  // std::map iterates in byte order already; stable_sort keeps it for ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [t, c] : ranked) tokens.push_back(std::move(t));
  return Vocab(std::move(tokens), max_size);
}

Vocab build_vocab(const Corpus& train, std::size_t max_size) {
  std::vector<Tokens> docs;
  for (const auto& v : train.videos) {
    for (const auto& c : v.comments) docs.push_back(c.tokens);
  }
  return build_vocab(std::span<const Tokens>(docs), max_size);
}

}  // namespace alvc
