// core/src/vocab.cc

// Copyright 2026  NPASR Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "npasr/vocab.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "npasr/error.h"
#include "npasr/unicode.h"

namespace npasr {

namespace {
constexpr char kPadLiteral[] = "<pad>";
constexpr char kUnkLiteral[] = "<unk>";
constexpr char kBlankLiteral[] = "<blank>";
constexpr char32_t kReplacementChar = 0xfffd;
}  // namespace

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw Error("build_vocab: empty corpus");
  std::set<char32_t> unique;
  for (const auto& text : corpus) {
    for (char32_t cp : decode_utf8(text)) unique.insert(cp);
  }
  return from_characters(std::vector<char32_t>(unique.begin(), unique.end()));
}

Vocabulary Vocabulary::from_characters(std::vector<char32_t> characters) {
  Vocabulary v;
  v.characters_ = std::move(characters);
  for (std::size_t i = 0; i < v.characters_.size(); ++i) {
    const bool inserted =
        v.char_to_id_.emplace(v.characters_[i], static_cast<int>(i) + 2).second;
    if (!inserted) {
      throw Error("vocabulary: duplicate character " +
                  encode_utf8(v.characters_[i]));
    }
  }
  return v;
}

LabelSequence Vocabulary::encode(std::string_view text) const {
  LabelSequence ids;
  const std::u32string cps = decode_utf8(text);
  ids.reserve(cps.size());
  for (char32_t cp : cps) {
    auto it = char_to_id_.find(cp);
    ids.push_back(it == char_to_id_.end() ? unk_id() : it->second);
  }
  return ids;
}

std::string Vocabulary::decode_ids(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) {
      throw Error(detail::str_cat("decode_ids: id ", id, " out of range [0, ",
                                  size(), ")"));
    }
    if (id == pad_id() || id == blank_id()) continue;
    if (id == unk_id()) {
      out += encode_utf8(kReplacementChar);
    } else {
      out += encode_utf8(characters_[static_cast<std::size_t>(id - 2)]);
    }
  }
  return out;
}

std::string Vocabulary::to_text() const {
  std::string out;
  out += kPadLiteral;
  out += '\n';
  out += kUnkLiteral;
  out += '\n';
  for (char32_t cp : characters_) {
    out += encode_utf8(cp);
    out += '\n';
  }
  out += kBlankLiteral;
  out += '\n';
  return out;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  // A trailing newline leaves no dangling line; an empty final line from
  // other writers is not a token.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.size() < 3) throw FormatError("vocabulary file: fewer than 3 tokens");
  if (lines.front() != kPadLiteral) {
    throw FormatError("vocabulary file: first token must be <pad>");
  }
  if (lines[1] != kUnkLiteral) {
    throw FormatError("vocabulary file: second token must be <unk>");
  }
  if (lines.back() != kBlankLiteral) {
    throw FormatError("vocabulary file: last token must be <blank>");
  }
  std::vector<char32_t> characters;
  for (std::size_t i = 2; i + 1 < lines.size(); ++i) {
    const std::u32string cps = decode_utf8(lines[i]);
    if (cps.size() != 1) {
      throw FormatError(detail::str_cat("vocabulary file: line ", i + 1,
                                        " is not a single character"));
    }
    characters.push_back(cps[0]);
  }
  return from_characters(std::move(characters));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path);
  os << to_text();
  os.flush();
  if (!os) throw Error("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open vocabulary: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_text(buf.str());
}

}  // namespace npasr
