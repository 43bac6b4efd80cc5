// core/include/npasr/vocab.h

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

#ifndef NPASR_VOCAB_H_
#define NPASR_VOCAB_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace npasr {

// Target label ids. Never contains the blank or pad id.
using LabelSequence = std::vector<int>;

// Character inventory: [pad, unk, characters..., blank]. Characters are
// Unicode scalar values in ascending code-point order, so rebuilding from
// the same corpus reproduces the same ids.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Corpus transcriptions must already be numeric-filtered. Throws on an
  // empty corpus.
  static Vocabulary build(const std::vector<std::string>& corpus);

  // Characters keep the given order (ids follow positions); used by the
  // file loader. Throws on duplicates.
  static Vocabulary from_characters(std::vector<char32_t> characters);

  int size() const { return static_cast<int>(characters_.size()) + 3; }
  int pad_id() const { return 0; }
  int unk_id() const { return 1; }
  int blank_id() const { return size() - 1; }

  const std::vector<char32_t>& characters() const { return characters_; }

  // One id per Unicode scalar value; unknown characters map to unk_id.
  LabelSequence encode(std::string_view text) const;

  // Concatenates tokens: pad and blank render empty, unk renders U+FFFD.
  // Throws on out-of-range ids.
  std::string decode_ids(const std::vector<int>& ids) const;

  // File format: one token per line, specials as literal <pad>, <unk>,
  // <blank>; line order defines ids.
  std::string to_text() const;
  static Vocabulary from_text(std::string_view text);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<char32_t> characters_;
  std::unordered_map<char32_t, int> char_to_id_;
};

}  // namespace npasr

#endif  // NPASR_VOCAB_H_
