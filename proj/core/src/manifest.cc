// core/src/manifest.cc

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

#include "npasr/manifest.h"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "npasr/error.h"
#include "npasr/unicode.h"

namespace npasr {

std::vector<ManifestEntry> parse_manifest_text(std::string_view text) {
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t t1 = line.find('\t');
    if (t1 == std::string_view::npos) {
      throw FormatError(detail::str_cat("manifest line ", line_no,
                                        ": fewer than 2 tab-separated columns"));
    }
    ManifestEntry entry;
    entry.utterance_id = std::string(line.substr(0, t1));
    const std::size_t t2 = line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      entry.transcription = std::string(line.substr(t1 + 1));
    } else {
      entry.speaker_id = std::string(line.substr(t1 + 1, t2 - t1 - 1));
      entry.transcription = std::string(line.substr(t2 + 1));
    }
    if (entry.utterance_id.empty()) {
      throw FormatError(detail::str_cat("manifest line ", line_no, ": empty utterance id"));
    }
    if (!seen.insert(entry.utterance_id).second) {
      throw FormatError(detail::str_cat("manifest line ", line_no, ": duplicate utterance id '",
                                        entry.utterance_id, "'"));
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<ManifestEntry> parse_manifest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open manifest: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_manifest_text(buf.str());
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path);
  for (const auto& e : entries) {
    os << e.utterance_id << '\t' << e.speaker_id << '\t' << e.transcription << '\n';
  }
  os.flush();
  if (!os) throw Error("write failed: " + path);
}

bool has_digit(std::string_view transcription) {
  for (char32_t cp : decode_utf8(transcription)) {
    if ((cp >= U'0' && cp <= U'9') || (cp >= 0x0966 && cp <= 0x096f)) return true;
  }
  return false;
}

std::vector<ManifestEntry> filter_numeric(const std::vector<ManifestEntry>& entries) {
  std::vector<ManifestEntry> kept;
  kept.reserve(entries.size());
  for (const auto& e : entries) {
    if (!has_digit(e.transcription)) kept.push_back(e);
  }
  return kept;
}

}  // namespace npasr
