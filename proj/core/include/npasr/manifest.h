// core/include/npasr/manifest.h

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

#ifndef NPASR_MANIFEST_H_
#define NPASR_MANIFEST_H_

#include <string>
#include <string_view>
#include <vector>

namespace npasr {

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;     // may be empty
  std::string transcription;  // UTF-8
};

// Manifest format: UTF-8, one record per line, tab-separated, no header.
// "id\tspeaker\ttext" or "id\ttext". Extra tabs belong to the transcription.
// Throws FormatError on lines with fewer than two columns or duplicate ids.
std::vector<ManifestEntry> parse_manifest_text(std::string_view text);
std::vector<ManifestEntry> parse_manifest(const std::string& path);

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path);

// Drops every entry whose transcription contains a Devanagari digit
// (U+0966..U+096F) or an ASCII digit. Order preserved; idempotent.
std::vector<ManifestEntry> filter_numeric(const std::vector<ManifestEntry>& entries);

bool has_digit(std::string_view transcription);

}  // namespace npasr

#endif  // NPASR_MANIFEST_H_
