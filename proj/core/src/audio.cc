// core/src/audio.cc

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

#include "npasr/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "npasr/binary_io.h"
#include "npasr/error.h"

namespace npasr {

namespace {

std::string read_tag(std::istream& is, const char* what) {
  char tag[4];
  read_bytes(is, tag, 4, what);
  return std::string(tag, 4);
}

}  // namespace

AudioSignal load_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open WAV file: " + path);

  if (read_tag(is, "RIFF header") != "RIFF") {
    throw FormatError(path + ": missing RIFF chunk id");
  }
  read_u32(is, "RIFF size");
  if (read_tag(is, "WAVE tag") != "WAVE") {
    throw FormatError(path + ": RIFF form type is not WAVE");
  }

  bool have_fmt = false;
  std::uint16_t audio_format = 0, num_channels = 0, bits_per_sample = 0;
  std::uint32_t sample_rate = 0;
  std::vector<double> samples;
  bool have_data = false;

  while (true) {
    char tag[4];
    is.read(tag, 4);
    if (is.gcount() == 0) break;  // clean EOF between chunks
    if (is.gcount() != 4) throw FormatError(path + ": truncated chunk header");
    const std::string chunk_id(tag, 4);
    const std::uint32_t chunk_size = read_u32(is, "chunk size");

    if (chunk_id == "fmt ") {
      if (chunk_size < 16) throw FormatError(path + ": fmt chunk too small");
      audio_format = read_u16(is, "audio format");
      num_channels = read_u16(is, "channel count");
      sample_rate = read_u32(is, "sample rate");
      read_u32(is, "byte rate");
      read_u16(is, "block align");
      bits_per_sample = read_u16(is, "bits per sample");
      is.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
      if (audio_format != 1) {
        throw FormatError(detail::str_cat(path, ": audio format ", audio_format,
                                          " is not PCM (1)"));
      }
      if (num_channels != 1) {
        throw FormatError(detail::str_cat(path, ": channel count ", num_channels,
                                          " (expected 1)"));
      }
      if (bits_per_sample != 16) {
        throw FormatError(detail::str_cat(path, ": bit depth ", bits_per_sample,
                                          " (expected 16)"));
      }
      if (sample_rate == 0) throw FormatError(path + ": sample rate is zero");
    } else if (chunk_id == "data") {
      if (!have_fmt) throw FormatError(path + ": data chunk before fmt chunk");
      if (chunk_size % 2 != 0) {
        throw FormatError(path + ": data chunk size is odd for 16-bit samples");
      }
      const std::size_t n = chunk_size / 2;
      samples.resize(n);
      std::vector<unsigned char> raw(chunk_size);
      read_bytes(is, raw.data(), chunk_size, "sample data");
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(raw[2 * i]) |
            (static_cast<std::uint16_t>(raw[2 * i + 1]) << 8));
        samples[i] = static_cast<double>(v) / 32768.0;
      }
      have_data = true;
      if (chunk_size % 2 == 1) is.seekg(1, std::ios::cur);
    } else {
      // Skip LIST/INFO and other chunks, honoring the even-byte padding rule.
      is.seekg(chunk_size + (chunk_size % 2), std::ios::cur);
      if (!is) throw FormatError(path + ": truncated '" + chunk_id + "' chunk");
    }
  }

  if (!have_fmt) throw FormatError(path + ": missing fmt chunk");
  if (!have_data) throw FormatError(path + ": missing data chunk");

  AudioSignal out;
  out.samples = std::move(samples);
  out.sample_rate = static_cast<int>(sample_rate);
  return out;
}

void save_wav(const AudioSignal& signal, const std::string& path) {
  NPASR_CHECK(signal.sample_rate > 0, "save_wav: sample rate must be positive");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path);

  const std::uint32_t data_size =
      static_cast<std::uint32_t>(signal.samples.size() * 2);
  const std::uint32_t sr = static_cast<std::uint32_t>(signal.sample_rate);

  write_bytes(os, "RIFF", 4);
  write_u32(os, 36 + data_size);
  write_bytes(os, "WAVE", 4);
  write_bytes(os, "fmt ", 4);
  write_u32(os, 16);
  write_u16(os, 1);   // PCM
  write_u16(os, 1);   // mono
  write_u32(os, sr);
  write_u32(os, sr * 2);  // byte rate
  write_u16(os, 2);       // block align
  write_u16(os, 16);      // bits per sample
  write_bytes(os, "data", 4);
  write_u32(os, data_size);
  for (double x : signal.samples) {
    long v = std::lround(x * 32768.0);
    v = std::clamp(v, -32768l, 32767l);
    write_i16(os, static_cast<std::int16_t>(v));
  }
  os.flush();
  if (!os) throw Error("write failed: " + path);
}

}  // namespace npasr
