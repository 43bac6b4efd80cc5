// core/src/config.cc

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

#include "npasr/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "npasr/error.h"

namespace npasr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

long parse_long(std::string_view key, std::string_view value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw FormatError(detail::str_cat("config: key '", key, "' expects an integer, got '",
                                      value, "'"));
  }
  return out;
}

int parse_int(std::string_view key, std::string_view value) {
  return static_cast<int>(parse_long(key, value));
}

double parse_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(std::string(value), &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw FormatError(detail::str_cat("config: key '", key, "' expects a number, got '",
                                      value, "'"));
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw FormatError(detail::str_cat("config: key '", key, "' expects a boolean, got '",
                                    value, "'"));
}

}  // namespace

void PipelineConfig::apply(std::string_view section, std::string_view key,
                           std::string_view value) {
  auto unknown_key = [&]() -> void {
    throw FormatError(detail::str_cat("config: unknown key '", key, "' in section [",
                                      section, "]"));
  };
  if (section == "paths") {
    if (key == "data_dir") data_dir = std::string(value);
    else if (key == "manifest") manifest = std::string(value);
    else if (key == "features_dir") features_dir = std::string(value);
    else if (key == "checkpoint_dir") checkpoint_dir = std::string(value);
    else unknown_key();
  } else if (section == "clip") {
    if (key == "window_length") clip.window_length = parse_long(key, value);
    else unknown_key();
  } else if (section == "mfcc") {
    if (key == "pre_emphasis") mfcc.pre_emphasis = parse_double(key, value);
    else if (key == "sub_hop") mfcc.sub_hop = parse_int(key, value);
    else if (key == "sub_window") mfcc.sub_window = parse_int(key, value);
    else if (key == "fft_size") mfcc.fft_size = parse_int(key, value);
    else if (key == "n_mels") mfcc.n_mels = parse_int(key, value);
    else if (key == "n_coeffs") mfcc.n_coeffs = parse_int(key, value);
    else if (key == "stack") mfcc.stack = parse_int(key, value);
    else if (key == "f_min") mfcc.f_min = parse_double(key, value);
    else if (key == "f_max") mfcc.f_max = parse_double(key, value);
    else unknown_key();
  } else if (section == "network") {
    if (key == "input_dim") network.input_dim = parse_int(key, value);
    else if (key == "conv_channels") network.conv_channels = parse_int(key, value);
    else if (key == "kernel_size") network.kernel_size = parse_int(key, value);
    else if (key == "stride") network.stride = parse_int(key, value);
    else if (key == "residual_blocks") network.residual_blocks = parse_int(key, value);
    else if (key == "convs_per_block") network.convs_per_block = parse_int(key, value);
    else if (key == "bilstm_layers") network.bilstm_layers = parse_int(key, value);
    else if (key == "hidden_size") network.hidden_size = parse_int(key, value);
    else if (key == "dropout_rate") network.dropout_rate = parse_double(key, value);
    else if (key == "vocab_size") network.vocab_size = parse_int(key, value);
    else unknown_key();
  } else if (section == "train") {
    if (key == "learning_rate") train.learning_rate = parse_double(key, value);
    else if (key == "beta1") train.beta1 = parse_double(key, value);
    else if (key == "beta2") train.beta2 = parse_double(key, value);
    else if (key == "epsilon") train.epsilon = parse_double(key, value);
    else if (key == "weight_decay") train.weight_decay = parse_double(key, value);
    else if (key == "batch_size") train.batch_size = parse_int(key, value);
    else if (key == "max_epochs") train.max_epochs = parse_int(key, value);
    else if (key == "seed") train.seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "speaker_split") speaker_split = parse_bool(key, value);
    else if (key == "train_fraction") train_fraction = parse_double(key, value);
    else unknown_key();
  } else if (section == "decode") {
    if (key == "beam_width") beam_width = parse_long(key, value);
    else if (key == "greedy") greedy = parse_bool(key, value);
    else unknown_key();
  } else {
    throw FormatError(detail::str_cat("config: unknown section [", section, "]"));
  }
}

PipelineConfig PipelineConfig::from_text(std::string_view text) {
  PipelineConfig cfg;
  std::string section;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') {
      if (pos > text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError(detail::str_cat("config line ", line_no, ": unterminated section"));
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (pos > text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(detail::str_cat("config line ", line_no, ": expected key = value"));
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError(detail::str_cat("config line ", line_no, ": empty key"));
    }
    cfg.apply(section, key, value);
    if (pos > text.size()) break;
  }
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open config: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_text(buf.str());
}

}  // namespace npasr
