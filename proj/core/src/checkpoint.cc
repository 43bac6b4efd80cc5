// core/src/checkpoint.cc

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

#include "npasr/checkpoint.h"

#include <fstream>
#include <set>

#include "npasr/binary_io.h"
#include "npasr/error.h"

namespace npasr {

namespace {

std::string read_length_prefixed(std::istream& is, const char* what) {
  const std::uint32_t len = read_u32(is, what);
  std::string s(len, '\0');
  if (len > 0) read_bytes(is, s.data(), len, what);
  return s;
}

void write_length_prefixed(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  write_bytes(os, s.data(), s.size());
}

}  // namespace

void save_checkpoint(const Model& model, const Vocabulary& vocab, const std::string& path) {
  NPASR_CHECK(vocab.size() == model.config().vocab_size,
              "save_checkpoint: vocabulary size ", vocab.size(),
              " does not match config vocab_size ", model.config().vocab_size);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open for writing: " + path);

  write_bytes(os, kCheckpointMagic, 8);
  write_length_prefixed(os, model.config().to_key_value_text());
  write_length_prefixed(os, vocab.to_text());
  for (const auto& p : model.params().entries()) {
    write_length_prefixed(os, p->name);
    write_u32(os, static_cast<std::uint32_t>(p->dims.size()));
    for (std::size_t d : p->dims) write_u32(os, static_cast<std::uint32_t>(d));
    // Row-major traversal of the storage matrix.
    for (long r = 0; r < p->value.rows(); ++r) {
      for (long c = 0; c < p->value.cols(); ++c) {
        write_f32(os, static_cast<float>(p->value(r, c)));
      }
    }
  }
  os.flush();
  if (!os) throw Error("write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint: " + path);
  char magic[8];
  read_bytes(is, magic, 8, "checkpoint magic");
  if (std::string(magic, 8) != kCheckpointMagic) {
    throw FormatError(path + ": bad checkpoint magic");
  }

  LoadedCheckpoint out;
  out.config = NetworkConfig::from_key_value_text(
      read_length_prefixed(is, "checkpoint config"));
  out.vocab = Vocabulary::from_text(read_length_prefixed(is, "checkpoint vocabulary"));
  if (out.vocab.size() != out.config.vocab_size) {
    throw FormatError(detail::str_cat(path, ": vocabulary has ", out.vocab.size(),
                                      " tokens but config expects ",
                                      out.config.vocab_size));
  }
  out.model = std::make_unique<Model>(out.config, /*init_seed=*/0);

  std::set<std::string> filled;
  while (true) {
    // Parameter records run to EOF; a clean boundary is detected here.
    is.peek();
    if (is.eof()) break;
    const std::string name = read_length_prefixed(is, "parameter name");
    const std::uint32_t rank = read_u32(is, "parameter rank");
    std::vector<std::size_t> dims(rank);
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      dims[d] = read_u32(is, "parameter dims");
      total *= dims[d];
    }
    Parameter* p = out.model->params().find(name);
    if (p == nullptr) {
      throw FormatError(path + ": unknown parameter '" + name + "'");
    }
    if (p->dims != dims) {
      throw FormatError(detail::str_cat(path, ": dimension mismatch for parameter '",
                                        name, "'"));
    }
    NPASR_CHECK(total == p->count(), "checkpoint: dims inconsistent for '", name, "'");
    for (long r = 0; r < p->value.rows(); ++r) {
      for (long c = 0; c < p->value.cols(); ++c) {
        p->value(r, c) = static_cast<double>(read_f32(is, "parameter values"));
      }
    }
    filled.insert(name);
  }
  for (const auto& p : out.model->params().entries()) {
    if (!filled.contains(p->name)) {
      throw FormatError(path + ": checkpoint is missing parameter '" + p->name + "'");
    }
  }
  return out;
}

}  // namespace npasr
