/*
 * Copyright 2026 The MFGAT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "mfgat/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mfgat/error.hpp"

namespace mfgat {

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::pair<std::string, std::string> split_kv(const std::string& text, const std::string& source,
                                             std::size_t line) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw FormatError(source, line, "expected key=value");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "mfgat-checkpoint " << kCheckpointVersion << "\n";
  for (const auto& [k, v] : to_key_values(ckpt.config)) out << "config " << k << "=" << v << "\n";
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << "=" << v << "\n";
  for (const NamedTensor& t : ckpt.params) {
    out << "tensor " << t.name << " " << t.value.rows() << " " << t.value.cols() << " "
        << (t.trainable ? 1 : 0) << "\n";
    for (std::size_t r = 0; r < t.value.rows(); ++r) {
      for (std::size_t c = 0; c < t.value.cols(); ++c) out << (c ? " " : "") << hex(t.value(r, c));
      out << "\n";
    }
  }
  out << "end\n";
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw MissingInput("cannot write checkpoint: " + path.string());
  write_checkpoint(out, ckpt);
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  Checkpoint ckpt;
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next()) throw FormatError(source, 0, "empty checkpoint");
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "mfgat-checkpoint") throw FormatError(source, line_no, "not a checkpoint");
    if (version != kCheckpointVersion) {
      throw FormatError(source, line_no, "unsupported checkpoint version " + std::to_string(version));
    }
  }
  std::map<std::string, std::string> config_kv;
  bool ended = false;
  while (next()) {
    if (line.empty()) continue;
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "config" || kind == "meta") {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      auto [k, v] = split_kv(rest, source, line_no);
      (kind == "config" ? config_kv : ckpt.meta)[k] = v;
    } else if (kind == "tensor") {
      std::string name;
      std::size_t rows = 0, cols = 0;
      int trainable = 1;
      if (!(ls >> name >> rows >> cols >> trainable)) {
        throw FormatError(source, line_no, "malformed tensor header");
      }
      Tensor t(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (!next()) throw FormatError(source, line_no, "truncated tensor '" + name + "'");
        const char* p = line.c_str();
        for (std::size_t c = 0; c < cols; ++c) {
          char* endp = nullptr;
          t(r, c) = std::strtod(p, &endp);
          if (endp == p) throw FormatError(source, line_no, "bad value in tensor '" + name + "'");
          p = endp;
        }
      }
      ckpt.params.add(name, std::move(t), trainable != 0);
    } else {
      throw FormatError(source, line_no, "unknown record '" + kind + "'");
    }
  }
  if (!ended) throw FormatError(source, line_no, "missing 'end' marker");
  try {
    apply_key_values(ckpt.config, config_kv);
  } catch (const InvalidInput& e) {
    throw FormatError(source, 0, e.what());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("checkpoint not found: " + path.string());
  return read_checkpoint(in, path.filename().string());
}

}  // namespace mfgat
