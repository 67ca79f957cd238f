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


#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "mfgat/model.hpp"

namespace mfgat {

// Model checkpoint, a line-oriented text file:
//
//   mfgat-checkpoint 1
//   config <key>=<value>        one line per ModelConfig field
//   meta <key>=<value>          free-form run metadata (dataset, split, seed)
//   tensor <name> <rows> <cols> <trainable 0|1>
//   <cols hex-float values>     one line per row, C99 "%a" notation
//   end
//
// Hex floats make the round trip bit-exact. Readers ignore unknown config
// keys so later versions can add fields without breaking old files.
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::map<std::string, std::string> meta;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws FormatError on malformed input, MissingInput if the file is absent.
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mfgat
