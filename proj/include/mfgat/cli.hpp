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
#include <vector>

#include "mfgat/gradcheck_suite.hpp"

namespace mfgat::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,     // unexpected failure
  kUsage = 2,        // bad flags, unknown config keys
  kInput = 3,        // missing file or directory, malformed dataset/checkpoint
  kValidation = 4,   // inconsistent configuration or dimension mismatch
  kDivergence = 5,   // a training run produced a non-finite loss
  kGradcheck = 6,    // a gradient check exceeded its threshold
};

// Flat key=value file: one pair per line, '#' starts a comment line, blank
// lines ignored, surrounding whitespace trimmed.
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

// Runs `cases`, prints one line per case and returns kOk or kGradcheck; the
// failing case names go to `err`.
int report_gradcheck(const std::vector<GradcheckCase>& cases, double h, std::ostream& out,
                     std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfgat::cli
