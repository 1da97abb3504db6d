// Copyright 2026 The Lathe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The lathe command line, callable in-process.
//
//   lathe generate  --out DIR [--count N] [--seed S] [--jobs J] ...
//   lathe render    (--scene scene.json | --decomp decomp.json) --out img.png
//                   [--env e.pfm] [--pitch D] [--roll D]
//   lathe derender  (--image i.png --mask m.png | --input DIR) --out DIR
//                   [--config c.json] [--seed S] [--jobs J]
//   lathe eval      --pred DIR --gt DIR --out eval.csv [--jobs J]

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lathe::cli {

enum ExitCode : int {
  kOk = 0,
  kBadInput = 2,
  kOptimizerAbort = 3,
  kIoFailure = 4,
};

/// Files written by derender next to the ones shared with scene directories.
struct DecompFiles {
  static constexpr const char* kDecomp = "decomp.json";
  static constexpr const char* kRecon = "recon.png";
  static constexpr const char* kLoss = "loss.csv";
  static constexpr const char* kValid = "valid.png";  ///< texels the fit saw
};

/// Parses `args` (without the program name) and runs one subcommand.
/// Messages go to `out` and `err`; the return value is an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lathe::cli
