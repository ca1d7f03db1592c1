// Copyright 2026 The QPR Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch driver behind the command line tool.
#pragma once

#include "qpr/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace qpr {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitMathRegion = 3,
  kExitBudget = 4,
};

struct RunOptions {
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

// Applies the command line overrides to a parsed config.
void apply_options(RunConfig& cfg, const RunOptions& opt);

// Runs one mode and writes its artifacts to cfg.output_dir.  Errors are
// reported as error.json plus a one-line JSON record on `err`; the return
// value is the process exit code.
int run(const RunConfig& cfg, bool strict, std::ostream& log, std::ostream& err);

// load_config + apply_options + run, with config errors mapped to exit 2.
int run_file(const std::string& path, const RunOptions& opt, std::ostream& log, std::ostream& err);

}  // namespace qpr
