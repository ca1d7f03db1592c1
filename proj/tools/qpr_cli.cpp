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

#include "qpr/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Quasi-periodic response solutions by renormalised tree expansion"};
  std::string config;
  qpr::RunOptions opt;
  app.add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--mode", opt.mode, "bryuno | trees | selfenergy | expand | solve | verify");
  app.add_option("--workers", opt.workers, "worker threads for the grid search");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--seed", opt.seed, "seed for the grid jitter (0: no jitter)");
  app.add_flag("--strict", opt.strict, "treat warnings as failures");
  CLI11_PARSE(app, argc, argv);
  return qpr::run_file(config, opt, std::clog, std::cerr);
}
