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

// Run configuration: JSON file with typed keys (schema in configs/README.md).

#pragma once

#include "qpr/common.hpp"
#include "qpr/forcing.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace qpr {

struct Tolerances {
  double g_tol = -1.0;  // < 0: 1e-9 * max(eps, 1e-12)
  double h_tol = 1e-9;
  double newton_tol = 1e-14;
  double ode_tol = 1e-12;
  double ode_bound = 1e-6;
  double phase_lock = 1e-8;
  double oracle_agreement = 1e-8;
  double hessian_step = 2e-3;
  double jacobian_step = 1e-3;
};

struct RunConfig {
  std::vector<double> omega;
  int r = 1;
  std::vector<ForcingTerm> forcing;
  double phi0 = 1.0;
  double decay_xi = 0.0;
  std::vector<double> eps{1e-3};
  std::vector<double> beta0;  // empty: zeros
  int K = 3;
  int p_max = 0;
  int M_max = 8;
  int N = 8;
  int grid = 64;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  double ode_T = 1000.0;
  std::size_t tree_cap = 2'000'000;
  Tolerances tol;
  std::string mode = "expand";
  std::string output_dir = "out";

  nlohmann::json source;  // the parsed document, echoed into every report
};

inline const std::vector<std::string>& run_modes() {
  static const std::vector<std::string> modes{"bryuno", "trees", "selfenergy", "expand", "solve", "verify"};
  return modes;
}

// Throws ConfigError on missing/ill-typed keys or out-of-range values.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

ForcingModel build_model(const RunConfig& cfg);

// SHA-1 (hex) of the canonical serialisation of the effective configuration.
std::string config_hash(const RunConfig& cfg);
nlohmann::json config_echo(const RunConfig& cfg);

}  // namespace qpr
