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

// Exact composition f(alpha, beta0 + b(alpha)) of finite Fourier series.

#pragma once

#include "qpr/common.hpp"
#include "qpr/forcing.hpp"
#include "qpr/frequency.hpp"
#include "qpr/trig_series.hpp"

#include <map>
#include <span>
#include <vector>

namespace qpr {

// Coefficients b_nu (r-vectors) of a real periodic map T^d -> R^r.
using CoefficientMap = std::map<Mode, Vec>;

// One TrigSeries per component, truncated to the l1 ball of the given radius.
std::vector<TrigSeries> to_series(const CoefficientMap& b, int d, int r, int radius);

struct Composed {
  TrigSeries f;                  // f(alpha, beta0 + b)
  std::vector<TrigSeries> grad;  // d_{beta_j} f(alpha, beta0 + b)
  std::vector<TrigSeries> hess;  // d_{beta_j} d_{beta_e} f, row-major (only if requested)
  double truncation = 0.0;       // mass dropped outside the ball
};

// derivs: 0 = f only, 1 = f and gradient, 2 = also the Hessian.
Composed compose_forcing(const ForcingModel& model, std::span<const double> beta0,
                         const std::vector<TrigSeries>& b, int radius, int derivs);

// [ -1/2 (w . d_alpha b)^2 + eps f(alpha, beta0 + b) ]_0
double averaged_lagrangian(const ForcingModel& model, const FrequencyVector& omega,
                           const CoefficientMap& b, double eps, std::span<const double> beta0,
                           int radius);

}  // namespace qpr
