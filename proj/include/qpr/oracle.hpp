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

// Independent checks of the range equation: spectral Galerkin-Newton,
// order-by-order Lindstedt series and direct integration of the flow.

#pragma once

#include "qpr/common.hpp"
#include "qpr/composition.hpp"
#include "qpr/forcing.hpp"
#include "qpr/frequency.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace qpr {

using ComplexCoefficients = std::map<Mode, Eigen::VectorXcd>;

ComplexCoefficients to_complex(const CoefficientMap& b);

// max over modes present in both maps and components of |a - b|.
double sup_difference(const CoefficientMap& a, const ComplexCoefficients& b);

struct GalerkinProblem {
  int N = 8;  // l1 cutoff on nu
  double eps = 0.0;
  std::vector<double> beta0;
  double newton_tol = 1e-14;
  int max_iter = 20;
  std::optional<ComplexCoefficients> warm_start;
};

struct GalerkinResult {
  ComplexCoefficients b;
  double residual = 0.0;  // sup over modes of the range equation
  int iterations = 0;
  double rcond = 1.0;     // reciprocal condition estimate of the last Jacobian
};

GalerkinResult galerkin_newton(const GalerkinProblem& problem, const ForcingModel& model,
                               const FrequencyVector& omega);

struct LindstedtSeries {
  std::vector<ComplexCoefficients> orders;  // [k] = b^(k), k = 1..K; [0] empty
  ComplexCoefficients sum(double eps) const;
};

LindstedtSeries lindstedt_expand(int K, std::span<const double> beta0, const ForcingModel& model,
                                 const FrequencyVector& omega, int N);

struct OdeSettings {
  double T = 1000.0;
  double tol = 1e-12;
  double sample_dt = 0.5;
};

struct OdeResult {
  double max_distance = 0.0;  // sup_t of the componentwise angular distance
  double worst_time = 0.0;
  std::size_t samples = 0;
};

// Integrates beta'' = -eps d_beta f(w t, beta) from the data of
// beta0 + b(w t) and compares with that curve on T^r.
OdeResult ode_residual(std::span<const double> beta0, const ComplexCoefficients& b, double eps,
                       const FrequencyVector& omega, const ForcingModel& model, const OdeSettings& settings = {});

}  // namespace qpr
